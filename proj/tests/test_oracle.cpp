#include <doctest.h>

#include <lux/errors.hpp>
#include <lux/oracle.hpp>
#include <lux/params.hpp>
#include <lux/shooting.hpp>

#include <algorithm>
#include <cmath>

using namespace lux;

namespace {

const ScaledParams kB{3.0, 5.0 / 12.0, 12.0, 6.0};

// Small enough to keep the suite quick, fine enough to resolve the
// singular plateau.
OracleConfig quick_config() {
    OracleConfig cfg;
    cfg.n_time = 800;
    cfg.n_state = 400;
    cfg.u_levels = 15;
    cfg.y0_scan = 24;
    cfg.threads = 2;
    return cfg;
}

}  // namespace

TEST_CASE("grid value iteration approaches the shooting optimum from below the grid error") {
    const OracleResult res = dp_optimize(kB, quick_config());
    CHECK(res.objective == doctest::Approx(5.4341918).epsilon(0.03));
    CHECK(res.periodicity_defect < 0.05);
    CHECK(res.t.size() == static_cast<std::size_t>(res.config.n_time) + 1);
    CHECK(res.u.size() == static_cast<std::size_t>(res.config.n_time));
    CHECK(res.y.size() == res.t.size());
    CHECK(res.y0_values.size() == static_cast<std::size_t>(res.config.y0_scan));
    const double best =
        *std::max_element(res.y0_objectives.begin(), res.y0_objectives.end());
    CHECK(best == doctest::Approx(res.objective).epsilon(1e-12));
    // Dawn state lands inside the invariant interval scanned.
    CHECK(res.y0_star >= res.y0_values.front() - 1e-12);
    CHECK(res.y0_star <= res.y0_values.back() + 1e-12);
}

TEST_CASE("finer grids tighten the oracle value") {
    OracleConfig coarse = quick_config();
    coarse.n_time = 400;
    coarse.n_state = 200;
    coarse.u_levels = 11;
    const double err_coarse =
        std::abs(dp_optimize(kB, coarse).objective - 5.4341918) / 5.4341918;
    const double err_quick =
        std::abs(dp_optimize(kB, quick_config()).objective - 5.4341918) / 5.4341918;
    CHECK(err_coarse < 0.08);
    CHECK(err_quick < 0.03);
}

TEST_CASE("oracle runs are deterministic across thread counts") {
    OracleConfig cfg = quick_config();
    const OracleResult a = dp_optimize(kB, cfg);
    cfg.threads = 4;
    const OracleResult b = dp_optimize(kB, cfg);
    CHECK(a.objective == b.objective);
    CHECK(a.y0_star == b.y0_star);
    REQUIRE(a.u.size() == b.u.size());
    CHECK(std::equal(a.u.begin(), a.u.end(), b.u.begin()));
}

TEST_CASE("rollout control reads as coast, singular dwell, harvest") {
    const OracleResult res = dp_optimize(kB, quick_config());
    const SwitchEstimates est = estimate_switches(res, kB);
    REQUIRE(est.recognized);
    CHECK(est.structure == StructureKind::BangSingularBang);
    REQUIRE(est.t0s.has_value());
    REQUIRE(est.ts1.has_value());
    REQUIRE(est.t10.has_value());
    CHECK(est.grid_dt > 0.0);
    // Grid-limited accuracy: the chatter band blurs the singular entry and
    // exit, the dark switch is sharp.
    CHECK(std::abs(*est.t0s - 2.195788) < 0.6);
    CHECK(std::abs(*est.ts1 - 4.642862) < 0.6);
    CHECK(std::abs(*est.t10 - 6.694750) < 0.3);
    CHECK(est.init.t0s.has_value());
    CHECK(est.init.t10.has_value());
}

TEST_CASE("direct-search refinement recovers the optimum to simulation accuracy") {
    const OracleResult res = dp_optimize(kB, quick_config());
    const SwitchEstimates est = estimate_switches(res, kB);
    REQUIRE(est.recognized);
    const RefinedEstimates ref = refine_switches(est, kB);
    REQUIRE(ref.ok);
    CHECK(ref.objective == doctest::Approx(5.4341918).epsilon(1e-6));
    REQUIRE(ref.ts1.has_value());
    REQUIRE(ref.t10.has_value());
    CHECK(std::abs(*ref.ts1 - 4.642862) < 5e-3);
    CHECK(std::abs(*ref.t10 - 6.694750) < 5e-3);
    CHECK(std::abs(ref.y0 - 0.053232) < 1e-3);
    CHECK(ref.evaluations > 0);
}

TEST_CASE("time-averaged rollout control matches the singular level inside the dwell") {
    const OracleResult res = dp_optimize(kB, quick_config());
    // Inside (t0s, ts1) the grid chatters between admissible levels around
    // u_sigma; its average must still track the singular control.
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < res.u.size(); ++i) {
        const double t = res.t[i];
        if (t > 2.6 && t < 4.2) {
            sum += res.u[i];
            ++count;
        }
    }
    REQUIRE(count > 10);
    CHECK(sum / count == doctest::Approx(0.701367).epsilon(0.08));
}

TEST_CASE("infeasible problems require an explicit scan range") {
    const ScaledParams sp{0.75, 5.0 / 12.0, 12.0, 6.0};
    CHECK_THROWS_AS(dp_optimize(sp, quick_config()), InfeasibleError);

    OracleConfig cfg = quick_config();
    cfg.y0_scan = 8;
    cfg.y0_range = std::make_pair(1e-3, 0.5);
    const OracleResult res = dp_optimize(sp, cfg);
    CHECK(std::isfinite(res.objective));
    CHECK(res.objective >= 0.0);
}
