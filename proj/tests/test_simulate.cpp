#include <doctest.h>

#include <lux/analytic.hpp>
#include <lux/errors.hpp>
#include <lux/params.hpp>
#include <lux/policy.hpp>
#include <lux/simulate.hpp>

#include <algorithm>
#include <cmath>

using namespace lux;

namespace {
const ScaledParams kB{3.0, 5.0 / 12.0, 12.0, 6.0};
const LightSchedule kStep{LightKind::Step};
}  // namespace

TEST_CASE("policy helpers") {
    const Policy p = Policy::from_switches({2.0, 7.0}, {0.0, 0.7, 1.0}, 12.0);
    CHECK(p.u_at(1.0) == 0.0);
    CHECK(p.u_at(2.0) == 0.7);
    CHECK(p.u_at(6.9) == 0.7);
    CHECK(p.u_at(7.0) == 1.0);
    CHECK(p.u_at(11.9) == 1.0);
    CHECK_NOTHROW(p.validate(12.0));

    // Zero-length pieces are dropped.
    const Policy q = Policy::from_switches({0.0, 5.0}, {0.3, 0.3, 0.9}, 12.0);
    CHECK(q.segments.size() == 2);

    Policy bad = Policy::constant(1.5, 12.0);
    CHECK_THROWS_AS(bad.validate(12.0), InvalidParams);
}

TEST_CASE("uncontrolled orbit from y0_max returns to dawn") {
    const double y0 = *y0_max(kB);
    const Trajectory tr = simulate(Policy::constant(0.0, kB.T), y0, kB, kStep, {});
    CHECK(tr.objective == 0.0);
    CHECK_FALSE(tr.clamped_at_zero);
    CHECK(tr.y.back() == doctest::Approx(y0).epsilon(1e-9));
}

TEST_CASE("full-harvest orbit from y0_min returns to dawn") {
    const double y0 = y0_min(kB);
    const Trajectory tr = simulate(Policy::constant(1.0, kB.T), y0, kB, kStep, {});
    CHECK(tr.y.back() == doctest::Approx(y0).epsilon(1e-7));
    CHECK(tr.objective > 0.0);
}

TEST_CASE("one period composes lit flow with dark decay") {
    const double y0 = 0.2, u = 0.4;
    const Trajectory tr = simulate(Policy::constant(u, kB.T), y0, kB, kStep, {});
    const double y_dusk = light_phase_flow(y0, u, kB.T_light, kB);
    const double y_dawn = dark_phase_map(y_dusk, u, kB.dark_span(), kB);
    CHECK(tr.y.back() == doctest::Approx(y_dawn).epsilon(1e-9));
}

TEST_CASE("steady lit culture yields the steady productivity") {
    // Fully lit period held at the singular equilibrium.
    const ScaledParams sp{3.0, 5.0 / 12.0, 6.0, 6.0};
    const EquilibriumSummary eq = equilibrium_summary(sp);
    const Trajectory tr =
        simulate(Policy::constant(eq.u_opt, sp.T), eq.y_opt, sp, kStep, {});
    CHECK(tr.objective / sp.T == doctest::Approx(eq.productivity_opt).epsilon(1e-9));
    CHECK(tr.y.back() == doctest::Approx(eq.y_opt).epsilon(1e-9));
}

TEST_CASE("simpson objective matches the closed-form lit harvest") {
    const ScaledParams sp{3.0, 5.0 / 12.0, 6.0, 6.0};  // no dark phase
    const Trajectory tr = simulate(Policy::constant(1.0, sp.T), 4.0, sp, kStep, {});
    const double J_closed = light_phase_harvest(4.0, tr.y.back(), 1.0, sp);
    CHECK(tr.objective == doctest::Approx(J_closed).epsilon(1e-9));
}

TEST_CASE("nodes land exactly on policy switches and nightfall") {
    const Policy p = Policy::from_switches({1.2345}, {0.0, 1.0}, kB.T);
    const Trajectory tr = simulate(p, 0.3, kB, kStep, {});
    auto contains = [&](double t) {
        return std::any_of(tr.t.begin(), tr.t.end(),
                           [&](double v) { return std::abs(v - t) < 1e-12; });
    };
    CHECK(contains(1.2345));
    CHECK(contains(kB.T_light));
    CHECK(std::is_sorted(tr.t.begin(), tr.t.end()));
    CHECK(tr.t.front() == 0.0);
    CHECK(tr.t.back() == doctest::Approx(kB.T).epsilon(1e-14));
    CHECK(tr.t.size() == tr.y.size());
    CHECK(tr.t.size() == tr.u.size());
}

TEST_CASE("objective is independent of recording") {
    const Policy p = Policy::from_switches({2.0, 8.0}, {0.0, 1.0, 0.0}, kB.T);
    const Trajectory a = simulate(p, 0.3, kB, kStep, {1e-3, true});
    const Trajectory b = simulate(p, 0.3, kB, kStep, {1e-3, false});
    CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-15));
    CHECK(b.t.size() == 2);  // unrecorded runs keep only the endpoints
    CHECK(b.y.back() == doctest::Approx(a.y.back()).epsilon(1e-15));
}

TEST_CASE("halving the step leaves the objective unchanged to tolerance") {
    const Policy p = Policy::from_switches({2.2, 6.7}, {0.0, 1.0, 0.0}, kB.T);
    const Trajectory a = simulate(p, 0.3, kB, kStep, {1e-3, false});
    const Trajectory b = simulate(p, 0.3, kB, kStep, {5e-4, false});
    CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-10));
}

TEST_CASE("squared-sine schedule grows less than the step schedule") {
    const Policy p = Policy::constant(0.3, kB.T);
    const Trajectory step = simulate(p, 0.3, kB, kStep, {});
    const Trajectory sine = simulate(p, 0.3, kB, {LightKind::SquaredSine}, {});
    CHECK(sine.objective < step.objective);
    CHECK(sine.objective > 0.0);
}

TEST_CASE("ln-model simulation is consistent under step halving") {
    const PhysicalParams p = PhysicalParams::canonical();
    const ScaledParams sp = scale(p);
    const Policy pol = Policy::constant(0.5, sp.T);
    const Trajectory a = simulate_ln(pol, 0.5, p, kStep, {1e-3, false});
    const Trajectory b = simulate_ln(pol, 0.5, p, kStep, {5e-4, false});
    CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-9));
    CHECK(a.objective > 0.0);
}

TEST_CASE("periodic dawn state under constant controls") {
    double defect = 1.0;
    const double y_free = periodic_y0(Policy::constant(0.0, kB.T), kB, kStep,
                                      {1e-3, false}, 0.2, &defect);
    CHECK(y_free == doctest::Approx(*y0_max(kB)).epsilon(1e-7));
    CHECK(defect < 1e-9);

    const double y_full = periodic_y0(Policy::constant(1.0, kB.T), kB, kStep,
                                      {1e-3, false}, 0.2, &defect);
    CHECK(y_full == doctest::Approx(y0_min(kB)).epsilon(1e-4));
    CHECK(defect < 1e-9);
}

TEST_CASE("periodic dawn state under a switching policy") {
    const Policy p = Policy::from_switches({2.2, 4.6, 6.7}, {0.0, 0.7, 1.0, 0.0}, kB.T);
    double defect = 1.0;
    const double y0 = periodic_y0(p, kB, kStep, {1e-3, false}, 0.1, &defect);
    CHECK(defect < 1e-10);
    const Trajectory tr = simulate(p, y0, kB, kStep, {});
    CHECK(tr.y.back() == doctest::Approx(y0).epsilon(1e-8));
}
