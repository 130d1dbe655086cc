#include "lux/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lux/analytic.hpp"
#include "lux/errors.hpp"
#include "lux/simulate.hpp"
#include "parallel.hpp"

namespace lux {

namespace {

struct Grid {
    int n_time, n_light, n_dark, n_state, n_u;
    double dt_light, dt_dark, y_max, dy;
    std::vector<double> u_levels;
    // One-step RK4 transitions, collapsed by phase: the dynamics are
    // autonomous within each phase, so a light slice and a dark slice
    // reproduce the full per-stage table exactly.
    std::vector<float> next_light;  // [state * n_u + u]
    std::vector<float> next_dark;

    double dt(int k) const { return k < n_light ? dt_light : dt_dark; }
    bool light(int k) const { return k < n_light; }
    const std::vector<float>& table(int k) const { return light(k) ? next_light : next_dark; }
    double y_of(int j) const { return y_max * j / (n_state - 1); }
};

double rk4_reduced(double y, double u, double mu, double r, double h) {
    auto f = [&](double yv) { return mu * yv / (1.0 + yv) - (r + u) * yv; };
    const double k1 = f(y);
    const double k2 = f(y + 0.5 * h * k1);
    const double k3 = f(y + 0.5 * h * k2);
    const double k4 = f(y + h * k3);
    return y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
}

Grid build_grid(const ScaledParams& sp, const OracleConfig& cfg) {
    Grid g;
    g.n_time = cfg.n_time;
    g.n_light = std::clamp(static_cast<int>(std::lround(cfg.n_time * sp.T_light / sp.T)),
                           1, cfg.n_time - 1);
    g.n_dark = cfg.n_time - g.n_light;
    g.n_state = cfg.n_state;
    g.dt_light = sp.T_light / g.n_light;
    g.dt_dark = (sp.T - sp.T_light) / g.n_dark;
    g.y_max = cfg.y_grid_max > 0 ? cfg.y_grid_max : 1.2 * (sp.mu_bar - sp.r) / sp.r;
    g.dy = g.y_max / (g.n_state - 1);

    for (int i = 0; i < cfg.u_levels; ++i) {
        g.u_levels.push_back(static_cast<double>(i) / (cfg.u_levels - 1));
    }
    const double us = u_singular(sp);
    if (us > 0 && us < 1) g.u_levels.push_back(us);
    std::sort(g.u_levels.begin(), g.u_levels.end());
    g.u_levels.erase(std::unique(g.u_levels.begin(), g.u_levels.end()), g.u_levels.end());
    g.n_u = static_cast<int>(g.u_levels.size());

    g.next_light.resize(static_cast<size_t>(g.n_state) * g.n_u);
    g.next_dark.resize(static_cast<size_t>(g.n_state) * g.n_u);
    for (int j = 0; j < g.n_state; ++j) {
        const double y = g.y_of(j);
        for (int a = 0; a < g.n_u; ++a) {
            const double u = g.u_levels[a];
            g.next_light[static_cast<size_t>(j) * g.n_u + a] = static_cast<float>(
                std::clamp(rk4_reduced(y, u, sp.mu_bar, sp.r, g.dt_light), 0.0, g.y_max));
            g.next_dark[static_cast<size_t>(j) * g.n_u + a] = static_cast<float>(
                std::clamp(rk4_reduced(y, u, 0.0, sp.r, g.dt_dark), 0.0, g.y_max));
        }
    }
    return g;
}

double interp(const std::vector<double>& V, double y, const Grid& g) {
    const double pos = std::clamp(y, 0.0, g.y_max) / g.y_max * (g.n_state - 1);
    int j = std::min(static_cast<int>(pos), g.n_state - 2);
    const double w = pos - j;
    return V[j] * (1.0 - w) + V[j + 1] * w;
}

double interp(const float* V, double y, const Grid& g) {
    const double pos = std::clamp(y, 0.0, g.y_max) / g.y_max * (g.n_state - 1);
    int j = std::min(static_cast<int>(pos), g.n_state - 2);
    const double w = pos - j;
    return V[j] * (1.0 - w) + V[j + 1] * w;
}

// Backward value iteration for dawn state y0; stages holds the value
// function of every step, (n_time + 1) * n_state floats, stage-major.
void backward_pass(const Grid& g, double y0, double penalty, std::vector<float>& stages) {
    stages.resize(static_cast<size_t>(g.n_time + 1) * g.n_state);
    std::vector<double> V(g.n_state), Vn(g.n_state);
    for (int j = 0; j < g.n_state; ++j) V[j] = -penalty * std::abs(g.y_of(j) - y0);
    auto store = [&](int k) {
        float* row = stages.data() + static_cast<size_t>(k) * g.n_state;
        for (int j = 0; j < g.n_state; ++j) row[j] = static_cast<float>(V[j]);
    };
    store(g.n_time);
    for (int k = g.n_time - 1; k >= 0; --k) {
        const auto& tab = g.table(k);
        const double dt = g.dt(k);
        for (int j = 0; j < g.n_state; ++j) {
            const double y = g.y_of(j);
            double best = -1e300;
            for (int a = 0; a < g.n_u; ++a) {
                const double yn = tab[static_cast<size_t>(j) * g.n_u + a];
                const double v = g.u_levels[a] * dt * 0.5 * (y + yn) + interp(V, yn, g);
                if (v > best) best = v;
            }
            Vn[j] = best;
        }
        V.swap(Vn);
        store(k);
    }
}

struct Rollout {
    double J = 0;
    double defect = 0;
    std::vector<double> y;  // filled only when record
    std::vector<double> u;
};

// Greedy forward pass in the continuous state against the stored values.
// Ties go to the smaller control level.
Rollout roll_forward(const Grid& g, const ScaledParams& sp, const std::vector<float>& stages,
                     double y0, bool record) {
    Rollout out;
    double y = y0;
    if (record) {
        out.y.reserve(g.n_time + 1);
        out.u.reserve(g.n_time);
        out.y.push_back(y);
    }
    for (int k = 0; k < g.n_time; ++k) {
        const double dt = g.dt(k);
        const double mu = g.light(k) ? sp.mu_bar : 0.0;
        const float* Vn = stages.data() + static_cast<size_t>(k + 1) * g.n_state;
        double best = -1e300, yn_best = y, u_best = 0;
        for (int a = 0; a < g.n_u; ++a) {
            const double u = g.u_levels[a];
            const double yn = std::clamp(rk4_reduced(y, u, mu, sp.r, dt), 0.0, g.y_max);
            const double v = u * dt * 0.5 * (y + yn) + interp(Vn, yn, g);
            if (v > best) { best = v; yn_best = yn; u_best = u; }
        }
        out.J += u_best * dt * 0.5 * (y + yn_best);
        y = yn_best;
        if (record) {
            out.u.push_back(u_best);
            out.y.push_back(y);
        }
    }
    out.defect = std::abs(y - y0);
    return out;
}

}  // namespace

OracleResult dp_optimize(const ScaledParams& sp, const OracleConfig& cfg_in) {
    validate(sp);
    OracleConfig cfg = cfg_in;
    if (cfg.n_time < 16 || cfg.n_state < 16 || cfg.u_levels < 2 || cfg.y0_scan < 1) {
        throw InvalidParams("dp_optimize: grid configuration too small");
    }

    double y_lo, y_hi;
    if (cfg.y0_range) {
        y_lo = cfg.y0_range->first;
        y_hi = cfg.y0_range->second;
        if (!(y_hi >= y_lo) || !(y_lo >= 0)) {
            throw InvalidParams("dp_optimize: bad y0_range");
        }
    } else {
        const auto bounds = feasibility_bounds(sp);
        if (!bounds.feasible) {
            throw InfeasibleError(
                "dp_optimize: infeasible parameters; pass y0_range to scan anyway");
        }
        y_lo = std::max(bounds.y0_min, 1e-6);
        y_hi = bounds.y0_max;
    }

    const Grid g = build_grid(sp, cfg);
    cfg.y_grid_max = g.y_max;

    OracleResult res;
    res.y0_values.resize(cfg.y0_scan);
    res.y0_objectives.resize(cfg.y0_scan);
    for (int i = 0; i < cfg.y0_scan; ++i) {
        res.y0_values[i] = cfg.y0_scan == 1
                               ? y_lo
                               : y_lo + (y_hi - y_lo) * i / (cfg.y0_scan - 1);
    }
    // Each dawn state gets its own penalized backward pass and a greedy
    // rollout; y0_objectives holds the penalty-free rolled-out harvest.
    detail::parallel_for(cfg.y0_scan, cfg.threads, [&](int i) {
        thread_local std::vector<float> stages;
        backward_pass(g, res.y0_values[i], cfg.penalty, stages);
        res.y0_objectives[i] = roll_forward(g, sp, stages, res.y0_values[i], false).J;
    });

    int best_i = 0;
    for (int i = 1; i < cfg.y0_scan; ++i) {
        if (res.y0_objectives[i] > res.y0_objectives[best_i]) best_i = i;  // ties: smaller y0
    }
    const double y0 = res.y0_values[best_i];

    // Re-run the winner with recording for the reported trajectory.
    std::vector<float> stages;
    backward_pass(g, y0, cfg.penalty, stages);
    const Rollout win = roll_forward(g, sp, stages, y0, true);

    res.t.resize(g.n_time + 1);
    for (int k = 0; k <= g.n_time; ++k) {
        res.t[k] = k <= g.n_light ? k * g.dt_light
                                  : sp.T_light + (k - g.n_light) * g.dt_dark;
    }
    res.y = win.y;
    res.u = win.u;
    res.objective = win.J;
    res.y0_star = y0;
    res.periodicity_defect = win.defect;
    res.config = cfg;
    return res;
}

// ------------------------------------------------------------ estimation

namespace {

enum Band { kU0, kU1, kMid };

struct Run {
    Band band;
    int begin, end;  // step indices, [begin, end)
    double u_sum;    // time-integral of u over the run
    double uy_sum;   // harvest integral of u*y over the run
};

// Run-length encode the rollout controls over step range [k0, k1), then
// merge every run shorter than 5 steps into its neighbours as a Mid
// (chatter) band.
std::vector<Run> bands_of(const OracleResult& r, int k0, int k1, double dt) {
    auto label = [&](double u) {
        if (u <= 0.03) return kU0;
        if (u >= 0.97) return kU1;
        return kMid;
    };
    std::vector<Run> runs;
    for (int k = k0; k < k1; ++k) {
        const Band b = label(r.u[k]);
        const double uy = r.u[k] * dt * 0.5 * (r.y[k] + r.y[k + 1]);
        if (!runs.empty() && runs.back().band == b && runs.back().end == k) {
            runs.back().end = k + 1;
            runs.back().u_sum += r.u[k] * dt;
            runs.back().uy_sum += uy;
        } else {
            runs.push_back({b, k, k + 1, r.u[k] * dt, uy});
        }
    }
    // Chatter collapse: any run shorter than 5 steps is demoted to a Mid
    // band; adjacent bands with equal labels coalesce.  A Mid band that
    // is still shorter than 5 steps after coalescing is not a singular
    // dwell but the transition at a plain switch, so it joins the band
    // that follows it.
    constexpr int kChatter = 5;
    std::vector<Run> merged;
    for (const auto& run : runs) {
        const Band b = (run.end - run.begin) < kChatter ? kMid : run.band;
        if (!merged.empty() && merged.back().band == b) {
            merged.back().end = run.end;
            merged.back().u_sum += run.u_sum;
            merged.back().uy_sum += run.uy_sum;
        } else {
            merged.push_back({b, run.begin, run.end, run.u_sum, run.uy_sum});
        }
    }
    std::vector<Run> cleaned;
    for (size_t i = 0; i < merged.size(); ++i) {
        Run run = merged[i];
        if (run.band == kMid && (run.end - run.begin) < kChatter &&
            i + 1 < merged.size()) {
            merged[i + 1].begin = run.begin;
            merged[i + 1].u_sum += run.u_sum;
            merged[i + 1].uy_sum += run.uy_sum;
            continue;
        }
        if (!cleaned.empty() && cleaned.back().band == run.band) {
            cleaned.back().end = run.end;
            cleaned.back().u_sum += run.u_sum;
            cleaned.back().uy_sum += run.uy_sum;
        } else {
            cleaned.push_back(run);
        }
    }
    return cleaned;
}

}  // namespace

SwitchEstimates estimate_switches(const OracleResult& r, const ScaledParams& sp) {
    SwitchEstimates est;
    const int n_time = static_cast<int>(r.u.size());
    int n_light = 0;
    while (n_light < n_time && r.t[n_light] < sp.T_light - 1e-12) ++n_light;
    const double dt_light = n_light > 0 ? sp.T_light / n_light : 0.0;
    const double dt_dark = n_time > n_light ? (sp.T - sp.T_light) / (n_time - n_light) : 0.0;
    est.grid_dt = std::max(dt_light, dt_dark);

    const auto light_bands = bands_of(r, 0, n_light, dt_light);
    const auto dark_bands = bands_of(r, n_light, n_time, dt_dark);

    auto t_at = [&](int k) { return r.t[k]; };

    // Dark phase: expect harvest first, then coast; the 1 -> 0 boundary
    // is the dusk switch.  The rollout's terminal closure sheds the last
    // bit of biomass through short harvest blips near the period end, so
    // bands after the first coast only disqualify the reading when they
    // carry a material share of the dark-phase harvest.
    double t10 = sp.T;
    bool dark_ok = true;
    if (dark_bands.empty()) {
        dark_ok = false;
    } else if (dark_bands.size() == 1) {
        const auto& b = dark_bands.front();
        if (b.band == kU1) t10 = sp.T;
        else if (b.band == kU0) t10 = sp.T_light;
        else dark_ok = false;
    } else {
        const auto& first = dark_bands.front();
        t10 = first.band == kU0 ? sp.T_light : t_at(first.end);
        double total = 0.0, late = 0.0;
        for (size_t i = 0; i < dark_bands.size(); ++i) {
            total += dark_bands[i].uy_sum;
            if (i >= 1 || first.band == kU0) late += dark_bands[i].uy_sum;
        }
        dark_ok = late <= std::max(0.05 * total, 0.02 * std::abs(r.objective));
    }

    // Light phase patterns: U0,U1 | U0,Mid,U1 | U0,Mid | U1.
    auto seq = [&]() {
        std::string s;
        for (const auto& b : light_bands) {
            s += b.band == kU0 ? '0' : b.band == kU1 ? '1' : 'S';
        }
        return s;
    }();

    est.recognized = dark_ok;
    if (seq == "01") {
        est.structure = StructureKind::BangBang;
        est.t01 = t_at(light_bands[0].end);
        est.t10 = t10;
        est.init.t01 = est.t01;
        est.init.t10 = est.t10;
    } else if (seq == "0S1") {
        est.structure = StructureKind::BangSingularBang;
        est.t0s = t_at(light_bands[0].end);
        est.ts1 = t_at(light_bands[1].end);
        est.t10 = t10;
        est.init.t0s = est.t0s;
        est.init.ts1 = est.ts1;
        est.init.t10 = est.t10;
    } else if (seq == "0S") {
        est.structure = StructureKind::SingularToDark;
        est.t0s = t_at(light_bands[0].end);
        est.t10 = t10;
        est.init.t0s = est.t0s;
    } else if (seq == "1") {
        est.structure = StructureKind::ConstantMax;
        est.t10 = t10;
    } else {
        est.recognized = false;
    }
    return est;
}

// ---------------------------------------------------------- refinement

namespace {

struct DirectProblem {
    StructureKind structure;
    ScaledParams sp;
    SimOptions sim;
    LightSchedule schedule;

    // Builds the policy for parameter vector th; y0-dependent pieces
    // (the growth arc before a singular dwell) are resolved per closure
    // iterate.  Returns nullopt when th leaves its window.
    std::optional<Policy> policy_for(const std::vector<double>& th, double y0) const {
        const double T = sp.T, Tb = sp.T_light;
        const double us = u_singular(sp);
        const double ys = y_singular(sp);
        auto grow_time = [&](double target_upper) {
            double t0s = 0.0;
            if (y0 < ys) {
                try {
                    t0s = light_phase_time(y0, ys, 0.0, sp);
                } catch (const NumericsError&) {
                    return target_upper;
                }
            }
            return std::clamp(t0s, 0.0, target_upper);
        };
        switch (structure) {
            case StructureKind::BangBang: {
                const double t01 = th[0], t10 = th[1];
                if (!(t01 > 1e-9 && t01 < Tb - 1e-9)) return std::nullopt;
                if (!(t10 > Tb + 1e-9 && t10 <= T)) return std::nullopt;
                return Policy::from_switches({t01, Tb, t10}, {0, 1, 1, 0}, T);
            }
            case StructureKind::BangSingularBang: {
                const double ts1 = th[0], t10 = th[1];
                if (!(ts1 > 1e-9 && ts1 < Tb - 1e-9)) return std::nullopt;
                if (!(t10 > Tb + 1e-9 && t10 <= T)) return std::nullopt;
                const double t0s = grow_time(ts1);
                return Policy::from_switches({t0s, ts1, Tb, t10}, {0, us, 1, 1, 0}, T);
            }
            case StructureKind::SingularToDark: {
                const double t10 = th[0];
                if (!(t10 >= Tb && t10 <= T)) return std::nullopt;
                const double t0s = grow_time(Tb - 1e-9);
                return Policy::from_switches({t0s, Tb, t10}, {0, us, 1, 0}, T);
            }
            case StructureKind::ConstantMax:
                return Policy::constant(1.0, T);
        }
        return std::nullopt;
    }

    // Simulated harvest with the dawn state closed to a periodic orbit.
    // The policy is rebuilt each closure iterate because its singular
    // entry time depends on y0.
    std::optional<std::pair<double, double>> evaluate(const std::vector<double>& th,
                                                     double y0_guess) const {
        double y0 = std::max(y0_guess, 1e-8);
        double defect = 1e300;
        for (int it = 0; it < 80; ++it) {
            auto pol = policy_for(th, y0);
            if (!pol) return std::nullopt;
            SimOptions fast = sim;
            fast.record = false;
            const auto tr = simulate(*pol, y0, sp, schedule, fast);
            const double yT = tr.y.back();
            const double d = std::abs(yT - y0);
            if (d < 1e-12 * std::max(1.0, y0)) { y0 = yT; defect = d; break; }
            if (it > 40 && d > defect) break;  // stalled
            defect = d;
            y0 = yT;
        }
        auto pol = policy_for(th, y0);
        if (!pol) return std::nullopt;
        SimOptions fast = sim;
        fast.record = false;
        const auto tr = simulate(*pol, y0, sp, schedule, fast);
        return std::make_pair(tr.objective, y0);
    }
};

}  // namespace

RefinedEstimates refine_switches(const SwitchEstimates& est, const ScaledParams& sp) {
    RefinedEstimates out;
    out.structure = est.structure;
    if (!est.recognized) return out;

    DirectProblem prob;
    prob.structure = est.structure;
    prob.sp = sp;
    prob.sim.step = sp.T / 2e4;
    prob.sim.record = false;

    const double Tb = sp.T_light, T = sp.T;
    std::vector<double> th0;
    switch (est.structure) {
        case StructureKind::BangBang:
            th0 = {est.t01.value_or(0.4 * Tb), est.t10.value_or(0.5 * (Tb + T))};
            break;
        case StructureKind::BangSingularBang:
            th0 = {est.ts1.value_or(0.8 * Tb), est.t10.value_or(0.5 * (Tb + T))};
            break;
        case StructureKind::SingularToDark:
            th0 = {est.t10.value_or(Tb)};
            break;
        case StructureKind::ConstantMax:
            th0 = {};
            break;
    }

    const auto bounds = feasibility_bounds(sp);
    const double y0_start = bounds.feasible ? 0.5 * (bounds.y0_min + bounds.y0_max) : 0.1;

    int evals = 0;
    double y0_best = y0_start;
    auto J_of = [&](const std::vector<double>& th) {
        ++evals;
        const auto r = prob.evaluate(th, y0_best);
        if (!r) return -1e300;
        return r->first;
    };

    std::vector<double> th_best = th0;
    {
        const auto r0 = prob.evaluate(th0, y0_start);
        if (!r0) return out;
        y0_best = r0->second;
        ++evals;
    }

    const int dim = static_cast<int>(th0.size());
    if (dim > 0) {
        // Nelder-Mead, deterministic simplex seeded two grid steps wide.
        const double spread = std::max(2.0 * est.grid_dt, 1e-3 * T);
        std::vector<std::vector<double>> X(dim + 1, th0);
        std::vector<double> F(dim + 1);
        for (int i = 0; i < dim; ++i) X[i + 1][i] += spread;
        for (int i = 0; i <= dim; ++i) F[i] = -J_of(X[i]);

        const int max_evals = 300;
        while (evals < max_evals) {
            std::vector<int> ord(dim + 1);
            std::iota(ord.begin(), ord.end(), 0);
            std::sort(ord.begin(), ord.end(), [&](int a, int b) { return F[a] < F[b]; });
            std::vector<std::vector<double>> Xs(dim + 1);
            std::vector<double> Fs(dim + 1);
            for (int i = 0; i <= dim; ++i) { Xs[i] = X[ord[i]]; Fs[i] = F[ord[i]]; }
            X = Xs; F = Fs;

            double diam = 0;
            for (int i = 1; i <= dim; ++i) {
                for (int d = 0; d < dim; ++d) diam = std::max(diam, std::abs(X[i][d] - X[0][d]));
            }
            if (diam < 1e-8 * T) break;

            std::vector<double> centroid(dim, 0.0);
            for (int i = 0; i < dim; ++i) {
                for (int d = 0; d < dim; ++d) centroid[d] += X[i][d];
            }
            for (double& c : centroid) c /= dim;

            auto blend = [&](double w) {
                std::vector<double> p(dim);
                for (int d = 0; d < dim; ++d) p[d] = centroid[d] + w * (X[dim][d] - centroid[d]);
                return p;
            };
            const auto xr = blend(-1.0);
            const double fr = -J_of(xr);
            if (fr < F[0]) {
                const auto xe = blend(-2.0);
                const double fe = -J_of(xe);
                if (fe < fr) { X[dim] = xe; F[dim] = fe; } else { X[dim] = xr; F[dim] = fr; }
            } else if (fr < F[dim - 1]) {
                X[dim] = xr;
                F[dim] = fr;
            } else {
                const auto xc = blend(fr < F[dim] ? -0.5 : 0.5);
                const double fc = -J_of(xc);
                if (fc < std::min(fr, F[dim])) {
                    X[dim] = xc;
                    F[dim] = fc;
                } else {
                    for (int i = 1; i <= dim; ++i) {
                        for (int d = 0; d < dim; ++d) X[i][d] = 0.5 * (X[i][d] + X[0][d]);
                        F[i] = -J_of(X[i]);
                    }
                }
            }
        }
        int bi = 0;
        for (int i = 1; i <= dim; ++i) {
            if (F[i] < F[bi]) bi = i;
        }
        th_best = X[bi];
    }

    const auto final_eval = prob.evaluate(th_best, y0_best);
    if (!final_eval) return out;
    out.ok = true;
    out.objective = final_eval->first;
    out.y0 = final_eval->second;
    out.evaluations = evals;

    const double ys = y_singular(sp);
    auto derived_t0s = [&]() -> double {
        if (out.y0 < ys) {
            try {
                return std::max(0.0, light_phase_time(out.y0, ys, 0.0, sp));
            } catch (const NumericsError&) {
                return 0.0;
            }
        }
        return 0.0;
    };
    switch (est.structure) {
        case StructureKind::BangBang:
            out.t01 = th_best[0];
            out.t10 = th_best[1];
            break;
        case StructureKind::BangSingularBang:
            out.ts1 = th_best[0];
            out.t10 = th_best[1];
            out.t0s = std::min(derived_t0s(), *out.ts1);
            break;
        case StructureKind::SingularToDark:
            out.t10 = th_best[0];
            out.t0s = derived_t0s();
            break;
        case StructureKind::ConstantMax:
            break;
    }
    return out;
}

}  // namespace lux
