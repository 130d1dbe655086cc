#include "lux/compare.hpp"

#include <algorithm>
#include <cmath>

#include "lux/analytic.hpp"
#include "lux/errors.hpp"
#include "lux/shooting.hpp"
#include "lux/simulate.hpp"

namespace lux {

namespace {

Policy policy_from_arcs(const CandidateSolution& s, double T) {
    std::vector<ControlSegment> segs;
    for (const Arc& a : s.arcs)
        if (a.t_end > a.t_begin) segs.push_back({a.t_begin, a.t_end, a.u});
    Policy p{segs};
    p.validate(T);
    return p;
}

}  // namespace

CompareReport compare_models(const PhysicalParams& p,
                             std::optional<std::pair<double, double>> y_range,
                             double threshold) {
    if (!p.nu_tilde || !p.a || !p.L_depth || !p.I0_bar || !p.K_I)
        throw InvalidParams("compare_models needs the ln-model constants");

    CompareReport rep;
    rep.threshold = threshold;
    if (y_range) {
        const auto target = [&](double x) {
            return growth_ln(x, *p.nu_tilde, *p.a, *p.L_depth, *p.I0_bar, *p.K_I);
        };
        rep.fit = fit_monod_to(target, y_range->first, y_range->second);
    } else {
        rep.fit = fit_simplified(p);
    }

    // Scaled problem of the fitted surrogate.  Built directly so that an
    // infeasible fit still yields a (decaying) comparison run.
    const ScaledParams sp{rep.fit.nu_bar / (rep.fit.kappa * p.D_max),
                          p.rho / p.D_max, p.D_max * p.T_cal, p.D_max * p.T_light};

    Policy policy = Policy::constant(0.3, sp.T);
    double y0 = 0.1;
    const FeasibilityBounds fb = feasibility_bounds(sp);
    if (fb.feasible) {
        const BestSolution best = best_solution(sp);
        if (best.found) {
            policy = policy_from_arcs(best.best, sp.T);
            y0 = best.best.unknowns.y0;
        } else {
            y0 = 0.5 * (fb.y0_min + fb.y0_max);
        }
    }

    PhysicalParams p_run = p;
    p_run.nu_bar = rep.fit.nu_bar;
    p_run.kappa = rep.fit.kappa;

    const LightSchedule step{LightKind::Step};
    const SimOptions opt{1e-3, true};
    const Trajectory tr_s = simulate(policy, y0, sp, step, opt);
    const Trajectory tr_ln = simulate_ln(policy, y0, p_run, step, opt);

    rep.productivity_simplified = tr_s.objective;
    rep.productivity_ln = tr_ln.objective;

    const std::size_t n = std::min(tr_s.y.size(), tr_ln.y.size());
    double scale_ln = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale_ln = std::max(scale_ln, std::abs(tr_ln.y[i]));
    if (scale_ln > 0.0) {
        double worst = 0.0, mean = 0.0, worst_light = 0.0, worst_dark = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = std::abs(tr_s.y[i] - tr_ln.y[i]) / scale_ln;
            worst = std::max(worst, d);
            mean += d;
            if (tr_s.t[i] < sp.T_light) worst_light = std::max(worst_light, d);
            else worst_dark = std::max(worst_dark, d);
        }
        rep.max_rel_deviation = worst;
        rep.mean_rel_deviation = mean / static_cast<double>(n);
        rep.max_rel_deviation_light = worst_light;
        rep.max_rel_deviation_dark = worst_dark;
    }
    rep.within_threshold = rep.max_rel_deviation <= threshold;
    return rep;
}

}  // namespace lux
