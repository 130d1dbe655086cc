#include "lux/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "lux/errors.hpp"

namespace lux {

namespace {

// One classical RK4 step of dy/dt = f(t, y).
template <typename F>
double rk4_step(const F& f, double t, double y, double h) {
    const double k1 = f(t, y);
    const double k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
    const double k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
    const double k4 = f(t + h, y + h * k3);
    return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct PhasePlan {
    double t_begin, t_end, u;
};

// Splits the period into intervals on which the control is constant and
// the step/light boundary is not crossed, so every RK4 step sees smooth
// dynamics and events land exactly on interval ends.
template <typename Rhs>
Trajectory run(const Rhs& make_rhs, const Policy& policy, double y0, double T,
               double T_light, bool step_schedule, const SimOptions& opt) {
    policy.validate(T);
    if (!(y0 >= 0)) throw InvalidParams("simulate: y0 must be non-negative");
    if (!(opt.step > 0)) throw InvalidParams("simulate: step must be positive");

    std::set<double> cuts{0.0, T};
    if (T_light > 0 && T_light < T) cuts.insert(T_light);
    for (const auto& s : policy.segments) {
        if (s.t_begin > 0 && s.t_begin < T) cuts.insert(s.t_begin);
        if (s.t_end > 0 && s.t_end < T) cuts.insert(s.t_end);
    }
    std::vector<PhasePlan> plan;
    double prev = 0.0;
    for (double c : cuts) {
        if (c <= prev) continue;
        plan.push_back({prev, c, policy.u_at(0.5 * (prev + c))});
        prev = c;
    }

    Trajectory traj;
    double y = y0;
    double J = 0.0;
    bool clamped = false;
    if (opt.record) {
        traj.t.push_back(0.0);
        traj.y.push_back(y0);
        traj.u.push_back(policy.u_at(0.0));
    }
    for (const auto& seg : plan) {
        const double span = seg.t_end - seg.t_begin;
        const int n = std::max(1, static_cast<int>(std::ceil(span / opt.step)));
        const double h = span / n;
        const auto rhs = make_rhs(seg, step_schedule);
        double t = seg.t_begin;
        for (int i = 0; i < n; ++i) {
            const double y_beg = y;
            double y_mid = rk4_step(rhs, t, y, 0.5 * h);
            if (y_mid < 0) { y_mid = 0; clamped = true; }
            double y_end = rk4_step(rhs, t + 0.5 * h, y_mid, 0.5 * h);
            if (y_end < 0) { y_end = 0; clamped = true; }
            // Simpson on the harvest rate u*y over the step.
            J += seg.u * h / 6.0 * (y_beg + 4.0 * y_mid + y_end);
            y = y_end;
            t = (i + 1 == n) ? seg.t_end : seg.t_begin + (i + 1) * h;
            if (opt.record) {
                traj.t.push_back(t);
                traj.y.push_back(y);
                traj.u.push_back(t < T ? policy.u_at(t) : seg.u);
            }
        }
    }
    traj.objective = J;
    traj.clamped_at_zero = clamped;
    if (!opt.record) {
        traj.t = {0.0, T};
        traj.y = {y0, y};
        traj.u = {policy.u_at(0.0), policy.u_at(0.0)};
    }
    return traj;
}

}  // namespace

Trajectory simulate(const Policy& policy, double y0, const ScaledParams& sp,
                    const LightSchedule& schedule, const SimOptions& opt) {
    validate(sp);
    auto make_rhs = [&](const PhasePlan& seg, bool step_kind) {
        // For the step schedule the factor is constant on the interval;
        // evaluating at the midpoint avoids the wrong side at the cut.
        const double f_const =
            step_kind ? schedule.factor(0.5 * (seg.t_begin + seg.t_end), sp) : 0.0;
        const double u = seg.u;
        return [&, f_const, u, step_kind](double t, double y) {
            const double f = step_kind ? f_const : schedule.factor(std::min(t, sp.T * (1 - 1e-15)), sp);
            return f * sp.mu_bar * y / (1.0 + y) - (sp.r + u) * y;
        };
    };
    const bool step_kind = schedule.kind == LightKind::Step;
    return run(make_rhs, policy, y0, sp.T, sp.T_light, step_kind, opt);
}

Trajectory simulate_ln(const Policy& policy, double y0, const PhysicalParams& p,
                       const LightSchedule& schedule, const SimOptions& opt) {
    validate(p);
    if (!p.nu_tilde || !p.kappa) {
        throw InvalidParams("simulate_ln requires kappa and the ln model constants");
    }
    ScaledParams clock;
    clock.mu_bar = 1.0;
    clock.r = p.rho / p.D_max;
    clock.T = p.D_max * p.T_cal;
    clock.T_light = p.D_max * p.T_light;
    auto make_rhs = [&](const PhasePlan& seg, bool step_kind) {
        const double f_const =
            step_kind ? schedule.factor(0.5 * (seg.t_begin + seg.t_end), clock) : 0.0;
        const double u = seg.u;
        return [&, f_const, u, step_kind](double t, double y) {
            const double f =
                step_kind ? f_const
                          : schedule.factor(std::min(t, clock.T * (1 - 1e-15)), clock);
            const double x = *p.kappa * y;
            const double mu =
                growth_ln(x, *p.nu_tilde, *p.a, *p.L_depth, *p.I0_bar, *p.K_I);
            return (f * mu / p.D_max - clock.r - u) * y;
        };
    };
    const bool step_kind = schedule.kind == LightKind::Step;
    return run(make_rhs, policy, y0, clock.T, clock.T_light, step_kind, opt);
}

double periodic_y0(const Policy& policy, const ScaledParams& sp,
                   const LightSchedule& schedule, const SimOptions& opt,
                   double y0_guess, double* defect) {
    SimOptions fast = opt;
    fast.record = false;
    auto period_map = [&](double y0) {
        return simulate(policy, y0, sp, schedule, fast).y.back();
    };

    // Picard: the period map is a contraction near a stable orbit.
    double y = std::max(y0_guess, 1e-8);
    double gap = std::abs(period_map(y) - y);
    for (int i = 0; i < 100; ++i) {
        const double next = period_map(y);
        const double g = std::abs(next - y);
        if (g < 1e-13 * std::max(1.0, y)) {
            if (defect) *defect = g;
            return next;
        }
        if (g > 2.0 * gap && i > 3) break;  // diverging, fall back to bisection
        gap = g;
        y = next;
    }

    auto psi = [&](double y0) { return period_map(y0) - y0; };
    double lo = 1e-10;
    double hi = std::max({2.0 * y0_guess, 2.0 * (sp.mu_bar - sp.r) / sp.r, 1.0});
    double flo = psi(lo), fhi = psi(hi);
    for (int i = 0; i < 8 && flo * fhi > 0; ++i) {
        hi *= 2.0;
        fhi = psi(hi);
    }
    if (flo * fhi > 0) throw NumericsError("periodic_y0: no periodic point bracketed");
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = psi(mid);
        if (flo * fm <= 0) { hi = mid; fhi = fm; } else { lo = mid; flo = fm; }
    }
    const double y0 = 0.5 * (lo + hi);
    if (defect) *defect = std::abs(psi(y0));
    return y0;
}

}  // namespace lux
