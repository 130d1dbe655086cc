#include "lux/analytic.hpp"

#include <algorithm>
#include <cmath>

#include "lux/errors.hpp"

namespace lux {

namespace {

// Margin below which a flow endpoint counts as touching the equilibrium
// of the lit dynamics; the time map diverges there.
constexpr double kEqGuard = 1e-12;

// Threshold for the series branch of the time map, where the exact
// formula loses digits to cancellation in (mu_bar - r - u).
constexpr double kDegenerate = 1e-6;

}  // namespace

EquilibriumSummary equilibrium_summary(const ScaledParams& sp) {
    validate(sp);  // enforces mu_bar > r
    EquilibriumSummary s;
    s.sp = sp;
    s.u_singular = u_singular(sp);
    s.y_singular = y_singular(sp);
    s.saturated = s.u_singular > 1.0;
    s.u_opt = std::min(s.u_singular, 1.0);
    s.y_opt = s.y_star(s.u_opt);
    s.productivity_opt = s.u_opt * s.y_opt;
    return s;
}

std::optional<double> y0_max(const ScaledParams& sp) {
    const double mu = sp.mu_bar, r = sp.r, T = sp.T, Tb = sp.T_light;
    if (!(mu * Tb > r * T)) return std::nullopt;
    const double num = std::expm1((r / mu) * (mu * Tb - r * T));
    const double den = std::expm1((r * T / mu) * (mu - r));
    return (mu - r) / r * num / den;
}

double y0_min(const ScaledParams& sp) {
    const double mu = sp.mu_bar, rt = sp.r + 1.0, T = sp.T, Tb = sp.T_light;
    if (!(mu * Tb > rt * T)) return 0.0;  // permanent u=1 washes out
    const double num = std::expm1((rt / mu) * (mu * Tb - rt * T));
    const double den = std::expm1((rt * T / mu) * (mu - rt));
    return std::max(0.0, (mu - rt) / rt * num / den);
}

FeasibilityBounds feasibility_bounds(const ScaledParams& sp) {
    FeasibilityBounds b;
    b.singular_admissible = singular_admissible(sp);
    b.y0_min = y0_min(sp);
    if (auto ym = y0_max(sp)) {
        b.feasible = true;
        b.y0_max = *ym;
    }
    return b;
}

double light_phase_time(double y_from, double y_to, double u_const, const ScaledParams& sp) {
    if (!(y_from > 0) || !(y_to > 0)) {
        throw NumericsError("light_phase_time: biomass must stay positive");
    }
    if (y_from == y_to) return 0.0;  // includes resting at the equilibrium
    const double mu = sp.mu_bar;
    const double rt = sp.r + u_const;
    const double sf = mu - rt * (1.0 + y_from);
    const double st = mu - rt * (1.0 + y_to);
    if (std::abs(sf) < kEqGuard || std::abs(st) < kEqGuard || sf * st <= 0.0) {
        throw NumericsError("light_phase_time: endpoints straddle or touch the equilibrium");
    }
    const double eps = mu - rt;
    if (std::abs(eps) <= kDegenerate) {
        // mu ~ rt: dy/dt = y (eps - rt y)/(1+y); expand 1/(eps - rt y).
        auto head = [&](double y) { return 1.0 / y - std::log(y); };
        auto corr = [&](double y) { return 0.5 / (y * y) + 1.0 / y; };
        return (head(y_to) - head(y_from)) / rt +
               (eps / (rt * rt)) * (corr(y_to) - corr(y_from));
    }
    return (rt * std::log(y_to / y_from) - mu * std::log(st / sf)) / (rt * eps);
}

double light_phase_flow(double y_from, double u_const, double dt, const ScaledParams& sp) {
    if (!(y_from > 0)) throw NumericsError("light_phase_flow: start must be positive");
    if (dt == 0.0) return y_from;
    const double mu = sp.mu_bar;
    const double rt = sp.r + u_const;

    auto vel = [&](double y) { return y * (mu / (1.0 + y) - rt); };
    const double v0 = vel(y_from);
    if (std::abs(v0) < 1e-300) return y_from;  // pinned at equilibrium

    // Motion is monotone between 0 and the equilibrium (when it exists),
    // so bracket the target along the direction of travel.  The stand-off
    // from the equilibrium must keep mu - rt*(1+y) clear of the time
    // map's own guard, which needs slack 1/rt when rt is small.
    const bool up = (v0 > 0) == (dt > 0);  // y increases toward the target
    double lo = y_from, hi = y_from;
    const double yeq = mu > rt ? (mu - rt) / rt : -1.0;
    const double stand_off = std::max(kEqGuard * (1.0 + yeq), 4.0 * kEqGuard / rt);
    if (up) {
        if (yeq > y_from) {
            hi = yeq - stand_off;  // approach the attractor from below
            if (hi <= y_from) return y_from;
        } else {
            hi = std::max(2.0 * y_from, 1.0);   // running away from equilibrium
            for (int i = 0; i < 400; ++i) {
                if (light_phase_time(y_from, hi, u_const, sp) * (dt > 0 ? 1 : -1) >=
                    std::abs(dt)) break;
                hi *= 2.0;
                if (hi > 1e12) throw NumericsError("light_phase_flow: unbounded growth");
            }
        }
    } else {
        if (yeq > 0 && yeq < y_from) {
            lo = yeq + stand_off;
            if (lo >= y_from) return y_from;
        } else {
            lo = y_from;
            for (int i = 0; i < 4000; ++i) {
                lo *= 0.5;
                if (lo < 1e-300) throw NumericsError("light_phase_flow: collapse to zero");
                if (light_phase_time(y_from, lo, u_const, sp) * (dt > 0 ? 1 : -1) >=
                    std::abs(dt)) break;
            }
        }
    }
    double a = std::min(lo, hi), b = std::max(lo, hi);
    auto f = [&](double y) { return light_phase_time(y_from, y, u_const, sp) - dt; };
    double fa = f(a), fb = f(b);
    if (fa * fb > 0) {
        // Target beyond the asymptote-side guard: flow has effectively
        // reached the equilibrium at this dt.
        return std::abs(fa) < std::abs(fb) ? a : b;
    }
    for (int i = 0; i < 200 && (b - a) > 1e-16 * (1.0 + b); ++i) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (fa * fm <= 0) { b = m; fb = fm; } else { a = m; fa = fm; }
    }
    double y = 0.5 * (a + b);
    for (int i = 0; i < 4; ++i) {  // Newton polish, derivative dt/dy = 1/vel
        const double v = vel(y);
        if (std::abs(v) < 1e-300) break;
        const double step = f(y) * v;
        const double next = y - step;
        if (next <= a || next >= b) break;
        y = next;
    }
    return y;
}

double light_phase_harvest(double y_from, double y_to, double u_const, const ScaledParams& sp) {
    if (u_const == 0.0) return 0.0;
    const double mu = sp.mu_bar;
    const double rt = sp.r + u_const;
    const double sf = mu - rt * (1.0 + y_from);
    const double st = mu - rt * (1.0 + y_to);
    if (std::abs(sf) < kEqGuard || std::abs(st) < kEqGuard || sf * st <= 0.0) {
        throw NumericsError("light_phase_harvest: endpoints straddle or touch the equilibrium");
    }
    auto F = [&](double y) {
        return -(1.0 + y) / rt - (mu / (rt * rt)) * std::log(std::abs(mu - rt * (1.0 + y)));
    };
    return u_const * (F(y_to) - F(y_from));
}

double dark_phase_map(double y_at_switch, double u_const, double dt, const ScaledParams& sp) {
    return y_at_switch * std::exp(-(sp.r + u_const) * dt);
}

}  // namespace lux
