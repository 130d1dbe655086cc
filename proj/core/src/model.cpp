#include "lux/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "lux/errors.hpp"

namespace lux {

double LightSchedule::factor(double t, const ScaledParams& sp) const {
    double tau = std::fmod(t, sp.T);
    if (tau < 0) tau += sp.T;
    if (tau >= sp.T_light) return 0.0;
    switch (kind) {
        case LightKind::Step:
            return 1.0;
        case LightKind::SquaredSine: {
            const double s = std::sin(std::numbers::pi * tau / sp.T_light);
            return s * s;
        }
    }
    return 0.0;
}

double growth_ln(double x, double nu_tilde, double a, double L, double I0, double K_I) {
    const double s = a * x * L;
    const double phi = I0 / (I0 + K_I);
    if (s < 1e-6) {
        // nu_tilde * phi * (1 - (1 - phi) s / 2) + O(s^2)
        return nu_tilde * phi * (1.0 - 0.5 * (1.0 - phi) * s);
    }
    // log1p/expm1 keep the depth average accurate when s is small.
    const double absorbed = I0 * -std::expm1(-s);  // I0 (1 - e^{-s})
    return (nu_tilde / s) * std::log1p(absorbed / (I0 * std::exp(-s) + K_I));
}

double rhs_reduced(double t, double y, double u, const ScaledParams& sp,
                   const LightSchedule& schedule) {
    const double f = schedule.factor(t, sp);
    return f * sp.mu_bar * y / (1.0 + y) - (sp.r + u) * y;
}

double rhs_ln_reduced(double t, double y, double u, const PhysicalParams& p,
                      const LightSchedule& schedule) {
    if (!p.nu_tilde) throw InvalidParams("rhs_ln_reduced requires the ln model constants");
    if (!p.kappa) throw InvalidParams("rhs_ln_reduced requires kappa to form scaled biomass");
    ScaledParams sp;
    sp.mu_bar = 1.0;  // only the clock fields matter for the schedule
    sp.r = p.rho / p.D_max;
    sp.T = p.D_max * p.T_cal;
    sp.T_light = p.D_max * p.T_light;
    const double f = schedule.factor(t, sp);
    const double x = *p.kappa * y;
    const double mu = growth_ln(x, *p.nu_tilde, *p.a, *p.L_depth, *p.I0_bar, *p.K_I);
    return (f * mu / p.D_max - sp.r - u) * y;
}

FitResult fit_monod_to(const std::function<double(double)>& target,
                       double x_lo, double x_hi, int n_grid) {
    if (!(x_hi > x_lo) || !(x_lo > 0) || n_grid < 8) {
        throw InvalidParams("fit_monod_to: need 0 < x_lo < x_hi and a sensible grid");
    }
    std::vector<double> xs(n_grid), tg(n_grid);
    for (int i = 0; i < n_grid; ++i) {
        xs[i] = x_lo + (x_hi - x_lo) * i / (n_grid - 1);
        tg[i] = target(xs[i]);
    }
    double tg_norm2 = 0;
    for (double v : tg) tg_norm2 += v * v;

    // For fixed kappa the optimal nu_bar is <tg, phi>/<phi, phi> with
    // phi = 1/(kappa + x); the outer problem is a 1-D golden search.
    auto sse_at = [&](double kappa, double* nu_out) {
        double tp = 0, pp = 0;
        for (int i = 0; i < n_grid; ++i) {
            const double phi = 1.0 / (kappa + xs[i]);
            tp += tg[i] * phi;
            pp += phi * phi;
        }
        const double nu = pp > 0 ? tp / pp : 0.0;
        double sse = 0;
        for (int i = 0; i < n_grid; ++i) {
            const double e = tg[i] - nu / (kappa + xs[i]);
            sse += e * e;
        }
        if (nu_out) *nu_out = nu;
        return sse;
    };

    const double k_lo = 1e-4, k_hi = 1e4;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = std::log(k_lo), b = std::log(k_hi);
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = sse_at(std::exp(c), nullptr), fd = sse_at(std::exp(d), nullptr);
    for (int it = 0; it < 200 && (b - a) > 1e-12; ++it) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - gr * (b - a);
            fc = sse_at(std::exp(c), nullptr);
        } else {
            a = c; c = d; fc = fd;
            d = a + gr * (b - a);
            fd = sse_at(std::exp(d), nullptr);
        }
    }
    FitResult res;
    res.kappa = std::exp(0.5 * (a + b));
    const double sse = sse_at(res.kappa, &res.nu_bar);
    res.rel_error = tg_norm2 > 0 ? std::sqrt(sse / tg_norm2) : 0.0;
    res.kappa_at_bound = res.kappa > 0.98 * k_hi || res.kappa < 1.02 * k_lo;
    return res;
}

FitResult fit_simplified(const PhysicalParams& p) {
    validate(p);
    if (!p.nu_tilde) {
        throw InvalidParams("fit_simplified requires the ln model constants");
    }
    auto mu = [&](double x) {
        return growth_ln(x, *p.nu_tilde, *p.a, *p.L_depth, *p.I0_bar, *p.K_I);
    };
    // Fit range: up to the ln model's carrying capacity mu(x_cap) = rho.
    if (!(mu(1e-9) > p.rho)) {
        throw InfeasibleError("ln model growth below rho even at vanishing biomass");
    }
    double lo = 1e-9, hi = 1.0;
    while (mu(hi) > p.rho && hi < 1e6) hi *= 2.0;
    double x_cap;
    if (hi >= 1e6) {
        // Growth never meets rho (flat or near-flat attenuation); fall
        // back to a fixed window and let kappa_at_bound carry the flag.
        x_cap = 1e3;
    } else {
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            (mu(mid) > p.rho ? lo : hi) = mid;
        }
        x_cap = 0.5 * (lo + hi);
    }
    return fit_monod_to(mu, 1e-3 * x_cap, x_cap, 400);
}

PhysicalParams resolve_uptake(const PhysicalParams& p) {
    validate(p);
    if (p.nu_bar && p.kappa) return p;
    PhysicalParams out = p;
    const FitResult fit = fit_simplified(p);
    if (!out.nu_bar) out.nu_bar = fit.nu_bar;
    if (!out.kappa) out.kappa = fit.kappa;
    validate(out);
    return out;
}

}  // namespace lux
