#pragma once

#include <functional>
#include <utility>

#include "lux/params.hpp"

namespace lux {

// Periodic light forcing.  Step is the on/off day-night pattern the
// optimal control analysis assumes; SquaredSine is a smooth alternative
// accepted by the simulator only (the solvers reject it).
enum class LightKind { Step, SquaredSine };

struct LightSchedule {
    LightKind kind = LightKind::Step;

    // Multiplier on the growth term at scaled time t within one period.
    // Step: 1 on [0, T_light), 0 after.  SquaredSine: sin^2(pi t / T_light)
    // on the lit window, 0 after; continuous at both window edges.
    double factor(double t, const ScaledParams& sp) const;
};

// Depth-averaged specific growth rate of the ln model at biomass x (g/L):
//   (nu_tilde / (a x L)) * ln((I0 + K_I) / (I0 exp(-a x L) + K_I)).
// Continuous at x = 0 with limit nu_tilde * I0 / (I0 + K_I); a second
// order expansion takes over when a*x*L < 1e-6.
double growth_ln(double x, double nu_tilde, double a, double L, double I0, double K_I);

// Right-hand sides of the scaled single-state problem, dy/dt at scaled
// time t under control u in [0, 1].
double rhs_reduced(double t, double y, double u, const ScaledParams& sp,
                   const LightSchedule& schedule);

// Same forcing and control but the ln growth law, evaluated in scaled
// variables: biomass x = kappa * y, rate divided by D_max.
double rhs_ln_reduced(double t, double y, double u, const PhysicalParams& p,
                      const LightSchedule& schedule);

// Least-squares fit of nu/(kappa + x) to an arbitrary per-biomass growth
// curve over x in [x_lo, x_hi].  Separable: nu is closed form for fixed
// kappa, kappa found by golden-section search.
struct FitResult {
    double nu_bar = 0;
    double kappa = 0;
    double rel_error = 0;     // ||residual|| / ||target|| over the grid
    bool kappa_at_bound = false;  // search railed ("kappa -> inf" or "-> 0")
};

FitResult fit_monod_to(const std::function<double(double)>& target,
                       double x_lo, double x_hi, int n_grid = 400);

// Fits the simplified uptake law to the ln model of `p` over (0, x_cap]
// where x_cap is the ln model's carrying capacity (growth == rho).
// Requires the ln constants; ignores any nu_bar/kappa already present.
FitResult fit_simplified(const PhysicalParams& p);

// Returns p with nu_bar/kappa filled in from fit_simplified when absent.
PhysicalParams resolve_uptake(const PhysicalParams& p);

}  // namespace lux
