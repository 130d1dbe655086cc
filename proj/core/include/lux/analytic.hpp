#pragma once

#include <cmath>
#include <optional>

#include "lux/params.hpp"

namespace lux {

// Net specific growth during the lit phase, g0(y) = mu_bar/(1+y) - r,
// and its harvested counterpart g1 = g0 - 1.
inline double g0(double y, const ScaledParams& sp) { return sp.mu_bar / (1.0 + y) - sp.r; }
inline double g1(double y, const ScaledParams& sp) { return g0(y, sp) - 1.0; }

inline double u_singular(const ScaledParams& sp) { return std::sqrt(sp.mu_bar * sp.r) - sp.r; }
inline double y_singular(const ScaledParams& sp) { return std::sqrt(sp.mu_bar / sp.r) - 1.0; }

// The singular control is a usable interior value iff u_singular <= 1,
// i.e. mu_bar <= (r+1)^2 / r.
inline bool singular_admissible(const ScaledParams& sp) {
    return sp.mu_bar <= (sp.r + 1.0) * (sp.r + 1.0) / sp.r;
}

// Constant-light steady state analysis.  equilibrium_summary rejects
// mu_bar <= r (washout); saturated means u_singular > 1, in which case
// the reported optimum u = 1 with its equilibrium is used instead.
struct EquilibriumSummary {
    ScaledParams sp;
    double u_singular = 0;      // unclamped value sqrt(mu_bar r) - r
    double y_singular = 0;      // equilibrium at the unclamped u_singular
    double u_opt = 0;           // min(u_singular, 1)
    double y_opt = 0;           // y_star(u_opt)
    double productivity_opt = 0;  // u_opt * y_opt
    bool saturated = false;

    // Positive equilibrium of the lit dynamics under constant u,
    // mu_bar/(r+u) - 1; negative values mean washout at that control.
    double y_star(double u) const { return sp.mu_bar / (sp.r + u) - 1.0; }
};

EquilibriumSummary equilibrium_summary(const ScaledParams& sp);

// Largest periodic orbit of the uncontrolled day/night dynamics pinned at
// dawn; the invariant region for any admissible control is
// [y0_min, y0_max].  Empty when mu_bar <= r T / T_light: even u = 0
// cannot close the period, the problem is infeasible.
std::optional<double> y0_max(const ScaledParams& sp);

// Dawn value of the periodic orbit under permanent u = 1, clamped to 0
// when that orbit does not exist (harvesting can empty the reactor).
double y0_min(const ScaledParams& sp);

struct FeasibilityBounds {
    bool feasible = false;
    double y0_min = 0;
    double y0_max = 0;  // meaningful only when feasible
    bool singular_admissible = false;
};

FeasibilityBounds feasibility_bounds(const ScaledParams& sp);

// Time for the lit dynamics under constant u to move from y_from to
// y_to (signed; negative when y_to lies upstream).  Both endpoints must
// sit strictly on the same side of the equilibrium of r+u:
// |mu_bar - (r+u)(1+y)| >= 1e-12, else NumericsError.  A series branch
// handles the degenerate case |mu_bar - (r+u)| <= 1e-6.
double light_phase_time(double y_from, double y_to, double u_const, const ScaledParams& sp);

// Forward flow of the lit dynamics: position after dt starting at y_from,
// by monotone inversion of light_phase_time.  dt may be negative.
double light_phase_flow(double y_from, double u_const, double dt, const ScaledParams& sp);

// Harvest integral int u*y dt along a lit arc from y_from to y_to under
// constant u, in closed form.  Used as a cross-check for the quadrature
// the solver reports.
double light_phase_harvest(double y_from, double y_to, double u_const, const ScaledParams& sp);

// Exponential decay through the dark phase: y * exp(-(r+u) dt).
double dark_phase_map(double y_at_switch, double u_const, double dt, const ScaledParams& sp);

// Costate flows through the dark phase, forward over dt >= 0.
inline double costate_dark_u0(double lambda_start, double dt, const ScaledParams& sp) {
    return lambda_start * std::exp(sp.r * dt);
}
inline double costate_dark_u1(double lambda_start, double dt, const ScaledParams& sp) {
    const double e = std::exp((sp.r + 1.0) * dt);
    return lambda_start * e - (e - 1.0) / (sp.r + 1.0);
}

// Hamiltonian with the growth term on (light) or off (dark).
inline double hamiltonian_light(double y, double lambda, double u, const ScaledParams& sp) {
    return lambda * y * (g0(y, sp) - u) + u * y;
}
inline double hamiltonian_dark(double y, double lambda, double u, const ScaledParams& sp) {
    return lambda * y * (-sp.r - u) + u * y;
}

// Generalized Legendre-Clebsch quantity along a singular arc; optimality
// requires it positive.
inline double kelley_quantity(double y, double lambda, const ScaledParams& sp) {
    const double c = 1.0 + y;
    return 2.0 * lambda * sp.mu_bar / (c * c * c);
}

}  // namespace lux
