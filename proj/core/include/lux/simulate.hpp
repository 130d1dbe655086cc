#pragma once

#include <vector>

#include "lux/model.hpp"
#include "lux/params.hpp"
#include "lux/policy.hpp"

namespace lux {

// One simulated period.  t is strictly increasing from 0 to T; u holds
// the control in effect on [t[i], t[i+1]) and repeats the last value at
// the final node.  lambda/H are filled by the shooting layer, not here.
struct Trajectory {
    std::vector<double> t;
    std::vector<double> y;
    std::vector<double> u;
    double objective = 0;        // int u*y dt over the period
    bool clamped_at_zero = false;  // biomass hit 0 during the run
};

struct SimOptions {
    double step = 1e-3;  // nominal RK4 step, scaled time
    // record=false shrinks the samples to the two endpoint nodes {0, T};
    // the objective and y.back() are computed either way.
    bool record = true;
};

// Fixed-step classical RK4 on the reduced scaled dynamics.  Steps land
// exactly on every policy switch and on the light/dark boundary, so no
// event is crossed mid-step.  The objective uses Simpson's rule via one
// half-step midpoint per step.  y is clamped at 0 (sets clamped_at_zero).
Trajectory simulate(const Policy& policy, double y0, const ScaledParams& sp,
                    const LightSchedule& schedule, const SimOptions& opt = {});

// Same integrator on the ln-model dynamics in scaled variables.
Trajectory simulate_ln(const Policy& policy, double y0, const PhysicalParams& p,
                       const LightSchedule& schedule, const SimOptions& opt = {});

// Dawn state y0 with y(T; y0) == y0 under the given policy, located by
// damped fixed-point iteration with a bisection fallback; returns the
// defect |y(T) - y0| through *defect when non-null.  Throws NumericsError
// if no periodic point is bracketed.
double periodic_y0(const Policy& policy, const ScaledParams& sp,
                   const LightSchedule& schedule, const SimOptions& opt,
                   double y0_guess, double* defect = nullptr);

}  // namespace lux
