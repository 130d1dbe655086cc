#pragma once

#include <optional>
#include <vector>

#include "lux/params.hpp"
#include "lux/shooting.hpp"

namespace lux {

// Grid dynamic programming over one period: value iteration backward in
// time on a uniform biomass grid, periodicity enforced through a terminal
// penalty on |y(T) - y0|, then a greedy forward rollout.  Deliberately
// independent of the shooting machinery so the two can referee each other.
struct OracleConfig {
    int n_time = 2000;        // time steps per period
    int n_state = 800;        // biomass grid points
    double y_grid_max = 0;    // 0 = auto: 1.2 * (mu_bar - r) / r
    int u_levels = 21;        // uniform controls on [0,1]; u_sigma appended
    double penalty = 50.0;    // terminal penalty weight on |y_T - y0|
    int y0_scan = 64;         // dawn states scanned across [y0_min, y0_max]
    std::optional<std::pair<double, double>> y0_range;  // overrides the scan range
    int threads = 0;          // 0 = hardware concurrency
};

struct OracleResult {
    double objective = 0;     // best rolled-out harvest over the period
    double y0_star = 0;       // dawn state achieving it
    double periodicity_defect = 0;  // |y(T) - y0_star| on the rollout
    std::vector<double> t;    // n_time + 1 nodes, scaled time
    std::vector<double> y;    // rollout states at the nodes
    std::vector<double> u;    // n_time controls, u[i] on [t[i], t[i+1])
    std::vector<double> y0_values;      // scanned dawn states
    std::vector<double> y0_objectives;  // rolled-out value for each
    OracleConfig config;      // configuration actually used (after auto fills)
};

OracleResult dp_optimize(const ScaledParams& sp, const OracleConfig& cfg = {});

// Reading of the rollout control sequence.  Chatter between neighbouring
// levels is collapsed (runs shorter than 5 steps merge into a singular
// band); the result is a structure hint plus grid-accurate switch times.
struct SwitchEstimates {
    StructureKind structure = StructureKind::BangBang;
    bool recognized = false;        // false when the rollout fits no template
    std::optional<double> t01, t0s, ts1, t10;
    double grid_dt = 0;             // time step of the underlying grid
    ShootingInit init;              // ready to pass to solve_candidate
};

SwitchEstimates estimate_switches(const OracleResult& result, const ScaledParams& sp);

// Direct-search polish of the grid estimates: Nelder-Mead over the switch
// times of the hinted structure, objective evaluated by RK4 simulation
// with the dawn state closed to a periodic orbit.  Shares no equations
// with the shooting layer, so it serves as an independent referee at
// tolerances far below the raw grid resolution.
struct RefinedEstimates {
    StructureKind structure = StructureKind::BangBang;
    bool ok = false;
    double objective = 0;           // simulated harvest at the optimum
    double y0 = 0;                  // periodic dawn state at the optimum
    std::optional<double> t01, t0s, ts1, t10;
    int evaluations = 0;
};

RefinedEstimates refine_switches(const SwitchEstimates& est, const ScaledParams& sp);

}  // namespace lux
