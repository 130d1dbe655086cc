#pragma once

#include <string>
#include <vector>

#include "lux/params.hpp"
#include "lux/shooting.hpp"

namespace lux {

enum class RegimeLabel {
    Infeasible,        // nu_bar <= kappa rho T / T_light: washout
    BangBang,
    BangSingularBang,
    SingularToDark,
    ConstantMax,
    Unresolved         // no candidate validated even after the oracle retry
};

const char* to_string(RegimeLabel label);

// Labels one dimensional parameter point.  Feasibility is decided exactly
// from the dimensional inequality before any scaling or solving; feasible
// points run best_solution, and a NoCandidate outcome triggers one
// oracle-seeded retry before conceding Unresolved.
struct ClassifyResult {
    RegimeLabel label = RegimeLabel::Unresolved;
    double objective = 0;       // scaled harvest (0 when not solved)
    double y0 = 0;
    double residual_norm = 0;
    bool used_oracle_retry = false;
};

ClassifyResult classify(const PhysicalParams& p);

struct ScanConfig {
    double nu_min = 5.0, nu_max = 80.0;
    int nu_count = 20;
    double rho_min = 1.0, rho_max = 14.0;
    int rho_count = 20;
    PhysicalParams base;        // kappa, D_max, T_cal, T_light taken from here
    int threads = 0;            // 0 = hardware concurrency; rows run in parallel
    bool audit_determinism = true;  // re-run sample cells cold and compare
};

struct ScanCell {
    double nu_bar = 0, rho = 0;
    RegimeLabel label = RegimeLabel::Unresolved;
    double objective = 0, y0 = 0, residual_norm = 0;
    bool suspect = false;       // label disagrees with all four neighbours
};

// Contour of one regime region: marching-squares polyline in the
// (nu_bar, rho) plane at the 0.5 level of the label indicator.
struct BoundaryCurve {
    RegimeLabel label;
    std::vector<std::vector<std::pair<double, double>>> polylines;
};

struct ScanResult {
    ScanConfig config;
    std::vector<ScanCell> cells;    // row-major, nu fastest
    std::vector<BoundaryCurve> boundaries;
    int unresolved_count = 0;
    int suspect_count = 0;
    bool determinism_ok = true;     // audit re-runs matched
};

// Sweeps the grid row by row (fixed rho), warm-starting each cell from
// its left neighbour's structure when available.
ScanResult scan(const ScanConfig& cfg);

}  // namespace lux
