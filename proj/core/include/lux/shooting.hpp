#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lux/params.hpp"

namespace lux {

// Candidate arc structures for one period, in dawn-to-dusk order.
//   BangBang:         u=0, u=1 in the light, u=1, u=0 in the dark
//   BangSingularBang: u=0, u=u_sigma, u=1 in the light, u=1, u=0 dark
//   SingularToDark:   u=0, u=u_sigma up to nightfall, u=1, u=0 dark
//   ConstantMax:      u=1 everywhere
enum class StructureKind { BangBang, BangSingularBang, SingularToDark, ConstantMax };

const char* to_string(StructureKind k);
int arc_count(StructureKind k);

// Named unknowns of the boundary-value systems; fields not used by a
// structure stay NaN.  Times are scaled, within [0, T].
struct Unknowns {
    double y0 = 0;          // dawn biomass
    double lambda0 = 0;     // dawn costate
    double t01 = 0;         // light switch u:0->1 (BangBang)
    double y01 = 0;         // biomass at t01
    double t0s = 0;         // light switch u:0->singular
    double ts1 = 0;         // light switch u:singular->1
    double y_bar = 0;       // biomass at nightfall T_light
    double lambda_bar = 0;  // costate at nightfall
    double t10 = 0;         // dark switch u:1->0
    double y10 = 0;         // biomass at t10
};

// Residual vectors of the shooting systems; all zero exactly at a
// Pontryagin extremal of the given structure.  Sizes: 8, 8, 7, 4.
std::vector<double> residuals_bang_bang(const Unknowns& q, const ScaledParams& sp);
std::vector<double> residuals_bang_singular_bang(const Unknowns& q, const ScaledParams& sp);
std::vector<double> residuals_singular_to_dark(const Unknowns& q, const ScaledParams& sp);
std::vector<double> residuals_constant_max(const Unknowns& q, const ScaledParams& sp);

// Optional starting point for solve_candidate; unset fields are filled
// by the deterministic seeding lattice.
struct ShootingInit {
    std::optional<double> t01, t0s, ts1, t10, y0;
};

enum class SolveStatus {
    Valid,            // converged and passed every optimality check
    ConvergedInvalid, // Newton closed the system but validation failed
    NoConvergence,    // no root found from any seed
    Inadmissible      // structure ruled out before solving
};

// One closed-form arc of the reconstructed extremal.
struct Arc {
    double t_begin = 0, t_end = 0;
    double u = 0;
    bool light = true;
    bool singular = false;
    double y_begin = 0, y_end = 0;
    double lambda_begin = 0, lambda_end = 0;
    double H = 0;  // Hamiltonian on the arc (constant per phase)
};

// Dense samples of the extremal; t strictly increasing from 0 to T.
// At the nightfall discontinuity the sample carries the light-side H.
struct CandidateTrajectory {
    std::vector<double> t, y, u, lambda, H;
};

struct ValidationReport {
    bool valid = false;
    std::vector<std::string> failures;   // human-readable reasons, empty if valid
    double h_light_spread = 0;           // max |H - H_arc| over lit samples
    double h_dark_spread = 0;
    double y_period_defect = 0;          // |y(T) - y0| / max(1, y0)
    double lambda_period_defect = 0;     // |lambda(T) - lambda0| / max(1, lambda0)
    double adjoint_defect = 0;           // RK4-integrated costate vs closed form
    double kelley_min = 0;               // min Kelley quantity on singular arcs
};

struct CandidateSolution {
    StructureKind structure = StructureKind::BangBang;
    SolveStatus status = SolveStatus::NoConvergence;
    Unknowns unknowns;
    double residual_norm = 0;
    int newton_iterations = 0;
    double objective = 0;          // int u*y dt per period, scaled units
    std::vector<Arc> arcs;
    CandidateTrajectory trajectory;
    ValidationReport validation;
    std::string message;
};

// Solves one structure.  Seeds from `init` when given, otherwise from a
// deterministic switch-time lattice with periodic-closure bisection for
// y0.  Throws InfeasibleError when the problem admits no periodic orbit.
CandidateSolution solve_candidate(StructureKind structure, const ScaledParams& sp,
                                  const ShootingInit& init = {});

struct BestSolution {
    bool found = false;
    CandidateSolution best;                  // meaningful when found
    std::vector<CandidateSolution> attempts; // one per structure tried
};

// Tries every admissible structure and returns the valid candidate with
// the highest objective.  Objectives within 1e-9 of each other are tied;
// the tie goes to the structure with fewer arcs.
BestSolution best_solution(const ScaledParams& sp);

// Number of dense samples per period used for trajectory reconstruction.
inline constexpr int kTrajectorySamples = 2001;

}  // namespace lux
