#pragma once

#include <optional>
#include <utility>

#include "lux/model.hpp"
#include "lux/params.hpp"

namespace lux {

// Side-by-side run of the ln growth law and its two-parameter surrogate.
// The surrogate constants come from fit_simplified (or from p when both
// are already present); both models then integrate the same control
// policy from the same scaled dawn state.  The policy is the surrogate
// model's optimal one when the parameters are feasible, a fixed moderate
// harvest otherwise, so the comparison exercises the trajectory range the
// solver actually visits.
struct CompareReport {
    FitResult fit;
    double max_rel_deviation = 0;   // sup_t |y_s - y_ln| / sup_t |y_ln|
    double mean_rel_deviation = 0;  // time average of the same ratio
    // Same supremum split by phase.  The dark dynamics of the two models
    // coincide, so the dark figure only carries over whatever gap the lit
    // phase built up.
    double max_rel_deviation_light = 0;
    double max_rel_deviation_dark = 0;
    double productivity_simplified = 0;  // harvest per period, scaled units
    double productivity_ln = 0;
    double threshold = 0.05;        // reporting threshold, no hard failure
    bool within_threshold = false;
};

// y_range optionally overrides the biomass interval the fit is taken on
// (in g/L); the default is the ln model's own growth range.  threshold
// only affects the within_threshold flag.
CompareReport compare_models(const PhysicalParams& p,
                             std::optional<std::pair<double, double>> y_range = {},
                             double threshold = 0.05);

}  // namespace lux
