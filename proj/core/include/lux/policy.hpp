#pragma once

#include <vector>

#include "lux/params.hpp"

namespace lux {

// Piecewise-constant control on [0, T].  Segments are contiguous,
// non-empty and partition the period exactly: first t_begin == 0, last
// t_end == T, and each t_end equals the next t_begin.
struct ControlSegment {
    double t_begin = 0;
    double t_end = 0;
    double u = 0;
};

struct Policy {
    std::vector<ControlSegment> segments;

    double u_at(double t) const;
    void validate(double T) const;  // throws InvalidParams on a bad partition

    // Constant control over the whole period.
    static Policy constant(double u, double T);

    // Builds a policy from ordered switch times: u_values[i] holds on
    // [times[i], times[i+1]) with times augmented by 0 and T.
    static Policy from_switches(const std::vector<double>& interior_times,
                                const std::vector<double>& u_values, double T);
};

}  // namespace lux
