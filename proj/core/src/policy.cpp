#include "lux/policy.hpp"

#include <algorithm>
#include <cmath>

#include "lux/errors.hpp"

namespace lux {

double Policy::u_at(double t) const {
    for (const auto& s : segments) {
        if (t < s.t_end) return s.u;
    }
    return segments.empty() ? 0.0 : segments.back().u;
}

void Policy::validate(double T) const {
    if (segments.empty()) throw InvalidParams("policy has no segments");
    if (std::abs(segments.front().t_begin) > 1e-12) {
        throw InvalidParams("policy must start at t = 0");
    }
    double t = 0.0;
    for (const auto& s : segments) {
        if (std::abs(s.t_begin - t) > 1e-9) {
            throw InvalidParams("policy segments must be contiguous");
        }
        if (!(s.t_end > s.t_begin)) {
            throw InvalidParams("policy segments must have positive length");
        }
        if (s.u < -1e-12 || s.u > 1.0 + 1e-12) {
            throw InvalidParams("control must lie in [0, 1]");
        }
        t = s.t_end;
    }
    if (std::abs(t - T) > 1e-9) throw InvalidParams("policy must end at t = T");
}

Policy Policy::constant(double u, double T) {
    Policy p;
    p.segments.push_back({0.0, T, u});
    return p;
}

Policy Policy::from_switches(const std::vector<double>& interior_times,
                             const std::vector<double>& u_values, double T) {
    if (u_values.size() != interior_times.size() + 1) {
        throw InvalidParams("from_switches: need one more control than switch times");
    }
    Policy p;
    double t = 0.0;
    for (size_t i = 0; i < u_values.size(); ++i) {
        const double end = i < interior_times.size() ? interior_times[i] : T;
        if (end > t) {  // zero-length pieces (coincident switches) are dropped
            p.segments.push_back({t, end, u_values[i]});
            t = end;
        }
    }
    if (p.segments.empty() || std::abs(p.segments.back().t_end - T) > 1e-9) {
        throw InvalidParams("from_switches: switch times must be ordered within (0, T)");
    }
    p.segments.back().t_end = T;
    return p;
}

}  // namespace lux
