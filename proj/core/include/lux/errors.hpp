#pragma once

#include <stdexcept>
#include <string>

namespace lux {

// Base class so callers can catch everything lux throws with one handler.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Parameter sets that fail structural validation (non-positive rates,
// light window outside the period, missing fields, bad files).
struct InvalidParams : Error {
    explicit InvalidParams(const std::string& what) : Error(what) {}
};

// The washout regime: no periodic solution with positive biomass exists,
// so solvers refuse to run. Maps to exit code 2 in the CLI.
struct InfeasibleError : Error {
    explicit InfeasibleError(const std::string& what) : Error(what) {}
};

// A numeric routine left its domain (equilibrium-touching flow query,
// singular linear system, exhausted iteration budget).
struct NumericsError : Error {
    explicit NumericsError(const std::string& what) : Error(what) {}
};

}  // namespace lux
