#pragma once

#include <string>
#include <vector>

#include "lux/bifurcation.hpp"
#include "lux/oracle.hpp"
#include "lux/shooting.hpp"
#include "lux/simulate.hpp"

namespace lux {

// All writers are deterministic: fixed float formatting (%.12g), no
// timestamps or environment state, so repeated runs produce identical
// bytes.  Time columns are calendar days (scaled time divided by D_max).

void write_trajectory_csv(const std::string& path, const CandidateTrajectory& traj,
                          double D_max);
void write_sim_csv(const std::string& path, const Trajectory& traj, double D_max);
void write_oracle_csv(const std::string& path, const OracleResult& res, double D_max);
void write_scan_csv(const std::string& path, const ScanResult& res);
void write_boundaries_json(const std::string& path, const ScanResult& res);

// Sidecar recording what produced an output: tool, version, subcommand,
// argv, fully resolved parameters, and the files written.
struct RunManifest {
    std::string subcommand;
    std::vector<std::string> argv;
    std::string params_json;   // resolved dimensional parameters
    std::vector<std::string> outputs;
};

void write_manifest(const std::string& path, const RunManifest& m);

std::string format_double(double v);  // shortest round-trip-stable form

}  // namespace lux
