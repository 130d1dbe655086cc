#include "lux/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "lux/errors.hpp"
#include "lux/version.hpp"

namespace lux {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary: no CRLF surprises
    if (!out) throw Error("cannot open for writing: " + path);
    return out;
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_trajectory_csv(const std::string& path, const CandidateTrajectory& traj,
                          double D_max) {
    auto out = open_out(path);
    out << "t,y,u,lambda,H\n";
    for (size_t i = 0; i < traj.t.size(); ++i) {
        out << format_double(traj.t[i] / D_max) << ',' << format_double(traj.y[i]) << ','
            << format_double(traj.u[i]) << ',' << format_double(traj.lambda[i]) << ','
            << format_double(traj.H[i]) << '\n';
    }
}

void write_sim_csv(const std::string& path, const Trajectory& traj, double D_max) {
    auto out = open_out(path);
    out << "t,y,u\n";
    for (size_t i = 0; i < traj.t.size(); ++i) {
        out << format_double(traj.t[i] / D_max) << ',' << format_double(traj.y[i]) << ','
            << format_double(traj.u[i]) << '\n';
    }
}

void write_oracle_csv(const std::string& path, const OracleResult& res, double D_max) {
    auto out = open_out(path);
    out << "t,y,u\n";
    for (size_t i = 0; i < res.t.size(); ++i) {
        const double u = i < res.u.size() ? res.u[i] : res.u.back();
        out << format_double(res.t[i] / D_max) << ',' << format_double(res.y[i]) << ','
            << format_double(u) << '\n';
    }
}

void write_scan_csv(const std::string& path, const ScanResult& res) {
    auto out = open_out(path);
    out << "nu_bar,rho,regime,objective,y0,residual_norm\n";
    for (const auto& c : res.cells) {
        out << format_double(c.nu_bar) << ',' << format_double(c.rho) << ','
            << to_string(c.label) << ',' << format_double(c.objective) << ','
            << format_double(c.y0) << ',' << format_double(c.residual_norm) << '\n';
    }
}

void write_boundaries_json(const std::string& path, const ScanResult& res) {
    nlohmann::json j;
    j["nu_range"] = {res.config.nu_min, res.config.nu_max};
    j["rho_range"] = {res.config.rho_min, res.config.rho_max};
    j["grid"] = {res.config.nu_count, res.config.rho_count};
    j["unresolved"] = res.unresolved_count;
    j["suspect"] = res.suspect_count;
    j["determinism_ok"] = res.determinism_ok;
    nlohmann::json curves = nlohmann::json::array();
    for (const auto& b : res.boundaries) {
        nlohmann::json c;
        c["regime"] = to_string(b.label);
        nlohmann::json lines = nlohmann::json::array();
        for (const auto& poly : b.polylines) {
            nlohmann::json line = nlohmann::json::array();
            for (const auto& [nu, rho] : poly) line.push_back({nu, rho});
            lines.push_back(std::move(line));
        }
        c["polylines"] = std::move(lines);
        curves.push_back(std::move(c));
    }
    j["boundaries"] = std::move(curves);
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

void write_manifest(const std::string& path, const RunManifest& m) {
    nlohmann::json j;
    j["tool"] = kToolName;
    j["version"] = kVersion;
    j["subcommand"] = m.subcommand;
    j["argv"] = m.argv;
    if (!m.params_json.empty()) {
        j["params"] = nlohmann::json::parse(m.params_json);
    }
    j["outputs"] = m.outputs;
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

}  // namespace lux
