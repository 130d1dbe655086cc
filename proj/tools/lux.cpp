// lux: periodic harvesting front end.  Subcommands map one-to-one onto
// the library modules; every run leaves a manifest next to its outputs
// so a result can be traced back to the exact parameters that made it.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lux/analytic.hpp"
#include "lux/bifurcation.hpp"
#include "lux/compare.hpp"
#include "lux/errors.hpp"
#include "lux/io.hpp"
#include "lux/model.hpp"
#include "lux/oracle.hpp"
#include "lux/params.hpp"
#include "lux/policy.hpp"
#include "lux/shooting.hpp"
#include "lux/simulate.hpp"
#include "lux/version.hpp"

namespace {

using nlohmann::json;

struct RunConfig {
    enum class Sub { Analyze, Simulate, Solve, Oracle, Bifurcate, CompareModels };
    Sub subcommand = Sub::Analyze;
    std::string params_path;              // empty: built-in reference set
    std::string output_dir = ".";
    std::vector<std::string> overrides;   // key=value, applied after the file
    bool deterministic = true;            // fixed: no RNG, no wall clock
};

const char* sub_name(RunConfig::Sub s) {
    switch (s) {
        case RunConfig::Sub::Analyze: return "analyze";
        case RunConfig::Sub::Simulate: return "simulate";
        case RunConfig::Sub::Solve: return "solve";
        case RunConfig::Sub::Oracle: return "oracle";
        case RunConfig::Sub::Bifurcate: return "bifurcate";
        case RunConfig::Sub::CompareModels: return "compare-models";
    }
    return "?";
}

void apply_override(lux::PhysicalParams& p, const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
        throw lux::InvalidParams("override must look like key=value: " + kv);
    const std::string key = kv.substr(0, eq);
    double value = 0;
    try {
        value = std::stod(kv.substr(eq + 1));
    } catch (const std::exception&) {
        throw lux::InvalidParams("override value is not a number: " + kv);
    }
    if (key == "nu_bar") p.nu_bar = value;
    else if (key == "kappa") p.kappa = value;
    else if (key == "rho") p.rho = value;
    else if (key == "D_max") p.D_max = value;
    else if (key == "T_cal") p.T_cal = value;
    else if (key == "T_light") p.T_light = value;
    else if (key == "nu_tilde") p.nu_tilde = value;
    else if (key == "a") p.a = value;
    else if (key == "L_depth") p.L_depth = value;
    else if (key == "I0_bar") p.I0_bar = value;
    else if (key == "K_I") p.K_I = value;
    else if (key == "V") p.V = value;
    else throw lux::InvalidParams("unknown parameter in override: " + key);
}

lux::PhysicalParams load_resolved(const RunConfig& rc) {
    lux::PhysicalParams p = rc.params_path.empty()
                                ? lux::PhysicalParams::canonical()
                                : lux::load_params(rc.params_path,
                                                   lux::PhysicalParams::canonical());
    for (const auto& kv : rc.overrides) apply_override(p, kv);
    p = lux::resolve_uptake(p);
    lux::validate(p);
    return p;
}

// Washout test on the dimensional side; the same predicate the scan uses
// for its infeasible region.
bool washed_out(const lux::PhysicalParams& p) {
    return *p.nu_bar <= *p.kappa * p.rho * p.T_cal / p.T_light;
}

std::string washout_message(const lux::PhysicalParams& p) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "infeasible parameters: nu_bar = %g <= kappa*rho*T_cal/T_light = %g; "
                  "night decay undoes the daytime growth and the culture washes out",
                  *p.nu_bar, *p.kappa * p.rho * p.T_cal / p.T_light);
    return buf;
}

std::string out_path(const RunConfig& rc, const char* name) {
    return (std::filesystem::path(rc.output_dir) / name).string();
}

void finish(const RunConfig& rc, const std::vector<std::string>& argv,
            const lux::PhysicalParams& p, std::vector<std::string> outputs) {
    lux::RunManifest m;
    m.subcommand = sub_name(rc.subcommand);
    m.argv = argv;
    m.params_json = lux::params_to_json(p);
    m.outputs = std::move(outputs);
    lux::write_manifest(out_path(rc, "manifest.json"), m);
}

json scaled_json(const lux::ScaledParams& sp) {
    return json{{"mu_bar", sp.mu_bar},
                {"r", sp.r},
                {"T", sp.T},
                {"T_light", sp.T_light}};
}

void write_json(const std::string& path, const json& j) {
    auto* f = std::fopen(path.c_str(), "wb");
    if (!f) throw lux::Error("cannot open for writing: " + path);
    const std::string text = j.dump(2) + "\n";
    std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
}

// ------------------------------------------------------------- analyze

int run_analyze(const RunConfig& rc, const std::vector<std::string>& argv) {
    const lux::PhysicalParams p = load_resolved(rc);
    json j;
    j["params"] = json::parse(lux::params_to_json(p));
    j["feasible"] = !washed_out(p);
    if (washed_out(p)) {
        j["infeasible_reason"] = washout_message(p);
        write_json(out_path(rc, "analysis.json"), j);
        finish(rc, argv, p, {"analysis.json"});
        std::fprintf(stderr, "%s\n", washout_message(p).c_str());
        return 2;
    }
    const lux::ScaledParams sp = lux::scale(p);
    const auto eq = lux::equilibrium_summary(sp);
    const auto fb = lux::feasibility_bounds(sp);
    j["scaled"] = scaled_json(sp);
    j["u_sigma"] = eq.u_singular;
    j["y_sigma"] = eq.y_singular;
    j["singular_admissible"] = fb.singular_admissible;
    j["singular_saturated"] = eq.saturated;
    j["u_steady_opt"] = eq.u_opt;
    j["y_steady_opt"] = eq.y_opt;
    j["steady_productivity"] = eq.productivity_opt;
    j["y0_min"] = fb.y0_min;
    j["y0_max"] = fb.y0_max;
    write_json(out_path(rc, "analysis.json"), j);
    finish(rc, argv, p, {"analysis.json"});
    return 0;
}

// ------------------------------------------------------------ simulate

struct SimulateArgs {
    double u_const = 0.0;
    std::string switches;     // "t:u,t:u,..." in calendar days
    std::string light = "step";
    std::string model = "simplified";
    double y0 = -1.0;         // <0: close the orbit periodically
    double step = 1e-3;
};

lux::Policy parse_policy(const SimulateArgs& a, const lux::ScaledParams& sp,
                         double D_max) {
    if (a.switches.empty()) return lux::Policy::constant(a.u_const, sp.T);
    std::vector<double> times, levels;
    std::string rest = a.switches;
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const std::string item = rest.substr(0, comma);
        rest = comma == std::string::npos ? "" : rest.substr(comma + 1);
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw lux::InvalidParams("switch must look like t:u, got " + item);
        const double t_days = std::stod(item.substr(0, colon));
        const double u = std::stod(item.substr(colon + 1));
        times.push_back(t_days * D_max);
        levels.push_back(u);
    }
    if (times.empty() || times.front() != 0.0)
        throw lux::InvalidParams("switch list must start at t=0");
    // from_switches wants interior times only; the first level holds from 0.
    return lux::Policy::from_switches({times.begin() + 1, times.end()}, levels, sp.T);
}

int run_simulate(const RunConfig& rc, const SimulateArgs& a,
                 const std::vector<std::string>& argv) {
    const lux::PhysicalParams p = load_resolved(rc);
    const lux::ScaledParams sp = lux::scale(p);
    const lux::Policy policy = parse_policy(a, sp, p.D_max);
    const lux::LightSchedule schedule{a.light == "sine" ? lux::LightKind::SquaredSine
                                                        : lux::LightKind::Step};
    const lux::SimOptions opt{a.step, true};
    double y0 = a.y0;
    if (y0 < 0) {
        const auto fb = lux::feasibility_bounds(sp);
        const double guess = fb.feasible ? 0.5 * (fb.y0_min + fb.y0_max) : 0.1;
        y0 = lux::periodic_y0(policy, sp, schedule, opt, guess);
    }
    const lux::Trajectory traj =
        a.model == "ln" ? lux::simulate_ln(policy, y0, p, schedule, opt)
                        : lux::simulate(policy, y0, sp, schedule, opt);
    lux::write_sim_csv(out_path(rc, "sim.csv"), traj, p.D_max);
    json j;
    j["model"] = a.model;
    j["light"] = a.light;
    j["y0"] = y0;
    j["objective"] = traj.objective;
    j["harvest_dimensional"] = p.V * *p.kappa * traj.objective;
    j["y_final"] = traj.y.back();
    j["clamped_at_zero"] = traj.clamped_at_zero;
    write_json(out_path(rc, "sim.json"), j);
    finish(rc, argv, p, {"sim.csv", "sim.json"});
    return 0;
}

// --------------------------------------------------------------- solve

json unknowns_json(const lux::CandidateSolution& s) {
    const auto& q = s.unknowns;
    json j;
    auto put = [&](const char* k, double v) {
        if (std::isfinite(v)) j[k] = v;
    };
    put("y0", q.y0);
    put("lambda0", q.lambda0);
    put("t01", q.t01);
    put("t0s", q.t0s);
    put("ts1", q.ts1);
    put("t10", q.t10);
    put("y_bar", q.y_bar);
    put("lambda_bar", q.lambda_bar);
    return j;
}

int run_solve(const RunConfig& rc, const std::vector<std::string>& argv) {
    const lux::PhysicalParams p = load_resolved(rc);
    if (washed_out(p)) {
        std::fprintf(stderr, "%s\n", washout_message(p).c_str());
        finish(rc, argv, p, {});
        return 2;
    }
    const lux::ScaledParams sp = lux::scale(p);
    const lux::BestSolution best = lux::best_solution(sp);
    json j;
    j["scaled"] = scaled_json(sp);
    json tried = json::array();
    for (const auto& a : best.attempts) {
        json t;
        t["structure"] = lux::to_string(a.structure);
        t["valid"] = a.status == lux::SolveStatus::Valid;
        t["residual_norm"] = a.residual_norm;
        if (!a.message.empty()) t["message"] = a.message;
        tried.push_back(std::move(t));
    }
    j["attempts"] = std::move(tried);
    if (!best.found) {
        j["found"] = false;
        write_json(out_path(rc, "solution.json"), j);
        finish(rc, argv, p, {"solution.json"});
        std::fprintf(stderr, "no candidate structure passed validation\n");
        return 1;
    }
    const auto& s = best.best;
    j["found"] = true;
    j["structure"] = lux::to_string(s.structure);
    j["objective"] = s.objective;
    j["harvest_dimensional"] = p.V * *p.kappa * s.objective;
    j["residual_norm"] = s.residual_norm;
    j["unknowns"] = unknowns_json(s);
    j["D_max"] = p.D_max;
    lux::write_trajectory_csv(out_path(rc, "solution.csv"), s.trajectory, p.D_max);
    write_json(out_path(rc, "solution.json"), j);
    finish(rc, argv, p, {"solution.csv", "solution.json"});
    return 0;
}

// -------------------------------------------------------------- oracle

int run_oracle(const RunConfig& rc, const lux::OracleConfig& cfg,
               const std::vector<std::string>& argv) {
    const lux::PhysicalParams p = load_resolved(rc);
    const lux::ScaledParams sp = lux::scale(p);
    const lux::OracleResult res = lux::dp_optimize(sp, cfg);
    const lux::SwitchEstimates est = lux::estimate_switches(res, sp);
    json j;
    j["objective"] = res.objective;
    j["y0_star"] = res.y0_star;
    j["periodicity_defect"] = res.periodicity_defect;
    j["grid"] = {{"n_time", res.config.n_time},
                 {"n_state", res.config.n_state},
                 {"u_levels", res.config.u_levels},
                 {"y0_scan", res.config.y0_scan}};
    json e;
    e["recognized"] = est.recognized;
    e["structure"] = lux::to_string(est.structure);
    auto put = [&](const char* k, const std::optional<double>& v) {
        if (v) e[k] = *v;
    };
    put("t01", est.t01);
    put("t0s", est.t0s);
    put("ts1", est.ts1);
    put("t10", est.t10);
    j["estimates"] = std::move(e);
    if (est.recognized) {
        const lux::RefinedEstimates ref = lux::refine_switches(est, sp);
        json r;
        r["ok"] = ref.ok;
        r["objective"] = ref.objective;
        r["y0"] = ref.y0;
        r["evaluations"] = ref.evaluations;
        auto rput = [&](const char* k, const std::optional<double>& v) {
            if (v) r[k] = *v;
        };
        rput("t01", ref.t01);
        rput("t0s", ref.t0s);
        rput("ts1", ref.ts1);
        rput("t10", ref.t10);
        j["refined"] = std::move(r);
    }
    lux::write_oracle_csv(out_path(rc, "oracle.csv"), res, p.D_max);
    write_json(out_path(rc, "oracle.json"), j);
    finish(rc, argv, p, {"oracle.csv", "oracle.json"});
    return 0;
}

// ----------------------------------------------------------- bifurcate

bool parse_range(const std::string& text, double& lo, double& hi, int& n) {
    return std::sscanf(text.c_str(), "%lf:%lf:%d", &lo, &hi, &n) == 3 && n >= 2 &&
           hi > lo;
}

int run_bifurcate(const RunConfig& rc, const std::string& nu_range,
                  const std::string& rho_range, int threads, bool audit,
                  const std::vector<std::string>& argv) {
    const lux::PhysicalParams p = load_resolved(rc);
    lux::ScanConfig cfg;
    cfg.base = p;
    cfg.threads = threads;
    cfg.audit_determinism = audit;
    if (!nu_range.empty() &&
        !parse_range(nu_range, cfg.nu_min, cfg.nu_max, cfg.nu_count))
        throw lux::InvalidParams("--nu-range wants lo:hi:count, got " + nu_range);
    if (!rho_range.empty() &&
        !parse_range(rho_range, cfg.rho_min, cfg.rho_max, cfg.rho_count))
        throw lux::InvalidParams("--rho-range wants lo:hi:count, got " + rho_range);
    const lux::ScanResult res = lux::scan(cfg);
    lux::write_scan_csv(out_path(rc, "scan.csv"), res);
    lux::write_boundaries_json(out_path(rc, "boundaries.json"), res);
    finish(rc, argv, p, {"scan.csv", "boundaries.json"});
    if (res.unresolved_count > 0) {
        std::fprintf(stderr, "%d cells left unresolved\n", res.unresolved_count);
    }
    return 0;
}

// ------------------------------------------------------ compare-models

int run_compare(const RunConfig& rc, double y_lo, double y_hi, double threshold,
                const std::vector<std::string>& argv) {
    const lux::PhysicalParams p = load_resolved(rc);
    std::optional<std::pair<double, double>> range;
    if (y_hi > y_lo && y_lo >= 0) range = {y_lo, y_hi};
    const lux::CompareReport rep = lux::compare_models(p, range, threshold);
    json j;
    j["fit"] = {{"nu_bar", rep.fit.nu_bar},
                {"kappa", rep.fit.kappa},
                {"rel_error", rep.fit.rel_error},
                {"kappa_at_bound", rep.fit.kappa_at_bound}};
    j["max_rel_deviation"] = rep.max_rel_deviation;
    j["mean_rel_deviation"] = rep.mean_rel_deviation;
    j["max_rel_deviation_light"] = rep.max_rel_deviation_light;
    j["max_rel_deviation_dark"] = rep.max_rel_deviation_dark;
    j["productivity_simplified"] = rep.productivity_simplified;
    j["productivity_ln"] = rep.productivity_ln;
    j["threshold"] = rep.threshold;
    j["within_threshold"] = rep.within_threshold;
    write_json(out_path(rc, "compare.json"), j);
    finish(rc, argv, p, {"compare.json"});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal periodic harvesting of a light-limited chemostat"};
    app.set_version_flag("--version", std::string(lux::kVersion));
    app.require_subcommand(1);

    RunConfig rc;
    app.add_option("--params,-p", rc.params_path, "parameter JSON file")
        ->check(CLI::ExistingFile);
    app.add_option("--output,-o", rc.output_dir, "output directory (created)");
    app.add_option("--set", rc.overrides, "override one parameter, key=value");

    auto* analyze = app.add_subcommand("analyze", "closed-form quantities and feasibility");
    auto* simulate = app.add_subcommand("simulate", "integrate one period under a policy");
    SimulateArgs sa;
    simulate->add_option("--u", sa.u_const, "constant control level");
    simulate->add_option("--switches", sa.switches,
                         "piecewise control, t:u pairs in days, e.g. 0:0,0.3:1");
    simulate->add_option("--light", sa.light, "step or sine")
        ->check(CLI::IsMember({"step", "sine"}));
    simulate->add_option("--model", sa.model, "simplified or ln")
        ->check(CLI::IsMember({"simplified", "ln"}));
    simulate->add_option("--y0", sa.y0, "dawn biomass over kappa; default closes the orbit");
    simulate->add_option("--step", sa.step, "RK4 step, scaled time");

    auto* solve = app.add_subcommand("solve", "optimal periodic strategy via shooting");

    auto* oracle = app.add_subcommand("oracle", "grid dynamic programming cross-check");
    lux::OracleConfig oc;
    oracle->add_option("--n-time", oc.n_time, "time steps per period");
    oracle->add_option("--n-state", oc.n_state, "biomass grid points");
    oracle->add_option("--u-levels", oc.u_levels, "control levels");
    oracle->add_option("--y0-scan", oc.y0_scan, "dawn states scanned");
    oracle->add_option("--threads", oc.threads, "worker threads, 0 = all");

    auto* bif = app.add_subcommand("bifurcate", "regime scan over (nu_bar, rho)");
    std::string nu_range, rho_range;
    int scan_threads = 0;
    bool no_audit = false;
    bif->add_option("--nu-range", nu_range, "lo:hi:count");
    bif->add_option("--rho-range", rho_range, "lo:hi:count");
    bif->add_option("--threads", scan_threads, "worker threads, 0 = all");
    bif->add_flag("--no-audit", no_audit, "skip the cold determinism audit");

    auto* cmp = app.add_subcommand("compare-models", "ln model vs fitted surrogate");
    double y_lo = -1, y_hi = -1, cmp_threshold = 0.05;
    cmp->add_option("--y-min", y_lo, "fit range lower end, g/L");
    cmp->add_option("--y-max", y_hi, "fit range upper end, g/L");
    cmp->add_option("--threshold", cmp_threshold, "reporting threshold");

    CLI11_PARSE(app, argc, argv);

    const std::vector<std::string> raw_argv(argv, argv + argc);
    try {
        std::filesystem::create_directories(rc.output_dir);
        if (analyze->parsed()) rc.subcommand = RunConfig::Sub::Analyze;
        if (simulate->parsed()) rc.subcommand = RunConfig::Sub::Simulate;
        if (solve->parsed()) rc.subcommand = RunConfig::Sub::Solve;
        if (oracle->parsed()) rc.subcommand = RunConfig::Sub::Oracle;
        if (bif->parsed()) rc.subcommand = RunConfig::Sub::Bifurcate;
        if (cmp->parsed()) rc.subcommand = RunConfig::Sub::CompareModels;
        switch (rc.subcommand) {
            case RunConfig::Sub::Analyze: return run_analyze(rc, raw_argv);
            case RunConfig::Sub::Simulate: return run_simulate(rc, sa, raw_argv);
            case RunConfig::Sub::Solve: return run_solve(rc, raw_argv);
            case RunConfig::Sub::Oracle: return run_oracle(rc, oc, raw_argv);
            case RunConfig::Sub::Bifurcate:
                return run_bifurcate(rc, nu_range, rho_range, scan_threads,
                                     !no_audit, raw_argv);
            case RunConfig::Sub::CompareModels:
                return run_compare(rc, y_lo, y_hi, cmp_threshold, raw_argv);
        }
    } catch (const lux::InfeasibleError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const lux::Error& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 1;
    }
    return 1;
}
