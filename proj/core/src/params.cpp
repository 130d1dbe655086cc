#include "lux/params.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lux/errors.hpp"

namespace lux {

namespace {

using nlohmann::json;

void require_positive(const char* name, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw InvalidParams(std::string(name) + " must be positive and finite");
    }
}

void read_opt(const json& j, const char* key, std::optional<double>& out) {
    if (auto it = j.find(key); it != j.end()) {
        if (!it->is_number()) throw InvalidParams(std::string(key) + " must be a number");
        out = it->get<double>();
    }
}

void read_plain(const json& j, const char* key, double& out) {
    if (auto it = j.find(key); it != j.end()) {
        if (!it->is_number()) throw InvalidParams(std::string(key) + " must be a number");
        out = it->get<double>();
    }
}

}  // namespace

PhysicalParams PhysicalParams::canonical() {
    PhysicalParams p;
    p.nu_bar = 36.0;
    p.kappa = 1.0;
    p.rho = 5.0;
    p.D_max = 12.0;
    p.T_cal = 1.0;
    p.T_light = 0.5;
    p.nu_tilde = 51.9;
    p.a = 10.0;
    p.L_depth = 0.2;
    p.I0_bar = 600.0;
    p.K_I = 378.0;
    p.V = 1.0;
    return p;
}

void validate(const PhysicalParams& p) {
    require_positive("rho", p.rho);
    require_positive("D_max", p.D_max);
    require_positive("T_cal", p.T_cal);
    require_positive("T_light", p.T_light);
    require_positive("V", p.V);
    if (!(p.T_light < p.T_cal)) {
        throw InvalidParams("T_light must be smaller than T_cal");
    }
    if (p.nu_bar) require_positive("nu_bar", *p.nu_bar);
    if (p.kappa) require_positive("kappa", *p.kappa);

    const bool any_ln = p.nu_tilde || p.a || p.L_depth || p.I0_bar || p.K_I;
    const bool all_ln = p.nu_tilde && p.a && p.L_depth && p.I0_bar && p.K_I;
    if (any_ln && !all_ln) {
        throw InvalidParams("ln model requires all of nu_tilde, a, L_depth, I0_bar, K_I");
    }
    if (all_ln) {
        require_positive("nu_tilde", *p.nu_tilde);
        require_positive("a", *p.a);
        require_positive("L_depth", *p.L_depth);
        require_positive("I0_bar", *p.I0_bar);
        require_positive("K_I", *p.K_I);
    }
}

void validate(const ScaledParams& sp) {
    require_positive("r", sp.r);
    require_positive("T", sp.T);
    require_positive("T_light", sp.T_light);
    if (!(sp.mu_bar > sp.r)) {
        throw InvalidParams("scaled growth mu_bar must exceed maintenance r");
    }
    if (!(sp.T_light <= sp.T)) {
        throw InvalidParams("T_light must not exceed the period T");
    }
}

ScaledParams scale(const PhysicalParams& p) {
    validate(p);
    if (!p.nu_bar || !p.kappa) {
        throw InvalidParams("scale() needs nu_bar and kappa; run resolve_uptake first");
    }
    ScaledParams sp;
    sp.mu_bar = *p.nu_bar / (*p.kappa * p.D_max);
    sp.r = p.rho / p.D_max;
    sp.T = p.D_max * p.T_cal;
    sp.T_light = p.D_max * p.T_light;
    if (!(sp.mu_bar > sp.r)) {
        throw InfeasibleError("mu_bar <= r: growth never outpaces maintenance");
    }
    return sp;
}

PhysicalParams unscale(const ScaledParams& sp, double kappa, double D_max) {
    require_positive("kappa", kappa);
    require_positive("D_max", D_max);
    PhysicalParams p;
    p.nu_bar = sp.mu_bar * kappa * D_max;
    p.kappa = kappa;
    p.rho = sp.r * D_max;
    p.D_max = D_max;
    p.T_cal = sp.T / D_max;
    p.T_light = sp.T_light / D_max;
    return p;
}

PhysicalParams params_from_json(const std::string& text, const PhysicalParams& base) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidParams(std::string("bad parameter JSON: ") + e.what());
    }
    if (!j.is_object()) throw InvalidParams("parameter JSON must be an object");

    PhysicalParams p = base;
    read_opt(j, "nu_bar", p.nu_bar);
    read_opt(j, "kappa", p.kappa);
    read_plain(j, "rho", p.rho);
    read_plain(j, "D_max", p.D_max);
    read_plain(j, "T_cal", p.T_cal);
    read_plain(j, "T_light", p.T_light);
    read_opt(j, "nu_tilde", p.nu_tilde);
    read_opt(j, "a", p.a);
    read_opt(j, "L_depth", p.L_depth);
    read_opt(j, "I0_bar", p.I0_bar);
    read_opt(j, "K_I", p.K_I);
    read_plain(j, "V", p.V);
    validate(p);
    return p;
}

PhysicalParams load_params(const std::string& path, const PhysicalParams& base) {
    std::ifstream in(path);
    if (!in) throw InvalidParams("cannot open parameter file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return params_from_json(ss.str(), base);
}

std::string params_to_json(const PhysicalParams& p) {
    json j;
    if (p.nu_bar) j["nu_bar"] = *p.nu_bar;
    if (p.kappa) j["kappa"] = *p.kappa;
    j["rho"] = p.rho;
    j["D_max"] = p.D_max;
    j["T_cal"] = p.T_cal;
    j["T_light"] = p.T_light;
    if (p.nu_tilde) j["nu_tilde"] = *p.nu_tilde;
    if (p.a) j["a"] = *p.a;
    if (p.L_depth) j["L_depth"] = *p.L_depth;
    if (p.I0_bar) j["I0_bar"] = *p.I0_bar;
    if (p.K_I) j["K_I"] = *p.K_I;
    j["V"] = p.V;
    return j.dump(2);
}

}  // namespace lux
