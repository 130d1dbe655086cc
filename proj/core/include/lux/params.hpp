#pragma once

#include <optional>
#include <string>

namespace lux {

// Dimensional description of the reactor and its day/night forcing.
// Rates are per day, biomass densities in g/L, times in calendar days.
// nu_bar/kappa describe the reduced uptake law nu_bar*x/(kappa+x); the
// ln-model constants describe depth-averaged growth under self shading.
// Either group may be absent: missing nu_bar/kappa are recovered from the
// ln model by fit_simplified(), and the ln constants are only needed when
// fitting or comparing models.
struct PhysicalParams {
    std::optional<double> nu_bar;    // uptake scale, 1/day
    std::optional<double> kappa;     // half-saturation biomass, g/L
    double rho = 5.0;                // maintenance/respiration, 1/day
    double D_max = 12.0;             // maximum dilution, 1/day
    double T_cal = 1.0;              // period, days
    double T_light = 0.5;            // lit fraction of the period, days

    std::optional<double> nu_tilde;  // ln-model uptake scale, 1/day
    std::optional<double> a;         // light attenuation per biomass, L/(g m)
    std::optional<double> L_depth;   // reactor depth, m
    std::optional<double> I0_bar;    // daytime incident light intensity
    std::optional<double> K_I;       // light half-saturation, same units as I0_bar

    double V = 1.0;                  // reactor volume, L

    // Reference configuration; ln constants are tuned so that
    // fit_simplified reproduces (nu_bar, kappa) ~ (36, 1).
    static PhysicalParams canonical();
};

// Dimensionless problem handed to the solvers: time in units of 1/D_max,
// biomass in units of kappa, control u in [0, 1].
struct ScaledParams {
    double mu_bar;   // nu_bar / (kappa * D_max)
    double r;        // rho / D_max
    double T;        // D_max * T_cal
    double T_light;  // D_max * T_light (calendar)

    double dark_span() const { return T - T_light; }
};

// Throws InvalidParams on structural problems (non-positive rates, light
// window outside the period, partially specified ln model).
void validate(const PhysicalParams& p);

// Invariant mu_bar > r > 0 and 0 < T_light <= T.  T_light == T is the
// fully lit degenerate period used by steady-state experiments.
void validate(const ScaledParams& sp);

// Requires resolved nu_bar/kappa.  Throws InfeasibleError when
// mu_bar <= r: growth can never outpace maintenance, washout is certain.
ScaledParams scale(const PhysicalParams& p);

// Inverse map; kappa and D_max fix the units the scaled problem dropped.
PhysicalParams unscale(const ScaledParams& sp, double kappa, double D_max);

// JSON ingestion.  Unknown keys are ignored; wrong types throw
// InvalidParams.  Fields absent from the document keep the defaults of
// `base` (pass canonical() to fill gaps, or {} for a bare parse).
PhysicalParams params_from_json(const std::string& text, const PhysicalParams& base);
PhysicalParams load_params(const std::string& path, const PhysicalParams& base);

std::string params_to_json(const PhysicalParams& p);

}  // namespace lux
