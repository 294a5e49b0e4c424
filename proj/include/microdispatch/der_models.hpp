#pragma once

#include <optional>

namespace microdispatch::der {

struct WtParams {
    double p_rate = 250.0;  // kW
    double v_ci = 2.0;      // cut-in, m/s
    double v_r = 14.0;      // rated, m/s
    double v_co = 25.0;     // cut-out, m/s

    bool operator==(const WtParams&) const = default;
};

// Coefficients of the ramp segment P(v) = p_rate * (a*v^2 + b*v + c), fixed by
// P(v_ci) = 0, P(v_r) = p_rate and dP/dv(v_r) = 0.
struct WtQuadratic {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

struct PvParams {
    double p_stc = 250.0;   // kW at standard test conditions
    double g_stc = 1000.0;  // W/m^2
    double k = 0.001;       // 1/degC
    double t_ref = 25.0;    // degC

    bool operator==(const PvParams&) const = default;
};

struct ChpParams {
    // Fuel rate theta*p^2 + rho*p + gamma (fuel units per hour, p in kW).
    double theta = 0.0;
    double rho = 0.0;
    double gamma = 0.0;
    double efficiency = 1.0;
    double heat_to_electric = 0.0;
    double p_min = 0.0;
    double p_max = 0.0;
    std::optional<double> ramp_limit;  // kW per hour

    bool operator==(const ChpParams&) const = default;
};

struct EssParams {
    double capacity = 0.0;  // kWh
    double soc_min = 0.0;
    double soc_max = 0.0;
    double soc_init = 0.0;
    double p_ch_max = 0.0;  // kW
    double p_dis_max = 0.0;
    double eta_ch = 1.0;
    double eta_dis = 1.0;

    bool operator==(const EssParams&) const = default;
};

WtQuadratic wt_quadratic(const WtParams& p);

// Total function of wind speed; zero below cut-in and above cut-out.
double wt_power(double v, const WtParams& p);

// Irradiance and cell-temperature corrected output, clamped at zero.
double pv_power(double g, double t_cell, const PvParams& p);

// Throws OutOfRange when p_chp is outside [p_min, p_max].
double chp_fuel_rate(double p_chp, const ChpParams& c);

/// SOC update for one step. Charge and discharge are both nonnegative and
/// mutually exclusive; rates are checked against the unit limits. SOC bounds
/// are not enforced here.
double ess_step(double soc_prev, double p_ch, double p_dis, double dt, const EssParams& e);

// Same arithmetic as ess_step without any checks. Used by the evaluator,
// which turns violations into penalties instead of exceptions.
inline double ess_soc_update(double soc_prev, double p_ch, double p_dis, double dt,
                             const EssParams& e) {
    return soc_prev + e.eta_ch * p_ch * dt - p_dis * dt / e.eta_dis;
}

}  // namespace microdispatch::der
