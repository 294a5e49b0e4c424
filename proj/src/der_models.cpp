#include "microdispatch/der_models.hpp"

#include "microdispatch/errors.hpp"

#include <algorithm>
#include <string>

namespace microdispatch::der {

WtQuadratic wt_quadratic(const WtParams& p) {
    const double span = p.v_r - p.v_ci;
    const double inv = 1.0 / (span * span);
    return {-inv, 2.0 * p.v_r * inv, 1.0 - p.v_r * p.v_r * inv};
}

double wt_power(double v, const WtParams& p) {
    if (v < p.v_ci || v > p.v_co) {
        return 0.0;
    }
    if (v >= p.v_r) {
        return p.p_rate;
    }
    // Factored form of the ramp quadratic; exact at both ends of the segment.
    const double u = (p.v_r - v) / (p.v_r - p.v_ci);
    return std::clamp(p.p_rate * (1.0 - u * u), 0.0, p.p_rate);
}

double pv_power(double g, double t_cell, const PvParams& p) {
    const double out = p.p_stc * (g / p.g_stc) * (1.0 + p.k * (t_cell - p.t_ref));
    return std::max(out, 0.0);
}

double chp_fuel_rate(double p_chp, const ChpParams& c) {
    if (p_chp < c.p_min || p_chp > c.p_max) {
        throw OutOfRange("CHP setpoint " + std::to_string(p_chp) + " kW outside [" +
                         std::to_string(c.p_min) + ", " + std::to_string(c.p_max) + "]");
    }
    return c.theta * p_chp * p_chp + c.rho * p_chp + c.gamma;
}

double ess_step(double soc_prev, double p_ch, double p_dis, double dt, const EssParams& e) {
    if (p_ch < 0.0 || p_dis < 0.0) {
        throw OutOfRange("ESS charge/discharge power must be nonnegative");
    }
    if (p_ch > 0.0 && p_dis > 0.0) {
        throw SimultaneousChargeDischarge();
    }
    if (p_ch > e.p_ch_max) {
        throw RateLimit("charge power " + std::to_string(p_ch) + " kW exceeds " +
                        std::to_string(e.p_ch_max));
    }
    if (p_dis > e.p_dis_max) {
        throw RateLimit("discharge power " + std::to_string(p_dis) + " kW exceeds " +
                        std::to_string(e.p_dis_max));
    }
    return ess_soc_update(soc_prev, p_ch, p_dis, dt, e);
}

}  // namespace microdispatch::der
