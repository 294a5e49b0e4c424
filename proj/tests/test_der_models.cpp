#include "microdispatch/der_models.hpp"
#include "microdispatch/errors.hpp"

#include <doctest.h>

#include <array>
#include <cmath>

using namespace microdispatch;
using doctest::Approx;

namespace {

// Solves the 3x3 boundary system for (a, b, c) by Cramer's rule:
// a*vci^2 + b*vci + c = 0, a*vr^2 + b*vr + c = 1, 2a*vr + b = 0.
std::array<double, 3> wt_oracle(const der::WtParams& p) {
    const double m[3][3] = {{p.v_ci * p.v_ci, p.v_ci, 1.0}, {p.v_r * p.v_r, p.v_r, 1.0}, {2.0 * p.v_r, 1.0, 0.0}};
    const double rhs[3] = {0.0, 1.0, 0.0};
    auto det = [](const double a[3][3]) {
        return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
               a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    };
    const double d = det(m);
    std::array<double, 3> out{};
    for (int col = 0; col < 3; ++col) {
        double t[3][3];
        for (int r = 0; r < 3; ++r) {
            for (int k = 0; k < 3; ++k) {
                t[r][k] = k == col ? rhs[r] : m[r][k];
            }
        }
        out[static_cast<std::size_t>(col)] = det(t) / d;
    }
    return out;
}

}  // namespace

TEST_CASE("wind turbine boundary behaviour") {
    const der::WtParams p;  // 250 kW, 2 / 14 / 25 m/s
    CHECK(der::wt_power(0.0, p) == 0.0);
    CHECK(der::wt_power(1.0, p) == 0.0);
    CHECK(der::wt_power(1.999, p) == 0.0);
    CHECK(der::wt_power(2.0, p) == 0.0);
    CHECK(der::wt_power(14.0, p) == 250.0);
    CHECK(der::wt_power(20.0, p) == 250.0);
    CHECK(der::wt_power(25.0, p) == 250.0);
    CHECK(der::wt_power(25.01, p) == 0.0);
    CHECK(der::wt_power(40.0, p) == 0.0);
}

TEST_CASE("wind turbine ramp matches the boundary-condition oracle") {
    const der::WtParams p;
    const auto q = der::wt_quadratic(p);
    const auto o = wt_oracle(p);
    CHECK(q.a == Approx(o[0]).epsilon(1e-12));
    CHECK(q.b == Approx(o[1]).epsilon(1e-12));
    CHECK(q.c == Approx(o[2]).epsilon(1e-12));
    CHECK(der::wt_power(8.0, p) == Approx(187.5).epsilon(1e-12));
    for (double v = 2.0; v < 14.0; v += 0.37) {
        const double oracle = p.p_rate * (o[0] * v * v + o[1] * v + o[2]);
        CHECK(der::wt_power(v, p) == Approx(oracle).epsilon(1e-9));
    }
}

TEST_CASE("wind turbine curve is monotone up to rated speed") {
    const der::WtParams p{300.0, 3.0, 12.0, 22.0};
    double prev = 0.0;
    for (double v = 0.0; v <= 22.0; v += 0.01) {
        const double now = der::wt_power(v, p);
        CHECK(now >= prev - 1e-12);
        CHECK(now <= p.p_rate);
        prev = now;
    }
}

TEST_CASE("photovoltaic output") {
    const der::PvParams p;
    CHECK(der::pv_power(1000.0, 25.0, p) == 250.0);
    CHECK(der::pv_power(0.0, 40.0, p) == 0.0);
    CHECK(der::pv_power(1000.0, 35.0, p) == Approx(252.5).epsilon(1e-12));
    CHECK(der::pv_power(500.0, 25.0, p) == Approx(125.0).epsilon(1e-12));
    const der::PvParams negative{250.0, 1000.0, -0.2, 25.0};
    CHECK(der::pv_power(1000.0, 40.0, negative) == 0.0);  // clamped
}

TEST_CASE("CHP fuel rate") {
    der::ChpParams c;
    c.rho = 1.0;
    c.p_max = 200.0;
    CHECK(der::chp_fuel_rate(50.0, c) == 50.0);
    c.rho = 0.0;
    c.gamma = 2.0;
    CHECK(der::chp_fuel_rate(0.0, c) == 2.0);
    c = {};
    c.theta = 0.001;
    c.rho = 0.2;
    c.gamma = 5.0;
    c.p_max = 200.0;
    CHECK(der::chp_fuel_rate(100.0, c) == Approx(35.0).epsilon(1e-12));
    CHECK_THROWS_AS(der::chp_fuel_rate(250.0, c), OutOfRange);
    c.p_min = 10.0;
    CHECK_THROWS_AS(der::chp_fuel_rate(5.0, c), OutOfRange);
}

TEST_CASE("ESS state of charge update") {
    der::EssParams e;
    e.capacity = 100.0;
    e.soc_max = 100.0;
    e.p_ch_max = 20.0;
    e.p_dis_max = 20.0;
    e.eta_ch = 0.9;
    e.eta_dis = 0.9;
    CHECK(der::ess_step(50.0, 0.0, 0.0, 1.0, e) == 50.0);
    const double charged = der::ess_step(50.0, 10.0, 0.0, 1.0, e);
    CHECK(charged == Approx(59.0).epsilon(1e-12));
    CHECK(der::ess_step(charged, 0.0, 9.0, 1.0, e) == Approx(49.0).epsilon(1e-12));
    CHECK(der::ess_step(50.0, 10.0, 0.0, 0.5, e) == Approx(54.5).epsilon(1e-12));

    CHECK_THROWS_AS(der::ess_step(50.0, 5.0, 5.0, 1.0, e), SimultaneousChargeDischarge);
    CHECK_THROWS_AS(der::ess_step(50.0, 25.0, 0.0, 1.0, e), RateLimit);
    CHECK_THROWS_AS(der::ess_step(50.0, 0.0, 25.0, 1.0, e), RateLimit);
    CHECK_THROWS_AS(der::ess_step(50.0, -1.0, 0.0, 1.0, e), OutOfRange);
    CHECK(der::ess_soc_update(50.0, 10.0, 0.0, 1.0, e) == der::ess_step(50.0, 10.0, 0.0, 1.0, e));
}
