#include "microdispatch/evaluate.hpp"

#include "microdispatch/errors.hpp"
#include "microdispatch/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace microdispatch::evaluate {

using grid::DerKind;
using grid::NetworkCase;
using powerflow::FlowSolution;
using powerflow::InjectionVector;
using uncertainty::Scenario;

ScheduleLayout ScheduleLayout::of(const NetworkCase& c) {
    ScheduleLayout l;
    l.steps = c.horizon.steps;
    for (std::size_t i = 0; i < c.ders.size(); ++i) {
        if (c.ders[i].kind == DerKind::CHP) {
            l.chp_units.push_back(static_cast<int>(i));
        } else if (c.ders[i].kind == DerKind::ESS) {
            l.ess_units.push_back(static_cast<int>(i));
        }
    }
    return l;
}

std::vector<double> ScheduleLayout::lower_bounds(const NetworkCase& c) const {
    std::vector<double> lo;
    lo.reserve(dimension());
    for (int t = 0; t < steps; ++t) {
        for (int u : chp_units) {
            lo.push_back(c.ders[static_cast<std::size_t>(u)].chp().p_min);
        }
        for (int u : ess_units) {
            lo.push_back(-c.ders[static_cast<std::size_t>(u)].ess().p_ch_max);
        }
    }
    return lo;
}

std::vector<double> ScheduleLayout::upper_bounds(const NetworkCase& c) const {
    std::vector<double> hi;
    hi.reserve(dimension());
    for (int t = 0; t < steps; ++t) {
        for (int u : chp_units) {
            hi.push_back(c.ders[static_cast<std::size_t>(u)].chp().p_max);
        }
        for (int u : ess_units) {
            hi.push_back(c.ders[static_cast<std::size_t>(u)].ess().p_dis_max);
        }
    }
    return hi;
}

std::vector<double> ScheduleLayout::encode(const DispatchSchedule& s) const {
    std::vector<double> g;
    g.reserve(dimension());
    for (std::size_t t = 0; t < static_cast<std::size_t>(steps); ++t) {
        for (const auto& row : s.chp_kw) {
            g.push_back(row[t]);
        }
        for (const auto& row : s.ess_kw) {
            g.push_back(row[t]);
        }
    }
    return g;
}

DispatchSchedule ScheduleLayout::decode(const std::vector<double>& genome) const {
    if (genome.size() != dimension()) {
        throw DimensionMismatch("genome has " + std::to_string(genome.size()) + " entries, expected " +
                                std::to_string(dimension()));
    }
    const auto n = static_cast<std::size_t>(steps);
    DispatchSchedule s;
    s.chp_kw.assign(chp_units.size(), std::vector<double>(n));
    s.ess_kw.assign(ess_units.size(), std::vector<double>(n));
    std::size_t k = 0;
    for (std::size_t t = 0; t < n; ++t) {
        for (auto& row : s.chp_kw) {
            row[t] = genome[k++];
        }
        for (auto& row : s.ess_kw) {
            row[t] = genome[k++];
        }
    }
    return s;
}

DispatchSchedule ScheduleLayout::idle(const NetworkCase& c) const {
    const auto n = static_cast<std::size_t>(steps);
    DispatchSchedule s;
    for (int u : chp_units) {
        s.chp_kw.emplace_back(n, c.ders[static_cast<std::size_t>(u)].chp().p_min);
    }
    s.ess_kw.assign(ess_units.size(), std::vector<double>(n, 0.0));
    return s;
}

void check_schedule(const NetworkCase& c, const DispatchSchedule& s) {
    const ScheduleLayout l = ScheduleLayout::of(c);
    const auto n = static_cast<std::size_t>(l.steps);
    bool ok = s.chp_kw.size() == l.chp_units.size() && s.ess_kw.size() == l.ess_units.size();
    for (const auto& row : s.chp_kw) {
        ok = ok && row.size() == n;
    }
    for (const auto& row : s.ess_kw) {
        ok = ok && row.size() == n;
    }
    if (!ok) {
        throw DimensionMismatch("schedule needs " + std::to_string(l.chp_units.size()) + " CHP and " +
                                std::to_string(l.ess_units.size()) + " ESS rows of " +
                                std::to_string(n) + " steps");
    }
}

namespace {

double fuel_cost_rate(double p_kw, const der::ChpParams& chp, const grid::PriceBook& prices) {
    return prices.gas_price * p_kw / chp.efficiency - prices.heat_credit * chp.heat_to_electric * p_kw;
}

double reactive_share(double power_factor) {
    return power_factor >= 1.0 ? 0.0 : std::tan(std::acos(power_factor));
}

// Schedule slot for every DER index: CHP or ESS row, -1 otherwise.
std::vector<int> schedule_slots(const NetworkCase& c) {
    std::vector<int> slot(c.ders.size(), -1);
    int chp = 0;
    int ess = 0;
    for (std::size_t i = 0; i < c.ders.size(); ++i) {
        if (c.ders[i].kind == DerKind::CHP) {
            slot[i] = chp++;
        } else if (c.ders[i].kind == DerKind::ESS) {
            slot[i] = ess++;
        }
    }
    return slot;
}

// Renewable output at maximum available power.
double renewable_output(const NetworkCase& c, const grid::DerUnit& u, const Scenario& sc,
                        std::size_t t) {
    if (u.kind == DerKind::WT) {
        return der::wt_power(sc.wind_ms[t], u.wt());
    }
    return der::pv_power(sc.irradiance_wm2[t], c.temperature(static_cast<int>(t)), u.pv());
}

double bus_load(const NetworkCase& c, const grid::Bus& b, double peak, const Scenario& sc, std::size_t t) {
    if (peak == 0.0) {
        return 0.0;
    }
    return peak * c.profiles.at(b.load_shape_ref)[t] * sc.load_mult[t];
}

// Loads and renewables only.
InjectionVector base_injection(const NetworkCase& c, const Scenario& sc, std::size_t t) {
    InjectionVector inj;
    inj.p_kw.assign(c.buses.size(), 0.0);
    inj.q_kvar.assign(c.buses.size(), 0.0);
    for (std::size_t i = 0; i < c.buses.size(); ++i) {
        const auto& b = c.buses[i];
        inj.p_kw[i] -= bus_load(c, b, b.load_p_peak, sc, t);
        inj.q_kvar[i] -= bus_load(c, b, b.load_q_peak, sc, t);
    }
    for (const auto& u : c.ders) {
        if (u.kind == DerKind::WT || u.kind == DerKind::PV) {
            inj.p_kw[static_cast<std::size_t>(c.bus_index(u.bus))] += renewable_output(c, u, sc, t);
        }
    }
    return inj;
}

void add_dispatch(const NetworkCase& c, const DispatchSchedule& s, const std::vector<int>& slots,
                  std::size_t t, InjectionVector& inj) {
    for (std::size_t i = 0; i < c.ders.size(); ++i) {
        const auto& u = c.ders[i];
        double p = 0.0;
        if (u.kind == DerKind::CHP) {
            p = s.chp_kw[static_cast<std::size_t>(slots[i])][t];
        } else if (u.kind == DerKind::ESS) {
            p = s.ess_kw[static_cast<std::size_t>(slots[i])][t];
        } else {
            continue;
        }
        const auto b = static_cast<std::size_t>(c.bus_index(u.bus));
        inj.p_kw[b] += p;
        inj.q_kvar[b] += p * reactive_share(u.power_factor);
    }
}

void solve_into(const powerflow::RadialSolver& solver, const InjectionVector& inj, double v_slack,
                FlowSolution& out) {
    try {
        solver.solve(inj, out);
    } catch (const VoltageCollapse&) {
        // No physical operating point; report lossless balance so costs stay finite.
        out.v_pu.assign(inj.p_kw.size(), v_slack);
        out.branch_p_pu.assign(solver.branch_count(), 0.0);
        out.branch_q_pu.assign(solver.branch_count(), 0.0);
        out.branch_loss_kw.assign(solver.branch_count(), 0.0);
        out.total_loss_kw = 0.0;
        out.slack_p_kw = 0.0;
        out.slack_q_kvar = 0.0;
        for (std::size_t i = 0; i < inj.p_kw.size(); ++i) {
            out.slack_p_kw -= inj.p_kw[i];
            out.slack_q_kvar -= inj.q_kvar[i];
        }
        out.converged = false;
    }
}

}  // namespace

double chp_fuel_cost(double p_kw, const der::ChpParams& chp, const grid::PriceBook& prices) {
    if (p_kw < chp.p_min || p_kw > chp.p_max) {
        throw OutOfRange("CHP setpoint " + std::to_string(p_kw) + " kW outside unit limits");
    }
    return fuel_cost_rate(p_kw, chp, prices);
}

double om_cost(double p_kw, double k_om, double dt_hours) {
    if (p_kw < 0.0) {
        throw OutOfRange("O&M cost takes a nonnegative power (pass |p| for storage)");
    }
    return k_om * p_kw * dt_hours;
}

double emission_mass(double p_kw, const grid::EmissionCoefs& e) {
    if (p_kw < 0.0) {
        throw OutOfRange("emission model takes a nonnegative power");
    }
    const double exponent = e.lambda * p_kw;
    if (exponent > 700.0) {
        throw Overflow("emission exponent " + std::to_string(exponent) + " exceeds 700");
    }
    const double tail = e.zeta == 0.0 ? 0.0 : e.zeta * std::exp(exponent);
    return e.alpha + e.beta * p_kw + e.gamma * p_kw * p_kw + tail;
}

std::vector<double> der_outputs(const NetworkCase& c, const DispatchSchedule& s, const Scenario& sc,
                                int step) {
    const auto slots = schedule_slots(c);
    const auto t = static_cast<std::size_t>(step);
    std::vector<double> out(c.ders.size(), 0.0);
    for (std::size_t i = 0; i < c.ders.size(); ++i) {
        const auto& u = c.ders[i];
        switch (u.kind) {
            case DerKind::WT:
            case DerKind::PV: out[i] = renewable_output(c, u, sc, t); break;
            case DerKind::CHP: out[i] = s.chp_kw[static_cast<std::size_t>(slots[i])][t]; break;
            case DerKind::ESS: out[i] = s.ess_kw[static_cast<std::size_t>(slots[i])][t]; break;
        }
    }
    return out;
}

InjectionVector build_injections(const NetworkCase& c, const DispatchSchedule& s, const Scenario& sc,
                                 int step) {
    InjectionVector inj = base_injection(c, sc, static_cast<std::size_t>(step));
    add_dispatch(c, s, schedule_slots(c), static_cast<std::size_t>(step), inj);
    return inj;
}

std::vector<FlowSolution> solve_hours(const NetworkCase& c, const DispatchSchedule& s,
                                      const Scenario& sc) {
    check_schedule(c, s);
    const powerflow::RadialSolver solver(c);
    std::vector<FlowSolution> flows(static_cast<std::size_t>(c.horizon.steps));
    for (int t = 0; t < c.horizon.steps; ++t) {
        solve_into(solver, build_injections(c, s, sc, t), c.base.slack_voltage_pu,
                   flows[static_cast<std::size_t>(t)]);
    }
    return flows;
}

F1Breakdown f1(const NetworkCase& c, const DispatchSchedule& s, const Scenario& sc,
               const std::vector<FlowSolution>& flows) {
    const auto slots = schedule_slots(c);
    const double dt = c.horizon.dt_hours;
    const auto& prices = c.prices;
    F1Breakdown r;
    for (std::size_t t = 0; t < static_cast<std::size_t>(c.horizon.steps); ++t) {
        for (std::size_t i = 0; i < c.ders.size(); ++i) {
            const auto& u = c.ders[i];
            double p = 0.0;
            switch (u.kind) {
                case DerKind::WT:
                case DerKind::PV: p = renewable_output(c, u, sc, t); break;
                case DerKind::CHP: {
                    p = s.chp_kw[static_cast<std::size_t>(slots[i])][t];
                    const auto& chp = u.chp();
                    // Range violations are priced by the penalty terms, not rejected here.
                    r.fuel_cost += fuel_cost_rate(p, chp, prices) * dt;
                    r.fuel_units += (chp.theta * p * p + chp.rho * p + chp.gamma) * dt;
                    break;
                }
                case DerKind::ESS: p = s.ess_kw[static_cast<std::size_t>(slots[i])][t]; break;
            }
            const double mag = std::abs(p);
            r.om_cost += om_cost(mag, u.om_rate, dt);
            r.emission_kg += emission_mass(mag, u.emission) * dt;
        }
        const FlowSolution& f = flows[t];
        const double grid_kw = f.slack_p_kw;
        if (grid_kw > 0.0) {
            r.grid_import_kwh += grid_kw * dt;
            r.emission_kg += emission_mass(grid_kw, c.grid.import_emission) * dt;
        } else {
            r.grid_export_kwh -= grid_kw * dt;
        }
        r.grid_cost += grid_kw * dt * prices.grid_energy_price[t] * sc.price_mult[t];
        r.loss_kwh += f.total_loss_kw * dt;
    }
    r.emission_cost = r.emission_kg * prices.emission_price;
    r.loss_cost = r.loss_kwh * prices.loss_price;
    r.total = r.fuel_cost + r.om_cost + r.emission_cost + r.loss_cost + r.grid_cost;
    return r;
}

FaultPartition branch_fault_partition(const NetworkCase& c, int branch_id) {
    const int k = c.branch_index(branch_id);
    if (k < 0) {
        throw UnknownBranch(branch_id);
    }
    FaultPartition part;
    part.n_rep = grid::subtree_of(c, branch_id);
    const auto& br = c.branches[static_cast<std::size_t>(k)];
    if (br.has_sectionalizer) {
        return part;
    }
    const auto& t = c.topology;
    int isolating = -1;
    int bus = t.parent_bus_index[static_cast<std::size_t>(k)];
    while (t.parent_branch[static_cast<std::size_t>(bus)] >= 0) {
        const int up = t.parent_branch[static_cast<std::size_t>(bus)];
        if (c.branches[static_cast<std::size_t>(up)].has_sectionalizer) {
            isolating = up;
            break;
        }
        bus = t.parent_bus_index[static_cast<std::size_t>(up)];
    }
    std::vector<int> section;
    if (isolating >= 0) {
        section = grid::subtree_of(c, c.branches[static_cast<std::size_t>(isolating)].id);
    } else {
        for (const auto& b : c.buses) {
            if (b.id != t.root_bus) {
                section.push_back(b.id);
            }
        }
        std::sort(section.begin(), section.end());
    }
    std::set_difference(section.begin(), section.end(), part.n_rep.begin(), part.n_rep.end(),
                        std::back_inserter(part.n_res));
    return part;
}

ReliabilityResult reliability_cost(const NetworkCase& c, const Scenario& sc) {
    const auto steps = static_cast<std::size_t>(c.horizon.steps);
    const double dt = c.horizon.dt_hours;
    // Day-average demand per bus id.
    std::vector<double> avg(c.buses.size(), 0.0);
    ReliabilityResult r;
    for (std::size_t i = 0; i < c.buses.size(); ++i) {
        const auto& b = c.buses[i];
        for (std::size_t t = 0; t < steps; ++t) {
            const double p = bus_load(c, b, b.load_p_peak, sc, t);
            avg[i] += p / static_cast<double>(steps);
            r.demand_kwh += p * dt;
        }
    }
    auto load_of = [&](int bus_id) { return avg[static_cast<std::size_t>(c.bus_index(bus_id))]; };

    constexpr double kDaysPerYear = 365.0;
    for (const auto& br : c.branches) {
        const double faults_per_year = br.failure_rate * br.length;
        if (faults_per_year == 0.0) {
            continue;
        }
        const FaultPartition part = branch_fault_partition(c, br.id);
        double energy = 0.0;
        for (int b : part.n_res) {
            energy += load_of(b) * c.reliability.t_res_hours;
        }
        for (int b : part.n_rep) {
            energy += load_of(b) * c.reliability.t_rep_hours;
        }
        r.ens_kwh += faults_per_year * energy / kDaysPerYear;
    }
    r.c_aens = c.prices.interruption_price * r.ens_kwh;
    r.eir = r.demand_kwh > 0.0 ? 1.0 - r.ens_kwh / r.demand_kwh : 1.0;
    return r;
}

double f2(const NetworkCase& c, double c_aens) { return c.weights.hc * c_aens; }

std::vector<double> soc_trajectory(const NetworkCase& c, const DispatchSchedule& s, int ess_slot) {
    const ScheduleLayout l = ScheduleLayout::of(c);
    const auto& e = c.ders[static_cast<std::size_t>(l.ess_units[static_cast<std::size_t>(ess_slot)])].ess();
    std::vector<double> soc;
    soc.reserve(static_cast<std::size_t>(l.steps));
    double level = e.soc_init;
    for (double p : s.ess_kw[static_cast<std::size_t>(ess_slot)]) {
        level = der::ess_soc_update(level, std::max(-p, 0.0), std::max(p, 0.0), c.horizon.dt_hours, e);
        soc.push_back(level);
    }
    return soc;
}

PenaltyBreakdown constraint_penalties(const NetworkCase& c, const DispatchSchedule& s,
                                      const Scenario& /*sc*/, const std::vector<FlowSolution>& flows) {
    const auto& w = c.penalties;
    const ScheduleLayout l = ScheduleLayout::of(c);
    const double dt = c.horizon.dt_hours;
    auto sq = [](double v) { return v * v; };
    auto excess = [](double v, double lo, double hi) {
        return v < lo ? lo - v : (v > hi ? v - hi : 0.0);
    };
    PenaltyBreakdown p;

    for (std::size_t k = 0; k < l.chp_units.size(); ++k) {
        const auto& chp = c.ders[static_cast<std::size_t>(l.chp_units[k])].chp();
        const auto& row = s.chp_kw[k];
        for (std::size_t t = 0; t < row.size(); ++t) {
            p.unit_limit += w.unit_limit * sq(excess(row[t], chp.p_min, chp.p_max));
            if (chp.ramp_limit && t > 0) {
                const double step = std::abs(row[t] - row[t - 1]);
                p.ramp += w.ramp * sq(std::max(step - *chp.ramp_limit * dt, 0.0));
            }
        }
    }
    for (std::size_t k = 0; k < l.ess_units.size(); ++k) {
        const auto& e = c.ders[static_cast<std::size_t>(l.ess_units[k])].ess();
        for (double pw : s.ess_kw[k]) {
            p.unit_limit += w.unit_limit * sq(excess(pw, -e.p_ch_max, e.p_dis_max));
        }
        const auto soc = soc_trajectory(c, s, static_cast<int>(k));
        for (double level : soc) {
            p.soc += w.soc * sq(excess(level, e.soc_min, e.soc_max));
        }
        if (!soc.empty()) {
            const double band = w.terminal_soc_band * e.capacity;
            p.terminal_soc += w.soc * sq(std::max(std::abs(soc.back() - e.soc_init) - band, 0.0));
        }
    }

    bool diverged = false;
    for (const auto& f : flows) {
        p.tie += w.tie * sq(std::max(std::abs(f.slack_p_kw) - c.grid.limit_kw, 0.0));
        if (!f.converged) {
            diverged = true;
            continue;
        }
        for (double v : f.v_pu) {
            p.voltage += w.voltage * sq(excess(v, w.v_min, w.v_max));
        }
    }
    if (diverged) {
        p.divergence = w.divergence;
    }
    p.total = p.unit_limit + p.soc + p.terminal_soc + p.ramp + p.tie + p.voltage + p.divergence;
    return p;
}

Evaluator::Evaluator(const NetworkCase& c, uncertainty::ScenarioSet set, EvalOptions options)
    : case_(c),
      set_(std::move(set)),
      options_(options),
      layout_(ScheduleLayout::of(c)),
      solver_(c, options.solver) {
    const auto steps = static_cast<std::size_t>(c.horizon.steps);
    if (set_.scenarios.empty()) {
        throw DimensionMismatch("scenario set is empty");
    }
    for (const auto& sc : set_.scenarios) {
        if (sc.load_mult.size() != steps || sc.wind_ms.size() != steps ||
            sc.irradiance_wm2.size() != steps || sc.price_mult.size() != steps) {
            throw DimensionMismatch("scenario " + std::to_string(sc.id) + " does not span the horizon");
        }
    }
    reliability_.resize(set_.scenarios.size());
    base_injection_.resize(set_.scenarios.size());
    for (std::size_t k = 0; k < set_.scenarios.size(); ++k) {
        reliability_[k] = reliability_cost(c, set_.scenarios[k]);
        base_injection_[k].reserve(steps);
        for (std::size_t t = 0; t < steps; ++t) {
            base_injection_[k].push_back(base_injection(c, set_.scenarios[k], t));
        }
    }
}

ScenarioResult Evaluator::run_scenario(const DispatchSchedule& s, std::size_t k,
                                       std::vector<FlowSolution>& flows) const {
    const Scenario& sc = set_.scenarios[k];
    const auto slots = schedule_slots(case_);
    const auto steps = static_cast<std::size_t>(case_.horizon.steps);
    flows.resize(steps);
    InjectionVector inj;
    for (std::size_t t = 0; t < steps; ++t) {
        inj = base_injection_[k][t];
        add_dispatch(case_, s, slots, t, inj);
        solve_into(solver_, inj, case_.base.slack_voltage_pu, flows[t]);
    }
    ScenarioResult r;
    r.id = sc.id;
    r.probability = sc.probability;
    r.f1 = f1(case_, s, sc, flows);
    r.reliability = reliability_[k];
    r.f2 = f2(case_, r.reliability.c_aens);
    r.penalties = constraint_penalties(case_, s, sc, flows);
    r.converged = std::all_of(flows.begin(), flows.end(), [](const FlowSolution& f) { return f.converged; });
    return r;
}

double Evaluator::objective(const DispatchSchedule& s) const {
    check_schedule(case_, s);
    const std::size_t n = set_.scenarios.size();
    std::vector<ScenarioResult> results(n);
    parallel_for(n, options_.threads, [&](std::size_t k) {
        thread_local std::vector<FlowSolution> flows;
        results[k] = run_scenario(s, k, flows);
    });
    double f1_sum = 0.0;
    double f2_sum = 0.0;
    double pen = 0.0;
    for (const auto& r : results) {
        f1_sum += r.probability * r.f1.total;
        f2_sum += r.probability * r.f2;
        pen += r.probability * r.penalties.total;
    }
    return case_.weights.h1 * f1_sum + case_.weights.h2 * f2_sum + pen;
}

EvaluationReport Evaluator::evaluate(const DispatchSchedule& s) const {
    check_schedule(case_, s);
    const std::size_t n = set_.scenarios.size();
    const auto steps = static_cast<std::size_t>(case_.horizon.steps);

    struct HourTrace {
        std::vector<double> grid_kw, loss_kw, v_min, v_max;
    };
    std::vector<ScenarioResult> results(n);
    std::vector<HourTrace> traces(n);
    parallel_for(n, options_.threads, [&](std::size_t k) {
        std::vector<FlowSolution> flows;
        results[k] = run_scenario(s, k, flows);
        auto& tr = traces[k];
        for (const auto& f : flows) {
            tr.grid_kw.push_back(f.slack_p_kw);
            tr.loss_kw.push_back(f.total_loss_kw);
            tr.v_min.push_back(f.v_min());
            tr.v_max.push_back(f.v_max());
        }
    });

    EvaluationReport rep;
    rep.weights = case_.weights;
    for (const auto& u : case_.ders) {
        rep.unit_names.push_back(u.name);
    }
    rep.scenarios = results;

    ScenarioResult& e = rep.expected;
    e.id = -1;
    e.probability = 0.0;
    e.reliability.eir = 0.0;
    for (const auto& r : results) {
        const double p = r.probability;
        e.probability += p;
        e.f1.fuel_cost += p * r.f1.fuel_cost;
        e.f1.fuel_units += p * r.f1.fuel_units;
        e.f1.om_cost += p * r.f1.om_cost;
        e.f1.emission_kg += p * r.f1.emission_kg;
        e.f1.emission_cost += p * r.f1.emission_cost;
        e.f1.loss_kwh += p * r.f1.loss_kwh;
        e.f1.loss_cost += p * r.f1.loss_cost;
        e.f1.grid_cost += p * r.f1.grid_cost;
        e.f1.grid_import_kwh += p * r.f1.grid_import_kwh;
        e.f1.grid_export_kwh += p * r.f1.grid_export_kwh;
        e.f1.total += p * r.f1.total;
        e.reliability.c_aens += p * r.reliability.c_aens;
        e.reliability.ens_kwh += p * r.reliability.ens_kwh;
        e.reliability.demand_kwh += p * r.reliability.demand_kwh;
        e.reliability.eir += p * r.reliability.eir;
        e.f2 += p * r.f2;
        e.penalties.unit_limit += p * r.penalties.unit_limit;
        e.penalties.soc += p * r.penalties.soc;
        e.penalties.terminal_soc += p * r.penalties.terminal_soc;
        e.penalties.ramp += p * r.penalties.ramp;
        e.penalties.tie += p * r.penalties.tie;
        e.penalties.voltage += p * r.penalties.voltage;
        e.penalties.divergence += p * r.penalties.divergence;
        e.penalties.total += p * r.penalties.total;
        e.converged = e.converged && r.converged;
        rep.feasible = rep.feasible && r.penalties.total == 0.0 && r.converged;
    }
    rep.f1 = e.f1.total;
    rep.f2 = e.f2;
    rep.penalty = e.penalties.total;
    rep.z = case_.weights.h1 * rep.f1 + case_.weights.h2 * rep.f2 + rep.penalty;
    rep.aens = e.reliability.ens_kwh;
    rep.eir = e.reliability.demand_kwh > 0.0 ? 1.0 - rep.aens / e.reliability.demand_kwh : 1.0;

    rep.hours.resize(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        HourResult& h = rep.hours[t];
        h.hour = static_cast<int>(t);
        h.unit_kw.assign(case_.ders.size(), 0.0);
        h.v_min = std::numeric_limits<double>::infinity();
        h.v_max = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n; ++k) {
            const double p = results[k].probability;
            const auto out = der_outputs(case_, s, set_.scenarios[k], static_cast<int>(t));
            for (std::size_t i = 0; i < out.size(); ++i) {
                h.unit_kw[i] += p * out[i];
            }
            h.grid_kw += p * traces[k].grid_kw[t];
            h.loss_kw += p * traces[k].loss_kw[t];
            h.v_min = std::min(h.v_min, traces[k].v_min[t]);
            h.v_max = std::max(h.v_max, traces[k].v_max[t]);
        }
    }
    return rep;
}

EvaluationReport evaluate_schedule(const NetworkCase& c, const DispatchSchedule& s,
                                   const uncertainty::ScenarioSet& set, EvalOptions options) {
    return Evaluator(c, set, options).evaluate(s);
}

}  // namespace microdispatch::evaluate
