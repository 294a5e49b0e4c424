#pragma once

#include "microdispatch/grid_model.hpp"
#include "microdispatch/powerflow.hpp"
#include "microdispatch/uncertainty.hpp"

#include <string>
#include <vector>

namespace microdispatch::evaluate {

/// Here-and-now decisions: CHP setpoints and signed ESS power (positive =
/// discharge) per unit and step. Grid exchange is the per-scenario recourse
/// and is not part of the schedule.
struct DispatchSchedule {
    std::vector<std::vector<double>> chp_kw;  // [chp unit][step]
    std::vector<std::vector<double>> ess_kw;  // [ess unit][step]

    bool operator==(const DispatchSchedule&) const = default;
};

// Maps schedules to flat optimizer vectors: step-major, CHP units then ESS units.
struct ScheduleLayout {
    int steps = 0;
    std::vector<int> chp_units;  // indices into NetworkCase::ders
    std::vector<int> ess_units;

    static ScheduleLayout of(const grid::NetworkCase& c);

    std::size_t dimension() const {
        return static_cast<std::size_t>(steps) * (chp_units.size() + ess_units.size());
    }
    std::vector<double> lower_bounds(const grid::NetworkCase& c) const;
    std::vector<double> upper_bounds(const grid::NetworkCase& c) const;
    std::vector<double> encode(const DispatchSchedule& s) const;
    DispatchSchedule decode(const std::vector<double>& genome) const;
    // All ESS idle, CHP at p_min.
    DispatchSchedule idle(const grid::NetworkCase& c) const;
};

// Throws DimensionMismatch when the schedule does not fit the case.
void check_schedule(const grid::NetworkCase& c, const DispatchSchedule& s);

double chp_fuel_cost(double p_kw, const der::ChpParams& chp, const grid::PriceBook& prices);
double om_cost(double p_kw, double k_om, double dt_hours);
double emission_mass(double p_kw, const grid::EmissionCoefs& coefs);

// Output of every DER (kW, ESS signed) at one step of one scenario.
std::vector<double> der_outputs(const grid::NetworkCase& c, const DispatchSchedule& s,
                                const uncertainty::Scenario& sc, int step);

powerflow::InjectionVector build_injections(const grid::NetworkCase& c, const DispatchSchedule& s,
                                            const uncertainty::Scenario& sc, int step);

// One flow per step. Sweeps that collapse come back non-converged with
// lossless slack balance.
std::vector<powerflow::FlowSolution> solve_hours(const grid::NetworkCase& c,
                                                 const DispatchSchedule& s,
                                                 const uncertainty::Scenario& sc);

struct F1Breakdown {
    double fuel_cost = 0.0;
    double fuel_units = 0.0;
    double om_cost = 0.0;
    double emission_kg = 0.0;
    double emission_cost = 0.0;
    double loss_kwh = 0.0;
    double loss_cost = 0.0;
    double grid_cost = 0.0;
    double grid_import_kwh = 0.0;
    double grid_export_kwh = 0.0;
    double total = 0.0;
};

F1Breakdown f1(const grid::NetworkCase& c, const DispatchSchedule& s, const uncertainty::Scenario& sc,
               const std::vector<powerflow::FlowSolution>& flows);

struct FaultPartition {
    std::vector<int> n_res;  // bus ids restored by switching after T_res
    std::vector<int> n_rep;  // bus ids out until repair, T_rep
};

/// With a sectionalizer on the faulted branch only its subtree waits for
/// repair. Without one, the nearest upstream sectionalized branch (or the
/// feeder head) isolates the fault and the rest of that section is restored
/// after fault location.
FaultPartition branch_fault_partition(const grid::NetworkCase& c, int branch_id);

struct ReliabilityResult {
    double c_aens = 0.0;      // $/day
    double ens_kwh = 0.0;     // expected kWh/day not supplied
    double demand_kwh = 0.0;  // scenario energy demand over the horizon
    double eir = 1.0;
};

ReliabilityResult reliability_cost(const grid::NetworkCase& c, const uncertainty::Scenario& sc);

// Interruption cost summed over microgrids; a case is one microgrid.
double f2(const grid::NetworkCase& c, double c_aens);

struct PenaltyBreakdown {
    double unit_limit = 0.0;
    double soc = 0.0;
    double terminal_soc = 0.0;
    double ramp = 0.0;
    double tie = 0.0;
    double voltage = 0.0;
    double divergence = 0.0;
    double total = 0.0;
};

PenaltyBreakdown constraint_penalties(const grid::NetworkCase& c, const DispatchSchedule& s,
                                      const uncertainty::Scenario& sc,
                                      const std::vector<powerflow::FlowSolution>& flows);

// SOC after every step for one ESS (index into layout.ess_units), unclamped.
std::vector<double> soc_trajectory(const grid::NetworkCase& c, const DispatchSchedule& s, int ess_slot);

struct ScenarioResult {
    int id = 0;
    double probability = 0.0;
    F1Breakdown f1;
    ReliabilityResult reliability;
    double f2 = 0.0;
    PenaltyBreakdown penalties;
    bool converged = true;
};

struct HourResult {
    int hour = 0;
    std::vector<double> unit_kw;  // expected output per DER
    double grid_kw = 0.0;         // expected exchange, positive = import
    double loss_kw = 0.0;
    double v_min = 0.0;  // over scenarios
    double v_max = 0.0;
};

struct EvaluationReport {
    std::vector<std::string> unit_names;
    std::vector<ScenarioResult> scenarios;
    ScenarioResult expected;  // probability-weighted fields
    std::vector<HourResult> hours;
    grid::Weights weights;
    double f1 = 0.0;
    double f2 = 0.0;
    double penalty = 0.0;
    double z = 0.0;
    double aens = 0.0;
    double eir = 1.0;
    bool feasible = true;
};

struct EvalOptions {
    int threads = 1;
    powerflow::SolverOptions solver;
};

/// Scores schedules against a fixed scenario set. Scenario-only quantities
/// (reliability, renewable availability, loads) are computed once.
class Evaluator {
public:
    Evaluator(const grid::NetworkCase& c, uncertainty::ScenarioSet set, EvalOptions options = {});

    // Z only; identical to evaluate(s).z.
    double objective(const DispatchSchedule& s) const;
    EvaluationReport evaluate(const DispatchSchedule& s) const;

    const ScheduleLayout& layout() const { return layout_; }
    const uncertainty::ScenarioSet& scenarios() const { return set_; }

private:
    ScenarioResult run_scenario(const DispatchSchedule& s, std::size_t k,
                                std::vector<powerflow::FlowSolution>& flows) const;

    const grid::NetworkCase& case_;
    uncertainty::ScenarioSet set_;
    EvalOptions options_;
    ScheduleLayout layout_;
    powerflow::RadialSolver solver_;
    std::vector<ReliabilityResult> reliability_;
    // Per scenario, per step: net injection without CHP/ESS, per bus index.
    std::vector<std::vector<powerflow::InjectionVector>> base_injection_;
};

EvaluationReport evaluate_schedule(const grid::NetworkCase& c, const DispatchSchedule& s,
                                   const uncertainty::ScenarioSet& set, EvalOptions options = {});

}  // namespace microdispatch::evaluate
