#pragma once

#include "microdispatch/grid_model.hpp"

#include <vector>

namespace microdispatch::powerflow {

// Net injections per bus index (generation minus load). The root entry is
// carried through to the slack balance but does not enter the sweep.
struct InjectionVector {
    std::vector<double> p_kw;
    std::vector<double> q_kvar;
};

struct SolverOptions {
    double tolerance_pu = 1e-8;
    int max_iterations = 50;
    double collapse_voltage_pu = 0.5;
};

struct FlowSolution {
    std::vector<double> v_pu;          // per bus index
    std::vector<double> branch_p_pu;   // receiving-end flow, per branch index
    std::vector<double> branch_q_pu;
    std::vector<double> branch_loss_kw;
    double total_loss_kw = 0.0;
    double slack_p_kw = 0.0;  // power drawn from the grid connection
    double slack_q_kvar = 0.0;
    bool converged = false;
    int iterations = 0;

    double v_min() const;
    double v_max() const;
    bool operator==(const FlowSolution&) const = default;
};

/// Backward/forward sweep over a validated radial case. Per-unit impedances
/// and sweep order are computed once so repeated solves stay allocation-light.
class RadialSolver {
public:
    explicit RadialSolver(const grid::NetworkCase& c, SolverOptions options = {});

    /// Constant-power loads, flat start. Losses in each backward pass use the
    /// previous iterate's receiving-end voltages. Returns the last iterate with
    /// converged=false when max_iterations is reached; throws VoltageCollapse
    /// when any voltage falls below the collapse threshold.
    FlowSolution solve(const InjectionVector& inj) const;

    // Same, writing into `out` to reuse its buffers.
    void solve(const InjectionVector& inj, FlowSolution& out) const;

    std::size_t bus_count() const { return n_bus_; }
    std::size_t branch_count() const { return r_.size(); }
    double s_base_kva() const { return s_base_kva_; }

private:
    std::size_t n_bus_ = 0;
    int root_ = 0;
    double s_base_kva_ = 1.0;
    double v_slack_ = 1.0;
    SolverOptions opt_;
    std::vector<int> order_;   // branch indices, parent first
    std::vector<int> from_;    // parent bus index per branch
    std::vector<int> to_;      // child bus index per branch
    std::vector<double> r_;    // pu
    std::vector<double> x_;
    std::vector<std::vector<int>> children_;  // child branches per bus index
};

FlowSolution solve_radial(const grid::NetworkCase& c, const InjectionVector& inj,
                          SolverOptions options = {});

// Sum of branch losses in kW; throws NotConverged for a non-converged solution.
double total_losses(const FlowSolution& sol);

}  // namespace microdispatch::powerflow
