#include "microdispatch/powerflow.hpp"

#include "microdispatch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace microdispatch::powerflow {

double FlowSolution::v_min() const { return *std::min_element(v_pu.begin(), v_pu.end()); }
double FlowSolution::v_max() const { return *std::max_element(v_pu.begin(), v_pu.end()); }

RadialSolver::RadialSolver(const grid::NetworkCase& c, SolverOptions options)
    : n_bus_(c.buses.size()),
      root_(c.bus_index(c.topology.root_bus)),
      s_base_kva_(c.base.s_base_kva),
      v_slack_(c.base.slack_voltage_pu),
      opt_(options),
      order_(c.topology.order),
      from_(c.topology.parent_bus_index),
      to_(c.topology.child_bus_index),
      children_(c.buses.size()) {
    if (order_.size() != c.branches.size()) {
        throw TopologyError("case topology not validated");
    }
    const double z_scale =
        c.base.impedance_unit == grid::ImpedanceUnit::Ohm ? 1.0 / c.base.z_base_ohm() : 1.0;
    r_.reserve(c.branches.size());
    x_.reserve(c.branches.size());
    for (const auto& br : c.branches) {
        r_.push_back(br.r * z_scale);
        x_.push_back(br.x * z_scale);
    }
    for (std::size_t k = 0; k < from_.size(); ++k) {
        children_[static_cast<std::size_t>(from_[k])].push_back(static_cast<int>(k));
    }
}

FlowSolution RadialSolver::solve(const InjectionVector& inj) const {
    FlowSolution out;
    solve(inj, out);
    return out;
}

void RadialSolver::solve(const InjectionVector& inj, FlowSolution& out) const {
    if (inj.p_kw.size() != n_bus_ || inj.q_kvar.size() != n_bus_) {
        throw DimensionMismatch("injection vector length does not match bus count");
    }
    const std::size_t nbr = r_.size();
    thread_local std::vector<double> load_p, load_q, send_p, send_q;
    load_p.resize(n_bus_);
    load_q.resize(n_bus_);
    send_p.assign(nbr, 0.0);
    send_q.assign(nbr, 0.0);
    for (std::size_t i = 0; i < n_bus_; ++i) {
        load_p[i] = -inj.p_kw[i] / s_base_kva_;
        load_q[i] = -inj.q_kvar[i] / s_base_kva_;
    }

    out.v_pu.assign(n_bus_, v_slack_);
    out.branch_p_pu.assign(nbr, 0.0);
    out.branch_q_pu.assign(nbr, 0.0);
    out.branch_loss_kw.assign(nbr, 0.0);
    out.converged = false;
    out.iterations = 0;
    auto& v = out.v_pu;

    // Receiving-end flows and sending-end flows including the branch loss.
    auto backward = [&]() {
        for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
            const auto b = static_cast<std::size_t>(*it);
            const auto j = static_cast<std::size_t>(to_[b]);
            double p = load_p[j];
            double q = load_q[j];
            for (int c : children_[j]) {
                p += send_p[static_cast<std::size_t>(c)];
                q += send_q[static_cast<std::size_t>(c)];
            }
            const double s2_over_v2 = (p * p + q * q) / (v[j] * v[j]);
            out.branch_p_pu[b] = p;
            out.branch_q_pu[b] = q;
            out.branch_loss_kw[b] = r_[b] * s2_over_v2 * s_base_kva_;
            send_p[b] = p + r_[b] * s2_over_v2;
            send_q[b] = q + x_[b] * s2_over_v2;
        }
    };

    for (int iter = 1; iter <= opt_.max_iterations; ++iter) {
        backward();
        double max_dv = 0.0;
        for (int bi : order_) {
            const auto b = static_cast<std::size_t>(bi);
            const auto i = static_cast<std::size_t>(from_[b]);
            const auto j = static_cast<std::size_t>(to_[b]);
            const double ps = send_p[b];
            const double qs = send_q[b];
            const double vi2 = v[i] * v[i];
            const double vj2 = vi2 - 2.0 * (r_[b] * ps + x_[b] * qs) +
                               (r_[b] * r_[b] + x_[b] * x_[b]) * (ps * ps + qs * qs) / vi2;
            const double limit = opt_.collapse_voltage_pu;
            if (!(vj2 >= limit * limit)) {
                throw VoltageCollapse("voltage below " + std::to_string(limit) +
                                      " pu during sweep iteration " + std::to_string(iter));
            }
            // Past the nose of the PV curve the update jumps to the non-physical high-voltage root.
            if (!(vj2 * limit * limit <= 1.0)) {
                throw VoltageCollapse("voltage above " + std::to_string(1.0 / limit) +
                                      " pu during sweep iteration " + std::to_string(iter));
            }
            const double vj = std::sqrt(vj2);
            max_dv = std::max(max_dv, std::abs(vj - v[j]));
            v[j] = vj;
        }
        out.iterations = iter;
        if (max_dv < opt_.tolerance_pu) {
            out.converged = true;
            break;
        }
    }
    // Final backward pass so flows and losses are consistent with the reported voltages.
    backward();

    const auto root = static_cast<std::size_t>(root_);
    double slack_p = load_p[root];
    double slack_q = load_q[root];
    for (int c : children_[root]) {
        slack_p += send_p[static_cast<std::size_t>(c)];
        slack_q += send_q[static_cast<std::size_t>(c)];
    }
    out.slack_p_kw = slack_p * s_base_kva_;
    out.slack_q_kvar = slack_q * s_base_kva_;
    double loss = 0.0;
    for (double l : out.branch_loss_kw) {
        loss += l;
    }
    out.total_loss_kw = loss;
}

FlowSolution solve_radial(const grid::NetworkCase& c, const InjectionVector& inj,
                          SolverOptions options) {
    return RadialSolver(c, options).solve(inj);
}

double total_losses(const FlowSolution& sol) {
    if (!sol.converged) {
        throw NotConverged("power flow did not converge");
    }
    double loss = 0.0;
    for (double l : sol.branch_loss_kw) {
        loss += l;
    }
    return loss;
}

}  // namespace microdispatch::powerflow
