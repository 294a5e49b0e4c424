#pragma once

#include "microdispatch/der_models.hpp"

#include <filesystem>
#include <limits>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace microdispatch::grid {

enum class ImpedanceUnit { Ohm, PerUnit };

struct Base {
    double s_base_kva = 1000.0;
    double v_base_kv = 0.4;
    ImpedanceUnit impedance_unit = ImpedanceUnit::Ohm;
    double slack_voltage_pu = 1.0;
    int root_bus = -1;  // -1: the unique bus that is never a to_bus

    double z_base_ohm() const { return v_base_kv * v_base_kv * 1000.0 / s_base_kva; }
    bool operator==(const Base&) const = default;
};

struct Horizon {
    int steps = 24;
    double dt_hours = 1.0;

    bool operator==(const Horizon&) const = default;
};

struct Bus {
    int id = 0;
    double load_p_peak = 0.0;  // kW
    double load_q_peak = 0.0;  // kVAr
    std::string load_shape_ref = "load";

    bool operator==(const Bus&) const = default;
};

struct Branch {
    int id = 0;
    int from_bus = 0;
    int to_bus = 0;
    double r = 0.0;  // ohm or pu, see Base::impedance_unit
    double x = 0.0;
    double length = 1.0;        // km
    double failure_rate = 0.0;  // faults / (km * year)
    bool has_sectionalizer = true;

    bool operator==(const Branch&) const = default;
};

enum class DerKind { WT, PV, CHP, ESS };

const char* to_string(DerKind kind);

// Emission mass alpha + beta*p + gamma*p^2 + zeta*exp(lambda*p), kg/h with p in kW.
struct EmissionCoefs {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double zeta = 0.0;
    double lambda = 0.0;

    bool operator==(const EmissionCoefs&) const = default;
};

using DerParams = std::variant<der::WtParams, der::PvParams, der::ChpParams, der::EssParams>;

struct DerUnit {
    std::string name;
    DerKind kind = DerKind::CHP;
    int bus = 0;
    double p_min = 0.0;
    double p_max = 0.0;
    double om_rate = 0.0;  // $/kWh
    double power_factor = 1.0;
    EmissionCoefs emission;
    DerParams params;

    const der::WtParams& wt() const { return std::get<der::WtParams>(params); }
    const der::PvParams& pv() const { return std::get<der::PvParams>(params); }
    const der::ChpParams& chp() const { return std::get<der::ChpParams>(params); }
    const der::EssParams& ess() const { return std::get<der::EssParams>(params); }

    bool operator==(const DerUnit&) const = default;
};

struct PriceBook {
    std::vector<double> grid_energy_price;  // $/kWh per step
    double gas_price = 0.0;                 // $ per kWh of fuel input
    double heat_credit = 0.0;               // $/kWh of recovered heat
    double loss_price = 0.0;                // $/kWh
    double interruption_price = 0.0;        // $/kWh
    double emission_price = 0.0;            // $/kg

    bool operator==(const PriceBook&) const = default;
};

struct Weights {
    double h1 = 1.0;
    double h2 = 1.0;
    double hc = 1.0;

    bool operator==(const Weights&) const = default;
};

struct ReliabilityConfig {
    double t_res_hours = 1.0;  // fault location and isolation
    double t_rep_hours = 4.0;  // repair

    bool operator==(const ReliabilityConfig&) const = default;
};

struct GridTie {
    double limit_kw = std::numeric_limits<double>::infinity();
    EmissionCoefs import_emission;

    bool operator==(const GridTie&) const = default;
};

enum class WindModel { Rayleigh, Weibull, Deterministic };

const char* to_string(WindModel model);

// Distribution settings used by scenario generation.
struct UncertaintyConfig {
    double load_sigma = 0.05;
    WindModel wind_model = WindModel::Rayleigh;
    double weibull_shape = 4.0;
    std::vector<double> clearness_mean;  // per step; empty means 1.0
    std::vector<double> clearness_std;   // per step; empty means 0.0
    double price_sigma = 0.0;

    bool operator==(const UncertaintyConfig&) const = default;
};

struct PenaltyConfig {
    double unit_limit = 1e4;  // $ per kW^2
    double soc = 1e4;         // $ per kWh^2
    double tie = 1e4;         // $ per kW^2
    double ramp = 1e4;        // $ per kW^2
    double voltage = 1e4;     // $ per pu^2
    double divergence = 1e9;  // fixed
    double v_min = 0.95;
    double v_max = 1.05;
    double terminal_soc_band = 0.05;  // fraction of capacity

    bool operator==(const PenaltyConfig&) const = default;
};

// Derived tree structure, filled by validation.
struct Topology {
    int root_bus = 0;
    std::vector<int> order;             // branch indices, parent before child
    std::vector<int> parent_bus_index;  // per branch index
    std::vector<int> child_bus_index;   // per branch index
    std::vector<int> parent_branch;     // per bus index, -1 for root

    bool operator==(const Topology&) const = default;
};

struct NetworkCase {
    std::string name;
    Base base;
    Horizon horizon;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<DerUnit> ders;
    PriceBook prices;
    // Named hourly series. Required: "wind_speed", "irradiance" (clear-sky W/m^2);
    // optional: "temperature" (degC). Load shapes are referenced by name from buses.
    std::map<std::string, std::vector<double>> profiles;
    Weights weights;
    ReliabilityConfig reliability;
    GridTie grid;
    UncertaintyConfig uncertainty;
    PenaltyConfig penalties;
    Topology topology;

    int bus_index(int bus_id) const;
    int branch_index(int branch_id) const;
    const std::vector<double>& profile(const std::string& key) const;
    // Hourly temperature, defaulting to the PV reference when absent.
    double temperature(int step) const;

    bool operator==(const NetworkCase&) const = default;
};

NetworkCase load_case(const std::filesystem::path& path);

// Parses a case from JSON text. CSV sidecar references resolve against base_dir.
NetworkCase parse_case(const std::string& json_text, const std::filesystem::path& base_dir = {});

// Canonical form: every profile inline.
std::string dump_case(const NetworkCase& c);
void save_case(const NetworkCase& c, const std::filesystem::path& path);

// Checks invariants on an already-built case and fills its topology.
void validate_case(NetworkCase& c);

/// Orders branches so every branch appears after the branch feeding its
/// parent bus. Children are visited by ascending branch id. Throws
/// TopologyError on cycles or disconnected buses.
std::vector<int> validate_radial(const NetworkCase& c);

// Bus ids whose path to the root passes through the branch, sorted ascending.
std::vector<int> subtree_of(const NetworkCase& c, int branch_id);

}  // namespace microdispatch::grid
