#include "microdispatch/grid_model.hpp"

#include "microdispatch/errors.hpp"
#include "microdispatch/io_util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace microdispatch::grid {

using nlohmann::json;

const char* to_string(DerKind kind) {
    switch (kind) {
        case DerKind::WT: return "WT";
        case DerKind::PV: return "PV";
        case DerKind::CHP: return "CHP";
        case DerKind::ESS: return "ESS";
    }
    return "?";
}

const char* to_string(WindModel model) {
    switch (model) {
        case WindModel::Rayleigh: return "rayleigh";
        case WindModel::Weibull: return "weibull";
        case WindModel::Deterministic: return "deterministic";
    }
    return "?";
}

int NetworkCase::bus_index(int bus_id) const {
    for (std::size_t i = 0; i < buses.size(); ++i) {
        if (buses[i].id == bus_id) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

int NetworkCase::branch_index(int branch_id) const {
    for (std::size_t i = 0; i < branches.size(); ++i) {
        if (branches[i].id == branch_id) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

const std::vector<double>& NetworkCase::profile(const std::string& key) const {
    auto it = profiles.find(key);
    if (it == profiles.end()) {
        throw MissingProfile("profile '" + key + "' not present in case");
    }
    return it->second;
}

double NetworkCase::temperature(int step) const {
    auto it = profiles.find("temperature");
    if (it == profiles.end()) {
        return 25.0;
    }
    return it->second[static_cast<std::size_t>(step)];
}

namespace {

// JSON access with field paths in every error message.
class Reader {
public:
    Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) {
            throw ParseError(path_ + ": expected an object");
        }
    }

    void allow_only(std::initializer_list<const char*> keys) const {
        for (auto it = node_.begin(); it != node_.end(); ++it) {
            bool known = false;
            for (const char* k : keys) {
                known = known || it.key() == k;
            }
            if (!known) {
                throw ParseError(child(it.key()) + ": unknown field");
            }
        }
    }

    bool has(const char* key) const { return node_.contains(key) && !node_.at(key).is_null(); }

    double number(const char* key) const {
        if (!has(key)) {
            throw ParseError(child(key) + ": required field missing");
        }
        const json& v = node_.at(key);
        if (!v.is_number()) {
            throw ParseError(child(key) + ": expected a number");
        }
        return v.get<double>();
    }

    double number(const char* key, double fallback) const {
        return has(key) ? number(key) : fallback;
    }

    int integer(const char* key) const {
        if (!has(key)) {
            throw ParseError(child(key) + ": required field missing");
        }
        const json& v = node_.at(key);
        if (!v.is_number_integer()) {
            throw ParseError(child(key) + ": expected an integer");
        }
        return v.get<int>();
    }

    int integer(const char* key, int fallback) const { return has(key) ? integer(key) : fallback; }

    bool boolean(const char* key, bool fallback) const {
        if (!has(key)) {
            return fallback;
        }
        const json& v = node_.at(key);
        if (!v.is_boolean()) {
            throw ParseError(child(key) + ": expected true/false");
        }
        return v.get<bool>();
    }

    std::string string(const char* key) const {
        if (!has(key)) {
            throw ParseError(child(key) + ": required field missing");
        }
        const json& v = node_.at(key);
        if (!v.is_string()) {
            throw ParseError(child(key) + ": expected a string");
        }
        return v.get<std::string>();
    }

    std::string string(const char* key, const std::string& fallback) const {
        return has(key) ? string(key) : fallback;
    }

    Reader object(const char* key) const {
        if (!has(key)) {
            throw ParseError(child(key) + ": required field missing");
        }
        return Reader(node_.at(key), child(key));
    }

    const json& raw(const char* key) const { return node_.at(key); }
    std::string child(const std::string& key) const { return path_ + "." + key; }
    const std::string& path() const { return path_; }

private:
    const json& node_;
    std::string path_;
};

// A series is either an inline array or {"csv": "file.csv"}.
std::vector<double> read_series(const json& node, const std::string& path, int steps,
                                const std::filesystem::path& base_dir) {
    if (node.is_array()) {
        std::vector<double> out;
        out.reserve(node.size());
        for (std::size_t i = 0; i < node.size(); ++i) {
            if (!node[i].is_number()) {
                throw ParseError(path + "[" + std::to_string(i) + "]: expected a number");
            }
            out.push_back(node[i].get<double>());
        }
        return out;
    }
    if (node.is_object() && node.contains("csv") && node.at("csv").is_string()) {
        return io::read_profile_csv(base_dir / node.at("csv").get<std::string>(), steps);
    }
    throw ParseError(path + ": expected an array or {\"csv\": file}");
}

EmissionCoefs read_emission(const Reader& r) {
    r.allow_only({"alpha", "beta", "gamma", "zeta", "lambda"});
    return {r.number("alpha", 0.0), r.number("beta", 0.0), r.number("gamma", 0.0),
            r.number("zeta", 0.0), r.number("lambda", 0.0)};
}

DerKind parse_kind(const std::string& s, const std::string& path) {
    if (s == "WT") return DerKind::WT;
    if (s == "PV") return DerKind::PV;
    if (s == "CHP") return DerKind::CHP;
    if (s == "ESS") return DerKind::ESS;
    throw ParseError(path + ": unknown DER kind '" + s + "'");
}

DerUnit read_der(const Reader& r, std::size_t index) {
    r.allow_only({"name", "kind", "bus", "p_min", "p_max", "om_rate", "power_factor", "emission",
                  "params"});
    DerUnit u;
    u.kind = parse_kind(r.string("kind"), r.child("kind"));
    u.name = r.string("name", std::string(to_string(u.kind)) + std::to_string(index));
    u.bus = r.integer("bus");
    u.om_rate = r.number("om_rate", 0.0);
    u.power_factor = r.number("power_factor", 1.0);
    if (r.has("emission")) {
        u.emission = read_emission(r.object("emission"));
    }
    const Reader p = r.object("params");
    switch (u.kind) {
        case DerKind::WT: {
            p.allow_only({"p_rate", "v_ci", "v_r", "v_co"});
            der::WtParams w{p.number("p_rate"), p.number("v_ci"), p.number("v_r"), p.number("v_co")};
            u.params = w;
            u.p_min = r.number("p_min", 0.0);
            u.p_max = r.number("p_max", w.p_rate);
            break;
        }
        case DerKind::PV: {
            p.allow_only({"p_stc", "g_stc", "k", "t_ref"});
            der::PvParams v{p.number("p_stc"), p.number("g_stc", 1000.0), p.number("k", 0.0),
                            p.number("t_ref", 25.0)};
            u.params = v;
            u.p_min = r.number("p_min", 0.0);
            u.p_max = r.number("p_max", v.p_stc);
            break;
        }
        case DerKind::CHP: {
            p.allow_only({"theta", "rho", "gamma", "efficiency", "heat_to_electric", "ramp_limit"});
            der::ChpParams c;
            c.theta = p.number("theta", 0.0);
            c.rho = p.number("rho", 0.0);
            c.gamma = p.number("gamma", 0.0);
            c.efficiency = p.number("efficiency");
            c.heat_to_electric = p.number("heat_to_electric", 0.0);
            if (p.has("ramp_limit")) {
                c.ramp_limit = p.number("ramp_limit");
            }
            u.p_min = r.number("p_min");
            u.p_max = r.number("p_max");
            c.p_min = u.p_min;
            c.p_max = u.p_max;
            u.params = c;
            break;
        }
        case DerKind::ESS: {
            p.allow_only({"capacity", "soc_min", "soc_max", "soc_init", "p_ch_max", "p_dis_max",
                          "eta_ch", "eta_dis"});
            der::EssParams e;
            e.capacity = p.number("capacity");
            e.soc_min = p.number("soc_min", 0.0);
            e.soc_max = p.number("soc_max", e.capacity);
            e.soc_init = p.number("soc_init", e.soc_min);
            e.p_ch_max = p.number("p_ch_max");
            e.p_dis_max = p.number("p_dis_max");
            e.eta_ch = p.number("eta_ch", 1.0);
            e.eta_dis = p.number("eta_dis", 1.0);
            u.params = e;
            u.p_min = r.number("p_min", -e.p_ch_max);
            u.p_max = r.number("p_max", e.p_dis_max);
            break;
        }
    }
    return u;
}

WindModel parse_wind_model(const std::string& s, const std::string& path) {
    if (s == "rayleigh") return WindModel::Rayleigh;
    if (s == "weibull") return WindModel::Weibull;
    if (s == "deterministic") return WindModel::Deterministic;
    throw ParseError(path + ": unknown wind model '" + s + "'");
}

// Accepts a scalar (broadcast over the horizon) or a series.
std::vector<double> read_hourly(const Reader& r, const char* key, int steps,
                                const std::filesystem::path& base_dir) {
    const json& node = r.raw(key);
    if (node.is_number()) {
        return std::vector<double>(static_cast<std::size_t>(steps), node.get<double>());
    }
    return read_series(node, r.child(key), steps, base_dir);
}

void require(bool ok, const std::string& path, const std::string& msg) {
    if (!ok) {
        throw ValidationError(path, msg);
    }
}

bool finite(double v) { return std::isfinite(v); }

void validate_der(const DerUnit& u, const std::string& path) {
    require(u.p_min <= u.p_max, path, "p_min must not exceed p_max");
    require(u.om_rate >= 0.0, path + ".om_rate", "must be >= 0");
    require(u.power_factor > 0.0 && u.power_factor <= 1.0, path + ".power_factor",
            "must be in (0, 1]");
    const auto& e = u.emission;
    require(finite(e.alpha) && finite(e.beta) && finite(e.gamma) && finite(e.zeta) &&
                finite(e.lambda),
            path + ".emission", "coefficients must be finite");
    const std::string pp = path + ".params";
    switch (u.kind) {
        case DerKind::WT: {
            const auto& w = u.wt();
            require(w.p_rate > 0.0, pp + ".p_rate", "must be > 0");
            require(0.0 < w.v_ci && w.v_ci < w.v_r && w.v_r < w.v_co, pp,
                    "need 0 < v_ci < v_r < v_co");
            break;
        }
        case DerKind::PV: {
            const auto& v = u.pv();
            require(v.p_stc > 0.0, pp + ".p_stc", "must be > 0");
            require(v.g_stc > 0.0, pp + ".g_stc", "must be > 0");
            break;
        }
        case DerKind::CHP: {
            const auto& c = u.chp();
            require(c.efficiency > 0.0 && c.efficiency <= 1.0, pp + ".efficiency",
                    "must be in (0, 1]");
            require(u.p_min >= 0.0, path + ".p_min", "must be >= 0 for CHP");
            // Quadratic fuel rate: minimum over the interval is at an end or the vertex.
            auto rate = [&](double p) { return c.theta * p * p + c.rho * p + c.gamma; };
            double lowest = std::min(rate(u.p_min), rate(u.p_max));
            if (c.theta > 0.0) {
                const double vertex = -c.rho / (2.0 * c.theta);
                if (vertex > u.p_min && vertex < u.p_max) {
                    lowest = std::min(lowest, rate(vertex));
                }
            }
            require(lowest >= 0.0, pp, "fuel rate must be nonnegative over [p_min, p_max]");
            if (c.ramp_limit) {
                require(*c.ramp_limit > 0.0, pp + ".ramp_limit", "must be > 0");
            }
            break;
        }
        case DerKind::ESS: {
            const auto& e = u.ess();
            require(0.0 <= e.soc_min && e.soc_min <= e.soc_init && e.soc_init <= e.soc_max &&
                        e.soc_max <= e.capacity,
                    pp, "need 0 <= soc_min <= soc_init <= soc_max <= capacity");
            require(e.p_ch_max >= 0.0 && e.p_dis_max >= 0.0, pp, "rate limits must be >= 0");
            require(e.eta_ch > 0.0 && e.eta_ch <= 1.0 && e.eta_dis > 0.0 && e.eta_dis <= 1.0, pp,
                    "efficiencies must be in (0, 1]");
            break;
        }
    }
}

Topology build_topology(const NetworkCase& c) {
    const std::size_t nb = c.buses.size();
    Topology t;

    int root = c.base.root_bus;
    if (root < 0) {
        std::vector<bool> is_target(nb, false);
        for (const auto& br : c.branches) {
            is_target[static_cast<std::size_t>(c.bus_index(br.to_bus))] = true;
        }
        int candidates = 0;
        for (std::size_t i = 0; i < nb; ++i) {
            if (!is_target[i]) {
                root = c.buses[i].id;
                ++candidates;
            }
        }
        if (candidates != 1) {
            throw TopologyError("cannot identify a unique root bus (found " +
                                std::to_string(candidates) + " buses that feed no branch)");
        }
    } else if (c.bus_index(root) < 0) {
        throw ValidationError("base.root_bus", "unknown bus id");
    }
    t.root_bus = root;

    if (c.branches.size() + 1 != nb) {
        throw TopologyError("radial network needs |branches| = |buses| - 1 (have " +
                            std::to_string(c.branches.size()) + " branches, " +
                            std::to_string(nb) + " buses)");
    }

    // Undirected adjacency, each list sorted by branch id.
    std::vector<std::vector<int>> incident(nb);
    for (std::size_t k = 0; k < c.branches.size(); ++k) {
        incident[static_cast<std::size_t>(c.bus_index(c.branches[k].from_bus))].push_back(
            static_cast<int>(k));
        incident[static_cast<std::size_t>(c.bus_index(c.branches[k].to_bus))].push_back(
            static_cast<int>(k));
    }
    for (auto& lst : incident) {
        std::sort(lst.begin(), lst.end(), [&](int a, int b) {
            return c.branches[static_cast<std::size_t>(a)].id <
                   c.branches[static_cast<std::size_t>(b)].id;
        });
    }

    t.parent_branch.assign(nb, -1);
    t.parent_bus_index.assign(c.branches.size(), -1);
    t.child_bus_index.assign(c.branches.size(), -1);
    std::vector<bool> visited(nb, false);
    std::vector<bool> used(c.branches.size(), false);

    // Iterative DFS preorder; pushing children in reverse keeps ascending id order.
    const int root_idx = c.bus_index(root);
    std::vector<int> stack{root_idx};
    visited[static_cast<std::size_t>(root_idx)] = true;
    while (!stack.empty()) {
        const int bus = stack.back();
        stack.pop_back();
        const int via = t.parent_branch[static_cast<std::size_t>(bus)];
        if (via >= 0) {
            t.order.push_back(via);
        }
        const auto& lst = incident[static_cast<std::size_t>(bus)];
        for (auto it = lst.rbegin(); it != lst.rend(); ++it) {
            const int k = *it;
            if (k == via) {
                continue;
            }
            const auto& br = c.branches[static_cast<std::size_t>(k)];
            const int other = c.bus_index(br.from_bus) == bus ? c.bus_index(br.to_bus)
                                                              : c.bus_index(br.from_bus);
            if (visited[static_cast<std::size_t>(other)] || used[static_cast<std::size_t>(k)]) {
                throw TopologyError("cycle through branch " + std::to_string(br.id));
            }
            used[static_cast<std::size_t>(k)] = true;
            visited[static_cast<std::size_t>(other)] = true;
            t.parent_branch[static_cast<std::size_t>(other)] = k;
            t.parent_bus_index[static_cast<std::size_t>(k)] = bus;
            t.child_bus_index[static_cast<std::size_t>(k)] = other;
            stack.push_back(other);
        }
    }
    for (std::size_t i = 0; i < nb; ++i) {
        if (!visited[i]) {
            throw TopologyError("bus " + std::to_string(c.buses[i].id) +
                                " is not connected to the root");
        }
    }
    return t;
}

json emission_json(const EmissionCoefs& e) {
    return {{"alpha", e.alpha}, {"beta", e.beta}, {"gamma", e.gamma}, {"zeta", e.zeta},
            {"lambda", e.lambda}};
}

}  // namespace

void validate_case(NetworkCase& c) {
    const int steps = c.horizon.steps;
    require(steps >= 1, "horizon.steps", "must be >= 1");
    require(c.horizon.dt_hours > 0.0, "horizon.dt_hours", "must be > 0");
    require(c.base.s_base_kva > 0.0, "base.s_base_kva", "must be > 0");
    require(c.base.v_base_kv > 0.0, "base.v_base_kv", "must be > 0");
    require(c.base.slack_voltage_pu > 0.0, "base.slack_voltage_pu", "must be > 0");
    require(!c.buses.empty(), "buses", "at least one bus required");

    for (const auto& [name, series] : c.profiles) {
        require(series.size() == static_cast<std::size_t>(steps), "profiles." + name,
                "must have exactly " + std::to_string(steps) + " entries");
        for (double v : series) {
            require(finite(v), "profiles." + name, "values must be finite");
        }
    }
    for (const char* key : {"wind_speed", "irradiance"}) {
        if (!c.profiles.contains(key)) {
            throw MissingProfile(std::string("profiles.") + key + ": required profile missing");
        }
        for (double v : c.profiles.at(key)) {
            require(v >= 0.0, std::string("profiles.") + key, "values must be >= 0");
        }
    }

    std::set<int> bus_ids;
    for (std::size_t i = 0; i < c.buses.size(); ++i) {
        const auto& b = c.buses[i];
        const std::string path = "buses[" + std::to_string(i) + "]";
        require(bus_ids.insert(b.id).second, path + ".id", "duplicate bus id " + std::to_string(b.id));
        require(b.load_p_peak >= 0.0, path + ".load_p_peak", "must be >= 0");
        require(b.load_q_peak >= 0.0, path + ".load_q_peak", "must be >= 0");
        if (b.load_p_peak > 0.0 || b.load_q_peak > 0.0) {
            require(c.profiles.contains(b.load_shape_ref), path + ".load_shape_ref",
                    "unknown profile '" + b.load_shape_ref + "'");
            for (double v : c.profiles.at(b.load_shape_ref)) {
                require(v >= 0.0, "profiles." + b.load_shape_ref, "load shape must be >= 0");
            }
        }
    }

    std::set<int> branch_ids;
    for (std::size_t i = 0; i < c.branches.size(); ++i) {
        const auto& br = c.branches[i];
        const std::string path = "branches[" + std::to_string(i) + "]";
        require(branch_ids.insert(br.id).second, path + ".id",
                "duplicate branch id " + std::to_string(br.id));
        require(bus_ids.contains(br.from_bus), path + ".from_bus", "unknown bus id");
        require(bus_ids.contains(br.to_bus), path + ".to_bus", "unknown bus id");
        require(br.from_bus != br.to_bus, path, "self loop");
        require(br.r >= 0.0, path + ".r", "must be >= 0");
        require(br.x >= 0.0, path + ".x", "must be >= 0");
        require(br.length > 0.0, path + ".length", "must be > 0");
        require(br.failure_rate >= 0.0, path + ".failure_rate", "must be >= 0");
    }

    for (std::size_t i = 0; i < c.ders.size(); ++i) {
        const std::string path = "ders[" + std::to_string(i) + "]";
        require(bus_ids.contains(c.ders[i].bus), path + ".bus", "unknown bus id");
        validate_der(c.ders[i], path);
    }

    require(c.prices.grid_energy_price.size() == static_cast<std::size_t>(steps),
            "prices.grid_energy_price", "must have exactly " + std::to_string(steps) + " entries");
    for (double v : c.prices.grid_energy_price) {
        require(v >= 0.0, "prices.grid_energy_price", "prices must be >= 0");
    }
    const auto& pb = c.prices;
    require(pb.gas_price >= 0.0 && pb.heat_credit >= 0.0 && pb.loss_price >= 0.0 &&
                pb.interruption_price >= 0.0 && pb.emission_price >= 0.0,
            "prices", "all prices must be >= 0");

    require(c.weights.h1 >= 0.0 && c.weights.h2 >= 0.0 && c.weights.hc >= 0.0, "weights",
            "weights must be >= 0");
    require(c.reliability.t_res_hours >= 0.0 && c.reliability.t_rep_hours >= 0.0, "reliability",
            "durations must be >= 0");
    require(c.grid.limit_kw > 0.0, "grid.limit_kw", "must be > 0");

    const auto& u = c.uncertainty;
    require(u.load_sigma >= 0.0, "uncertainty.load_sigma", "must be >= 0");
    require(u.price_sigma >= 0.0, "uncertainty.price_sigma", "must be >= 0");
    require(u.weibull_shape > 0.0, "uncertainty.weibull_shape", "must be > 0");
    require(u.clearness_mean.empty() || u.clearness_mean.size() == static_cast<std::size_t>(steps),
            "uncertainty.clearness_mean", "must be empty or have one entry per step");
    require(u.clearness_std.empty() || u.clearness_std.size() == static_cast<std::size_t>(steps),
            "uncertainty.clearness_std", "must be empty or have one entry per step");
    for (int t = 0; t < steps; ++t) {
        const double mu = u.clearness_mean.empty() ? 1.0 : u.clearness_mean[static_cast<std::size_t>(t)];
        const double sd = u.clearness_std.empty() ? 0.0 : u.clearness_std[static_cast<std::size_t>(t)];
        const std::string path = "uncertainty[" + std::to_string(t) + "]";
        require(mu >= 0.0 && mu <= 1.0, path, "clearness mean must be in [0, 1]");
        require(sd >= 0.0, path, "clearness std must be >= 0");
        require(sd == 0.0 || sd * sd < mu * (1.0 - mu), path,
                "clearness variance must be below mean*(1-mean)");
    }

    const auto& pen = c.penalties;
    require(pen.unit_limit >= 0.0 && pen.soc >= 0.0 && pen.tie >= 0.0 && pen.ramp >= 0.0 &&
                pen.voltage >= 0.0 && pen.divergence >= 0.0 && pen.terminal_soc_band >= 0.0,
            "penalties", "weights must be >= 0");
    require(pen.v_min < pen.v_max, "penalties", "v_min must be below v_max");

    c.topology = build_topology(c);
}

NetworkCase parse_case(const std::string& json_text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed case file: ") + e.what());
    }
    try {
        const Reader root(doc, "$");
        root.allow_only({"name", "base", "horizon", "buses", "branches", "ders", "prices", "profiles",
                         "weights", "reliability", "grid", "uncertainty", "penalties"});
        NetworkCase c;
        c.name = root.string("name", "");

        {
            const Reader b = root.object("base");
            b.allow_only({"s_base_kva", "v_base_kv", "impedance_unit", "slack_voltage_pu",
                          "root_bus"});
            c.base.s_base_kva = b.number("s_base_kva");
            c.base.v_base_kv = b.number("v_base_kv");
            const std::string unit = b.string("impedance_unit", "ohm");
            if (unit == "ohm") {
                c.base.impedance_unit = ImpedanceUnit::Ohm;
            } else if (unit == "pu") {
                c.base.impedance_unit = ImpedanceUnit::PerUnit;
            } else {
                throw ParseError(b.child("impedance_unit") + ": expected 'ohm' or 'pu'");
            }
            c.base.slack_voltage_pu = b.number("slack_voltage_pu", 1.0);
            c.base.root_bus = b.integer("root_bus", -1);
        }
        if (root.has("horizon")) {
            const Reader h = root.object("horizon");
            h.allow_only({"steps", "dt_hours"});
            c.horizon.steps = h.integer("steps", 24);
            c.horizon.dt_hours = h.number("dt_hours", 1.0);
        }
        const int steps = c.horizon.steps;

        const json& buses = doc.at("buses");
        if (!buses.is_array()) {
            throw ParseError("$.buses: expected an array");
        }
        for (std::size_t i = 0; i < buses.size(); ++i) {
            const Reader r(buses[i], "$.buses[" + std::to_string(i) + "]");
            r.allow_only({"id", "load_p_peak", "load_q_peak", "load_shape_ref"});
            c.buses.push_back(
                {r.integer("id"), r.number("load_p_peak", 0.0), r.number("load_q_peak", 0.0),
                 r.string("load_shape_ref", "load")});
        }

        const json& branches = doc.at("branches");
        if (!branches.is_array()) {
            throw ParseError("$.branches: expected an array");
        }
        for (std::size_t i = 0; i < branches.size(); ++i) {
            const Reader r(branches[i], "$.branches[" + std::to_string(i) + "]");
            r.allow_only({"id", "from_bus", "to_bus", "r", "x", "length", "failure_rate",
                          "has_sectionalizer"});
            c.branches.push_back({r.integer("id"), r.integer("from_bus"), r.integer("to_bus"),
                                  r.number("r"), r.number("x"), r.number("length", 1.0),
                                  r.number("failure_rate", 0.0),
                                  r.boolean("has_sectionalizer", true)});
        }

        if (doc.contains("ders")) {
            const json& ders = doc.at("ders");
            if (!ders.is_array()) {
                throw ParseError("$.ders: expected an array");
            }
            for (std::size_t i = 0; i < ders.size(); ++i) {
                c.ders.push_back(read_der(Reader(ders[i], "$.ders[" + std::to_string(i) + "]"), i));
            }
        }

        {
            const Reader p = root.object("prices");
            p.allow_only({"grid_energy_price", "gas_price", "heat_credit", "loss_price",
                          "interruption_price", "emission_price"});
            c.prices.grid_energy_price = read_hourly(p, "grid_energy_price", steps, base_dir);
            c.prices.gas_price = p.number("gas_price", 0.0);
            c.prices.heat_credit = p.number("heat_credit", 0.0);
            c.prices.loss_price = p.number("loss_price", 0.0);
            c.prices.interruption_price = p.number("interruption_price", 0.0);
            c.prices.emission_price = p.number("emission_price", 0.0);
        }

        {
            const json& profiles = doc.at("profiles");
            if (!profiles.is_object()) {
                throw ParseError("$.profiles: expected an object");
            }
            for (auto it = profiles.begin(); it != profiles.end(); ++it) {
                c.profiles[it.key()] = read_series(it.value(), "$.profiles." + it.key(), steps, base_dir);
            }
        }

        if (root.has("weights")) {
            const Reader w = root.object("weights");
            w.allow_only({"h1", "h2", "hc"});
            c.weights = {w.number("h1", 1.0), w.number("h2", 1.0), w.number("hc", 1.0)};
        }
        if (root.has("reliability")) {
            const Reader r = root.object("reliability");
            r.allow_only({"t_res_hours", "t_rep_hours"});
            c.reliability = {r.number("t_res_hours", 1.0), r.number("t_rep_hours", 4.0)};
        }
        if (root.has("grid")) {
            const Reader g = root.object("grid");
            g.allow_only({"limit_kw", "import_emission"});
            c.grid.limit_kw = g.number("limit_kw", std::numeric_limits<double>::infinity());
            if (g.has("import_emission")) {
                c.grid.import_emission = read_emission(g.object("import_emission"));
            }
        }
        if (root.has("uncertainty")) {
            const Reader u = root.object("uncertainty");
            u.allow_only({"load_sigma", "wind_model", "weibull_shape", "clearness_mean",
                          "clearness_std", "price_sigma"});
            c.uncertainty.load_sigma = u.number("load_sigma", 0.05);
            c.uncertainty.wind_model =
                parse_wind_model(u.string("wind_model", "rayleigh"), u.child("wind_model"));
            c.uncertainty.weibull_shape = u.number("weibull_shape", 4.0);
            if (u.has("clearness_mean")) {
                c.uncertainty.clearness_mean = read_hourly(u, "clearness_mean", steps, base_dir);
            }
            if (u.has("clearness_std")) {
                c.uncertainty.clearness_std = read_hourly(u, "clearness_std", steps, base_dir);
            }
            c.uncertainty.price_sigma = u.number("price_sigma", 0.0);
        }
        if (root.has("penalties")) {
            const Reader p = root.object("penalties");
            p.allow_only({"unit_limit", "soc", "tie", "ramp", "voltage", "divergence", "v_min",
                          "v_max", "terminal_soc_band"});
            const PenaltyConfig d;
            c.penalties = {p.number("unit_limit", d.unit_limit), p.number("soc", d.soc),
                           p.number("tie", d.tie),           p.number("ramp", d.ramp),
                           p.number("voltage", d.voltage),   p.number("divergence", d.divergence),
                           p.number("v_min", d.v_min),       p.number("v_max", d.v_max),
                           p.number("terminal_soc_band", d.terminal_soc_band)};
        }

        validate_case(c);
        return c;
    } catch (const json::exception& e) {
        throw ParseError(std::string("case file: ") + e.what());
    }
}

NetworkCase load_case(const std::filesystem::path& path) {
    return parse_case(io::read_text_file(path), path.parent_path());
}

std::string dump_case(const NetworkCase& c) {
    json doc;
    doc["name"] = c.name;
    doc["base"] = {{"s_base_kva", c.base.s_base_kva},
                   {"v_base_kv", c.base.v_base_kv},
                   {"impedance_unit", c.base.impedance_unit == ImpedanceUnit::Ohm ? "ohm" : "pu"},
                   {"slack_voltage_pu", c.base.slack_voltage_pu}};
    if (c.base.root_bus >= 0) {
        doc["base"]["root_bus"] = c.base.root_bus;
    }
    doc["horizon"] = {{"steps", c.horizon.steps}, {"dt_hours", c.horizon.dt_hours}};
    doc["buses"] = json::array();
    for (const auto& b : c.buses) {
        doc["buses"].push_back({{"id", b.id},
                                {"load_p_peak", b.load_p_peak},
                                {"load_q_peak", b.load_q_peak},
                                {"load_shape_ref", b.load_shape_ref}});
    }
    doc["branches"] = json::array();
    for (const auto& br : c.branches) {
        doc["branches"].push_back({{"id", br.id},
                                   {"from_bus", br.from_bus},
                                   {"to_bus", br.to_bus},
                                   {"r", br.r},
                                   {"x", br.x},
                                   {"length", br.length},
                                   {"failure_rate", br.failure_rate},
                                   {"has_sectionalizer", br.has_sectionalizer}});
    }
    doc["ders"] = json::array();
    for (const auto& u : c.ders) {
        json d = {{"name", u.name},         {"kind", to_string(u.kind)},
                  {"bus", u.bus},           {"p_min", u.p_min},
                  {"p_max", u.p_max},       {"om_rate", u.om_rate},
                  {"power_factor", u.power_factor}, {"emission", emission_json(u.emission)}};
        switch (u.kind) {
            case DerKind::WT: {
                const auto& w = u.wt();
                d["params"] = {{"p_rate", w.p_rate}, {"v_ci", w.v_ci}, {"v_r", w.v_r}, {"v_co", w.v_co}};
                break;
            }
            case DerKind::PV: {
                const auto& v = u.pv();
                d["params"] = {{"p_stc", v.p_stc}, {"g_stc", v.g_stc}, {"k", v.k}, {"t_ref", v.t_ref}};
                break;
            }
            case DerKind::CHP: {
                const auto& h = u.chp();
                d["params"] = {{"theta", h.theta},
                               {"rho", h.rho},
                               {"gamma", h.gamma},
                               {"efficiency", h.efficiency},
                               {"heat_to_electric", h.heat_to_electric}};
                if (h.ramp_limit) {
                    d["params"]["ramp_limit"] = *h.ramp_limit;
                }
                break;
            }
            case DerKind::ESS: {
                const auto& e = u.ess();
                d["params"] = {{"capacity", e.capacity}, {"soc_min", e.soc_min},
                               {"soc_max", e.soc_max},   {"soc_init", e.soc_init},
                               {"p_ch_max", e.p_ch_max}, {"p_dis_max", e.p_dis_max},
                               {"eta_ch", e.eta_ch},     {"eta_dis", e.eta_dis}};
                break;
            }
        }
        doc["ders"].push_back(d);
    }
    doc["prices"] = {{"grid_energy_price", c.prices.grid_energy_price},
                     {"gas_price", c.prices.gas_price},
                     {"heat_credit", c.prices.heat_credit},
                     {"loss_price", c.prices.loss_price},
                     {"interruption_price", c.prices.interruption_price},
                     {"emission_price", c.prices.emission_price}};
    doc["profiles"] = json::object();
    for (const auto& [name, series] : c.profiles) {
        doc["profiles"][name] = series;
    }
    doc["weights"] = {{"h1", c.weights.h1}, {"h2", c.weights.h2}, {"hc", c.weights.hc}};
    doc["reliability"] = {{"t_res_hours", c.reliability.t_res_hours},
                          {"t_rep_hours", c.reliability.t_rep_hours}};
    doc["grid"] = {{"import_emission", emission_json(c.grid.import_emission)}};
    if (std::isfinite(c.grid.limit_kw)) {
        doc["grid"]["limit_kw"] = c.grid.limit_kw;
    }
    doc["uncertainty"] = {{"load_sigma", c.uncertainty.load_sigma},
                          {"wind_model", to_string(c.uncertainty.wind_model)},
                          {"weibull_shape", c.uncertainty.weibull_shape},
                          {"price_sigma", c.uncertainty.price_sigma}};
    if (!c.uncertainty.clearness_mean.empty()) {
        doc["uncertainty"]["clearness_mean"] = c.uncertainty.clearness_mean;
    }
    if (!c.uncertainty.clearness_std.empty()) {
        doc["uncertainty"]["clearness_std"] = c.uncertainty.clearness_std;
    }
    const auto& p = c.penalties;
    doc["penalties"] = {{"unit_limit", p.unit_limit}, {"soc", p.soc},
                        {"tie", p.tie},               {"ramp", p.ramp},
                        {"voltage", p.voltage},       {"divergence", p.divergence},
                        {"v_min", p.v_min},           {"v_max", p.v_max},
                        {"terminal_soc_band", p.terminal_soc_band}};
    return doc.dump(2) + "\n";
}

void save_case(const NetworkCase& c, const std::filesystem::path& path) {
    io::write_text_file(path, dump_case(c));
}

std::vector<int> validate_radial(const NetworkCase& c) {
    const Topology t = build_topology(c);
    std::vector<int> ids;
    ids.reserve(t.order.size());
    for (int k : t.order) {
        ids.push_back(c.branches[static_cast<std::size_t>(k)].id);
    }
    return ids;
}

std::vector<int> subtree_of(const NetworkCase& c, int branch_id) {
    const int k = c.branch_index(branch_id);
    if (k < 0) {
        throw UnknownBranch(branch_id);
    }
    const auto& t = c.topology;
    // Walk the parent-before-child order from the branch; a branch is inside the
    // subtree when its parent bus already is.
    std::vector<bool> inside(c.buses.size(), false);
    inside[static_cast<std::size_t>(t.child_bus_index[static_cast<std::size_t>(k)])] = true;
    for (int b : t.order) {
        if (inside[static_cast<std::size_t>(t.parent_bus_index[static_cast<std::size_t>(b)])]) {
            inside[static_cast<std::size_t>(t.child_bus_index[static_cast<std::size_t>(b)])] = true;
        }
    }
    std::vector<int> ids;
    for (std::size_t i = 0; i < inside.size(); ++i) {
        if (inside[i]) {
            ids.push_back(c.buses[i].id);
        }
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

}  // namespace microdispatch::grid
