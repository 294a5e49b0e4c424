#include "support.hpp"

#include "microdispatch/io_util.hpp"

#include <algorithm>
#include <complex>
#include <functional>
#include <map>

namespace testing {

namespace fs = std::filesystem;
using namespace microdispatch;

fs::path data_path(const std::string& file) { return fs::path(MICRODISPATCH_DATA_DIR) / file; }

grid::NetworkCase load_fixture(const std::string& file) { return grid::load_case(data_path(file)); }

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("microdispatch_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

grid::NetworkCase chain_case(int n_buses, double r_pu, double x_pu) {
    grid::NetworkCase c;
    c.name = "chain";
    c.base.s_base_kva = 1000.0;
    c.base.v_base_kv = 11.0;
    c.base.impedance_unit = grid::ImpedanceUnit::PerUnit;
    c.horizon.steps = 1;
    for (int b = 0; b < n_buses; ++b) {
        c.buses.push_back({b, 0.0, 0.0, "load"});
    }
    for (int b = 1; b < n_buses; ++b) {
        grid::Branch br;
        br.id = b;
        br.from_bus = b - 1;
        br.to_bus = b;
        br.r = r_pu;
        br.x = x_pu;
        c.branches.push_back(br);
    }
    c.prices.grid_energy_price = {0.1};
    c.profiles["load"] = {1.0};
    c.profiles["wind_speed"] = {0.0};
    c.profiles["irradiance"] = {0.0};
    grid::validate_case(c);
    return c;
}

powerflow::InjectionVector peak_load_injections(const grid::NetworkCase& c) {
    powerflow::InjectionVector inj;
    for (const auto& b : c.buses) {
        inj.p_kw.push_back(-b.load_p_peak);
        inj.q_kvar.push_back(-b.load_q_peak);
    }
    return inj;
}

OracleFlow reference_sweep(const grid::NetworkCase& c, const powerflow::InjectionVector& inj, double tol) {
    using cd = std::complex<double>;
    const std::size_t n = c.buses.size();
    const double z_base = c.base.impedance_unit == grid::ImpedanceUnit::Ohm ? c.base.z_base_ohm() : 1.0;
    const double s_base = c.base.s_base_kva;

    std::map<int, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) {
        index[c.buses[i].id] = i;
    }
    // Parent lookup by walking edges from the root; direction follows the tree, not the data.
    std::vector<std::vector<std::pair<std::size_t, cd>>> adj(n);
    for (const auto& br : c.branches) {
        const cd z(br.r / z_base, br.x / z_base);
        adj[index[br.from_bus]].push_back({index[br.to_bus], z});
        adj[index[br.to_bus]].push_back({index[br.from_bus], z});
    }
    const std::size_t root = index[c.topology.root_bus];
    std::vector<std::ptrdiff_t> parent(n, -1);
    std::vector<cd> z_up(n);
    std::vector<std::size_t> bfs{root};
    std::vector<bool> seen(n, false);
    seen[root] = true;
    for (std::size_t k = 0; k < bfs.size(); ++k) {
        for (auto [j, z] : adj[bfs[k]]) {
            if (!seen[j]) {
                seen[j] = true;
                parent[j] = static_cast<std::ptrdiff_t>(bfs[k]);
                z_up[j] = z;
                bfs.push_back(j);
            }
        }
    }

    const cd v0(c.base.slack_voltage_pu, 0.0);
    std::vector<cd> v(n, v0);
    std::vector<cd> s_load(n);
    for (std::size_t i = 0; i < n; ++i) {
        s_load[i] = cd(-inj.p_kw[i], -inj.q_kvar[i]) / s_base;
    }
    std::vector<cd> current(n);
    for (int it = 0; it < 1000; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            current[i] = std::conj(s_load[i] / v[i]);
        }
        current[root] = 0.0;
        for (auto k = bfs.size(); k-- > 1;) {
            const std::size_t j = bfs[k];
            current[static_cast<std::size_t>(parent[j])] += current[j];
        }
        // current[j] now holds the current through the branch feeding j.
        double change = 0.0;
        for (std::size_t k = 1; k < bfs.size(); ++k) {
            const std::size_t j = bfs[k];
            const cd updated = v[static_cast<std::size_t>(parent[j])] - z_up[j] * current[j];
            change = std::max(change, std::abs(updated - v[j]));
            v[j] = updated;
        }
        if (change < tol) {
            break;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        current[i] = std::conj(s_load[i] / v[i]);
    }
    current[root] = 0.0;
    for (auto k = bfs.size(); k-- > 1;) {
        const std::size_t j = bfs[k];
        current[static_cast<std::size_t>(parent[j])] += current[j];
    }
    OracleFlow out;
    out.v_mag.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.v_mag[i] = std::abs(v[i]);
    }
    for (std::size_t k = 1; k < bfs.size(); ++k) {
        const std::size_t j = bfs[k];
        out.loss_kw += std::norm(current[j]) * z_up[j].real() * s_base;
    }
    double load = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i != root) {
            load += -inj.p_kw[i];
        }
    }
    out.slack_p_kw = load + out.loss_kw - inj.p_kw[root];
    return out;
}

uncertainty::ScenarioSet scalar_set(const std::vector<double>& load, const std::vector<double>& probs) {
    uncertainty::ScenarioSet set;
    for (std::size_t i = 0; i < load.size(); ++i) {
        uncertainty::Scenario s;
        s.id = static_cast<int>(i);
        s.probability = probs.empty() ? 1.0 / static_cast<double>(load.size()) : probs[i];
        s.load_mult = {load[i]};
        s.wind_ms = {5.0};
        s.irradiance_wm2 = {0.0};
        s.price_mult = {1.0};
        set.scenarios.push_back(s);
    }
    return set;
}

std::string read_file(const fs::path& p) { return io::read_text_file(p); }

std::vector<std::pair<std::string, std::string>> snapshot(const fs::path& dir) {
    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) {
            files.emplace_back(fs::relative(e.path(), dir).generic_string(), read_file(e.path()));
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

}  // namespace testing
