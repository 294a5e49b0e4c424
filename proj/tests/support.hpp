#pragma once

#include "microdispatch/grid_model.hpp"
#include "microdispatch/powerflow.hpp"
#include "microdispatch/uncertainty.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace testing {

std::filesystem::path data_path(const std::string& file);
microdispatch::grid::NetworkCase load_fixture(const std::string& file);

// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

// Chain 0-1-...-(n-1) in per-unit with equal branches; flat profiles.
microdispatch::grid::NetworkCase chain_case(int n_buses, double r_pu, double x_pu);

// Peak loads as negative injections.
microdispatch::powerflow::InjectionVector peak_load_injections(const microdispatch::grid::NetworkCase& c);

struct OracleFlow {
    std::vector<double> v_mag;  // per bus index
    double loss_kw = 0.0;
    double slack_p_kw = 0.0;
};

/// Textbook complex-voltage backward/forward sweep: currents from conj(S/V),
/// branch currents summed leaf to root, voltages updated root to leaf. Shares
/// nothing with the library solver beyond the case structure.
OracleFlow reference_sweep(const microdispatch::grid::NetworkCase& c,
                           const microdispatch::powerflow::InjectionVector& inj, double tol = 1e-13);

// One-hour scenarios over a single scalar per quantity, equal probabilities unless given.
microdispatch::uncertainty::ScenarioSet scalar_set(const std::vector<double>& load,
                                                   const std::vector<double>& probs = {});

std::string read_file(const std::filesystem::path& p);
// Map of relative path -> contents for every regular file below dir.
std::vector<std::pair<std::string, std::string>> snapshot(const std::filesystem::path& dir);

}  // namespace testing
