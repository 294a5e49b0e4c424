#pragma once

#include "microdispatch/grid_model.hpp"

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <variant>
#include <vector>

namespace microdispatch::uncertainty {

struct Normal {
    double mu = 0.0;
    double sigma = 1.0;
};

struct Beta {
    double alpha = 1.0;
    double beta = 1.0;
};

// Wind-resource form: f(v) = 2v/c^2 * exp(-(v/c)^2), mean c*sqrt(pi)/2.
struct Rayleigh {
    double c = 1.0;
};

struct Weibull {
    double shape = 2.0;
    double scale = 1.0;
};

using Pdf = std::variant<Normal, Beta, Rayleigh, Weibull>;

double pdf_eval(const Pdf& pdf, double x);
double cdf_eval(const Pdf& pdf, double x);

double normal_cdf(double z);

struct BetaShape {
    double alpha = 0.0;
    double beta = 0.0;
};

// Method of moments; throws InfeasibleMoments unless 0 < mu < 1 and sigma^2 < mu(1-mu).
BetaShape beta_params_from_moments(double mu, double sigma);

struct Level {
    double value = 0.0;
    double probability = 0.0;
};

/// Splits Normal(mu, sigma) into n_levels bands of width sigma centred on
/// mu + j*sigma; the outer bands absorb the tails. n_levels must be odd and >= 3.
std::vector<Level> discretize_normal(double mu, double sigma, int n_levels);

struct Scenario {
    int id = 0;
    double probability = 0.0;
    std::vector<double> load_mult;
    std::vector<double> wind_ms;
    std::vector<double> irradiance_wm2;
    std::vector<double> price_mult;

    bool operator==(const Scenario&) const = default;
};

struct ScenarioSet {
    std::vector<Scenario> scenarios;
    std::uint64_t seed = 0;

    int steps() const {
        return scenarios.empty() ? 0 : static_cast<int>(scenarios.front().load_mult.size());
    }
    double total_probability() const;

    bool operator==(const ScenarioSet&) const = default;
};

// Per-quantity sampling settings, normally taken from the case.
struct ScenarioModel {
    double load_sigma = 0.05;
    grid::WindModel wind_model = grid::WindModel::Rayleigh;
    double weibull_shape = 4.0;
    std::vector<double> clearness_mean;
    std::vector<double> clearness_std;
    double price_sigma = 0.0;

    static ScenarioModel from_case(const grid::NetworkCase& c);
};

// Forecast realisation: unit multipliers, forecast wind, mean clearness.
Scenario forecast_scenario(const grid::NetworkCase& c, const ScenarioModel& model);
ScenarioSet forecast_set(const grid::NetworkCase& c);

ScenarioSet generate_scenarios(const grid::NetworkCase& c, const ScenarioModel& model, int n,
                               std::uint64_t seed);
ScenarioSet generate_scenarios(const grid::NetworkCase& c, int n, std::uint64_t seed);

/// Backward reduction. Repeatedly removes the scenario with the smallest
/// probability * distance to its nearest surviving neighbour and hands its
/// probability to that neighbour. Distances are Euclidean over the
/// concatenated hourly arrays, each quantity scaled by its population standard
/// deviation. Ties go to the lowest scenario id.
ScenarioSet reduce_scenarios(const ScenarioSet& set, int target);

// Scaled distance matrix used by the reduction, row-major n x n.
std::vector<double> scenario_distances(const ScenarioSet& set);

struct FidelityReport {
    struct Quantity {
        double max_abs_error = 0.0;
        double mean_abs_error = 0.0;
        double max_rel_error = 0.0;
    };
    Quantity load;
    Quantity wind;
    Quantity irradiance;
    Quantity price;
    // Coefficient of variation of the hourly mean-load estimator, max over hours.
    double cv_original = 0.0;
    double cv_reduced = 0.0;
};

FidelityReport reduction_fidelity(const ScenarioSet& original, const ScenarioSet& reduced);

// CSV with columns scenario_id,probability,hour,load_mult,wind_ms,irradiance_wm2,price_mult.
void write_scenarios_csv(const ScenarioSet& set, std::ostream& out);
std::string scenarios_csv(const ScenarioSet& set);
ScenarioSet read_scenarios_csv(std::istream& in);

}  // namespace microdispatch::uncertainty
