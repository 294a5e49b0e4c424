#pragma once

#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace microdispatch::coa {

struct Bounds {
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t dimension() const { return lo.size(); }
    void clamp(std::vector<double>& x) const;
    bool contains(const std::vector<double>& x) const;
};

struct Habitat {
    std::vector<double> position;
    double fitness = 0.0;
    int n_eggs = 0;
};

struct CoaParams {
    int n_initial = 20;
    int min_eggs = 2;
    int max_eggs = 4;
    int max_population = 50;
    double elr_alpha = 1.0;
    double kill_fraction = 0.1;  // share of each generation's eggs discarded
    double migration = 0.9;      // fraction of the way toward the goal
    double deviation = std::numbers::pi / 6.0;
    int n_clusters = 3;
    int max_iterations = 100;
    long long max_evaluations = 0;  // 0 = unlimited
    int convergence_window = 10;
    double tolerance = 1e-9;  // relative improvement over the window
    std::uint64_t seed = 1;
    // Optional Cauchy-distributed step noise during migration, relative to the
    // box width. 0 disables it.
    double heavy_tail_scale = 0.0;
    int threads = 1;
};

struct IterationStats {
    int iteration = 0;
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
    long long evaluations = 0;
};

struct OptResult {
    std::vector<double> best_position;
    double best_fitness = 0.0;
    std::vector<IterationStats> history;
    long long evaluations = 0;
    bool converged = false;
};

using Objective = std::function<double(const std::vector<double>&)>;

// Non-finite objective values are replaced by this so ranking stays total.
inline constexpr double kInvalidFitness = 1e12;

/// Egg laying radius per dimension:
/// alpha * (eggs / total_eggs) * (hi - lo), clipped to [0, hi - lo].
std::vector<double> elr(int eggs, int total_eggs, const Bounds& bounds, double alpha);

// n_eggs points uniform in [pos - radius, pos + radius] per dimension, clamped.
std::vector<std::vector<double>> lay_eggs(const Habitat& h, const std::vector<double>& radius,
                                          const Bounds& bounds, std::mt19937_64& rng);

/// Drops the worst kill_fraction of `eggs` (rounded down), merges the rest
/// into the population and keeps the max_population fittest. Stable: equal
/// fitness keeps insertion order, population before eggs.
std::vector<Habitat> survival_selection(std::vector<Habitat> population, std::vector<Habitat> eggs,
                                        int max_population, double kill_fraction);

struct MigrationResult {
    std::vector<Habitat> population;
    std::vector<double> goal;
    bool moved = false;
};

/// k-means (10 Lloyd iterations, centroids seeded from distinct random
/// habitats) groups the population; the goal is the centroid of the cluster
/// with the lowest mean fitness. Each habitat moves (migration + d) of the way
/// toward the goal per dimension, d ~ U(-deviation, deviation). Habitats listed
/// in `pinned` stay put. An all-identical population is returned unchanged.
MigrationResult cluster_and_migrate(const std::vector<Habitat>& population, int n_clusters,
                                    double migration, double deviation, const Bounds& bounds,
                                    std::mt19937_64& rng, const std::vector<bool>& pinned = {},
                                    double heavy_tail_scale = 0.0);

OptResult optimize(const Objective& objective, const Bounds& bounds, const CoaParams& params);

}  // namespace microdispatch::coa
