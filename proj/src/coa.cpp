#include "microdispatch/coa.hpp"

#include "microdispatch/io_util.hpp"
#include "microdispatch/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace microdispatch::coa {

void Bounds::clamp(std::vector<double>& x) const {
    for (std::size_t d = 0; d < x.size(); ++d) {
        x[d] = std::clamp(x[d], lo[d], hi[d]);
    }
}

bool Bounds::contains(const std::vector<double>& x) const {
    for (std::size_t d = 0; d < x.size(); ++d) {
        if (!(x[d] >= lo[d] && x[d] <= hi[d])) {
            return false;
        }
    }
    return x.size() == lo.size();
}

std::vector<double> elr(int eggs, int total_eggs, const Bounds& bounds, double alpha) {
    const double share = total_eggs > 0 ? static_cast<double>(eggs) / total_eggs : 0.0;
    std::vector<double> radius(bounds.dimension());
    for (std::size_t d = 0; d < radius.size(); ++d) {
        const double width = bounds.hi[d] - bounds.lo[d];
        radius[d] = std::clamp(alpha * share * width, 0.0, width);
    }
    return radius;
}

namespace {

double uniform01(std::mt19937_64& rng) {
    // 53 random bits; independent of the standard library's distribution code.
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double a, double b) { return a + (b - a) * uniform01(rng); }

double sq_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double diff = a[d] - b[d];
        s += diff * diff;
    }
    return s;
}

double sanitize(double f) { return std::isfinite(f) ? f : kInvalidFitness; }

}  // namespace

std::vector<std::vector<double>> lay_eggs(const Habitat& h, const std::vector<double>& radius,
                                          const Bounds& bounds, std::mt19937_64& rng) {
    std::vector<std::vector<double>> eggs;
    eggs.reserve(static_cast<std::size_t>(std::max(h.n_eggs, 0)));
    for (int e = 0; e < h.n_eggs; ++e) {
        std::vector<double> x(h.position.size());
        for (std::size_t d = 0; d < x.size(); ++d) {
            x[d] = radius[d] > 0.0 ? uniform(rng, h.position[d] - radius[d], h.position[d] + radius[d])
                                   : h.position[d];
        }
        bounds.clamp(x);
        eggs.push_back(std::move(x));
    }
    return eggs;
}

std::vector<Habitat> survival_selection(std::vector<Habitat> population, std::vector<Habitat> eggs,
                                        int max_population, double kill_fraction) {
    const auto killed = static_cast<std::size_t>(
        std::floor(kill_fraction * static_cast<double>(eggs.size())));
    if (killed > 0) {
        std::stable_sort(eggs.begin(), eggs.end(),
                         [](const Habitat& a, const Habitat& b) { return a.fitness < b.fitness; });
        eggs.resize(eggs.size() - killed);
    }
    std::vector<Habitat> all = std::move(population);
    all.insert(all.end(), std::make_move_iterator(eggs.begin()), std::make_move_iterator(eggs.end()));
    std::stable_sort(all.begin(), all.end(),
                     [](const Habitat& a, const Habitat& b) { return a.fitness < b.fitness; });
    if (all.size() > static_cast<std::size_t>(max_population)) {
        all.resize(static_cast<std::size_t>(max_population));
    }
    return all;
}

MigrationResult cluster_and_migrate(const std::vector<Habitat>& population, int n_clusters,
                                    double migration, double deviation, const Bounds& bounds,
                                    std::mt19937_64& rng, const std::vector<bool>& pinned,
                                    double heavy_tail_scale) {
    MigrationResult out;
    out.population = population;
    if (population.empty()) {
        return out;
    }
    const std::size_t n = population.size();
    const std::size_t dim = population.front().position.size();
    bool identical = true;
    for (std::size_t i = 1; i < n && identical; ++i) {
        identical = population[i].position == population.front().position;
    }
    if (identical) {
        out.goal = population.front().position;
        return out;
    }

    const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(n_clusters, 1)), 1, n);
    // Seed centroids from k distinct habitats (partial Fisher-Yates).
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n - i));
        std::swap(idx[i], idx[std::min(j, n - 1)]);
    }
    std::vector<std::vector<double>> centroid(k);
    for (std::size_t c = 0; c < k; ++c) {
        centroid[c] = population[idx[c]].position;
    }
    std::vector<std::size_t> assign(n, 0);
    for (int iter = 0; iter < 10; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const double d = sq_distance(population[i].position, centroid[c]);
                if (d < best) {
                    best = d;
                    assign[i] = c;
                }
            }
        }
        for (std::size_t c = 0; c < k; ++c) {
            std::vector<double> sum(dim, 0.0);
            std::size_t count = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (assign[i] == c) {
                    ++count;
                    for (std::size_t d = 0; d < dim; ++d) {
                        sum[d] += population[i].position[d];
                    }
                }
            }
            if (count > 0) {
                for (double& v : sum) {
                    v /= static_cast<double>(count);
                }
                centroid[c] = std::move(sum);
            }
        }
    }

    std::size_t goal_cluster = 0;
    double best_mean = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
        double total = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (assign[i] == c) {
                total += population[i].fitness;
                ++count;
            }
        }
        if (count > 0 && total / static_cast<double>(count) < best_mean) {
            best_mean = total / static_cast<double>(count);
            goal_cluster = c;
        }
    }
    out.goal = centroid[goal_cluster];

    for (std::size_t i = 0; i < n; ++i) {
        if (i < pinned.size() && pinned[i]) {
            continue;
        }
        auto& x = out.population[i].position;
        for (std::size_t d = 0; d < dim; ++d) {
            const double factor = deviation > 0.0 ? migration + uniform(rng, -deviation, deviation) : migration;
            x[d] += factor * (out.goal[d] - x[d]);
            if (heavy_tail_scale > 0.0) {
                const double u = uniform01(rng);
                x[d] += heavy_tail_scale * (bounds.hi[d] - bounds.lo[d]) *
                        std::tan(std::numbers::pi * (u - 0.5));
            }
        }
        bounds.clamp(x);
    }
    out.moved = true;
    return out;
}

OptResult optimize(const Objective& objective, const Bounds& bounds, const CoaParams& params) {
    const std::size_t dim = bounds.dimension();
    OptResult result;
    result.best_fitness = std::numeric_limits<double>::infinity();
    const long long budget = params.max_evaluations > 0 ? params.max_evaluations
                                                        : std::numeric_limits<long long>::max();
    bool budget_hit = false;

    // Evaluates as many habitats as the budget allows; the rest are dropped.
    auto evaluate = [&](std::vector<Habitat>& batch) {
        const long long room = budget - result.evaluations;
        if (static_cast<long long>(batch.size()) > room) {
            batch.resize(static_cast<std::size_t>(std::max(room, 0LL)));
            budget_hit = true;
        }
        parallel_for(batch.size(), params.threads, [&](std::size_t i) {
            batch[i].fitness = sanitize(objective(batch[i].position));
        });
        result.evaluations += static_cast<long long>(batch.size());
        for (const auto& h : batch) {
            if (h.fitness < result.best_fitness) {
                result.best_fitness = h.fitness;
                result.best_position = h.position;
            }
        }
    };
    auto record = [&](int iteration, const std::vector<Habitat>& pop) {
        double mean = 0.0;
        for (const auto& h : pop) {
            mean += h.fitness / static_cast<double>(pop.size());
        }
        result.history.push_back({iteration, result.best_fitness, mean, result.evaluations});
    };

    std::vector<Habitat> population(static_cast<std::size_t>(std::max(params.n_initial, 1)));
    for (std::size_t i = 0; i < population.size(); ++i) {
        std::mt19937_64 rng(io::mix_seed(params.seed, 0, i));
        population[i].position.resize(dim);
        for (std::size_t d = 0; d < dim; ++d) {
            population[i].position[d] = uniform(rng, bounds.lo[d], bounds.hi[d]);
        }
    }
    evaluate(population);
    std::stable_sort(population.begin(), population.end(),
                     [](const Habitat& a, const Habitat& b) { return a.fitness < b.fitness; });
    if (population.size() > static_cast<std::size_t>(params.max_population)) {
        population.resize(static_cast<std::size_t>(params.max_population));
    }
    record(0, population);

    for (int it = 1; it <= params.max_iterations && !budget_hit && !population.empty(); ++it) {
        const auto gen = static_cast<std::uint64_t>(it);
        int total_eggs = 0;
        for (std::size_t i = 0; i < population.size(); ++i) {
            std::mt19937_64 rng(io::mix_seed(params.seed, gen, 2 * i + 1));
            const int span = params.max_eggs - params.min_eggs + 1;
            population[i].n_eggs =
                params.min_eggs + std::min(span - 1, static_cast<int>(uniform01(rng) * span));
            total_eggs += population[i].n_eggs;
        }
        std::vector<Habitat> eggs;
        for (std::size_t i = 0; i < population.size(); ++i) {
            std::mt19937_64 rng(io::mix_seed(params.seed, gen, 2 * i + 2));
            const auto radius = elr(population[i].n_eggs, total_eggs, bounds, params.elr_alpha);
            for (auto& x : lay_eggs(population[i], radius, bounds, rng)) {
                eggs.push_back({std::move(x), 0.0, 0});
            }
        }
        evaluate(eggs);
        population = survival_selection(std::move(population), std::move(eggs), params.max_population,
                                        params.kill_fraction);

        if (!budget_hit) {
            // The fittest habitat (front after selection) is kept in place.
            std::vector<bool> pinned(population.size(), false);
            pinned[0] = true;
            std::mt19937_64 rng(io::mix_seed(params.seed, gen, 0));
            MigrationResult moved = cluster_and_migrate(population, params.n_clusters, params.migration,
                                                        params.deviation, bounds, rng, pinned,
                                                        params.heavy_tail_scale);
            if (moved.moved) {
                std::vector<Habitat> movers(moved.population.begin() + 1, moved.population.end());
                evaluate(movers);
                population.resize(1);
                population.insert(population.end(), movers.begin(), movers.end());
                std::stable_sort(population.begin(), population.end(),
                                 [](const Habitat& a, const Habitat& b) { return a.fitness < b.fitness; });
            }
        }
        record(it, population);

        const int w = params.convergence_window;
        const auto hsize = static_cast<int>(result.history.size());
        if (w > 0 && hsize > w) {
            const double before = result.history[static_cast<std::size_t>(hsize - 1 - w)].best_fitness;
            const double now = result.best_fitness;
            if (before - now <= params.tolerance * std::abs(before)) {
                result.converged = true;
                break;
            }
        }
    }
    return result;
}

}  // namespace microdispatch::coa
