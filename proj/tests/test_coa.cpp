#include "microdispatch/coa.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace microdispatch::coa;
using doctest::Approx;

namespace {

double sphere(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) {
        s += v * v;
    }
    return s;
}

double rastrigin(const std::vector<double>& x) {
    double s = 10.0 * static_cast<double>(x.size());
    for (double v : x) {
        s += v * v - 10.0 * std::cos(2.0 * std::numbers::pi * v);
    }
    return s;
}

Bounds box(std::size_t dim, double lo, double hi) {
    return {std::vector<double>(dim, lo), std::vector<double>(dim, hi)};
}

Habitat at(std::vector<double> x, double f) { return {std::move(x), f, 0}; }

}  // namespace

TEST_CASE("egg laying radius") {
    const Bounds b = box(1, 0.0, 5.0);
    CHECK(elr(4, 4, box(2, -5.0, 5.0), 1.0) == std::vector<double>{10.0, 10.0});
    CHECK(elr(0, 10, b, 1.0) == std::vector<double>{0.0});
    CHECK(elr(2, 10, b, 1.0)[0] == Approx(1.0).epsilon(1e-15));
    CHECK(elr(10, 10, b, 3.0)[0] == 5.0);  // clipped to the range
}

TEST_CASE("egg laying") {
    const Bounds b = box(2, -1.0, 1.0);
    std::mt19937_64 rng(3);
    Habitat h = at({0.25, -0.5}, 0.0);
    h.n_eggs = 5;
    for (const auto& e : lay_eggs(h, {0.0, 0.0}, b, rng)) {
        CHECK(e == h.position);
    }
    h.position = {1.0, -1.0};
    for (const auto& e : lay_eggs(h, {0.8, 0.8}, b, rng)) {
        CHECK(b.contains(e));
    }
    std::mt19937_64 r1(9), r2(9);
    CHECK(lay_eggs(h, {0.3, 0.3}, b, r1) == lay_eggs(h, {0.3, 0.3}, b, r2));
}

TEST_CASE("survival selection") {
    std::vector<Habitat> pop{at({0.0}, 3.0), at({1.0}, 1.0)};
    std::vector<Habitat> eggs{at({2.0}, 2.0)};
    const auto all = survival_selection(pop, eggs, 10, 0.0);
    REQUIRE(all.size() == 3);
    CHECK(all[0].fitness == 1.0);
    CHECK(all[1].fitness == 2.0);
    CHECK(all[2].fitness == 3.0);

    // Ties at the cut keep insertion order: population first, then eggs.
    std::vector<Habitat> tied{at({10.0}, 1.0), at({11.0}, 1.0)};
    std::vector<Habitat> tied_eggs{at({12.0}, 1.0), at({13.0}, 1.0)};
    const auto cut = survival_selection(tied, tied_eggs, 3, 0.0);
    REQUIRE(cut.size() == 3);
    CHECK(cut[0].position[0] == 10.0);
    CHECK(cut[1].position[0] == 11.0);
    CHECK(cut[2].position[0] == 12.0);

    // kill_fraction drops the worst eggs before merging.
    std::vector<Habitat> many;
    for (int i = 0; i < 10; ++i) {
        many.push_back(at({static_cast<double>(i)}, static_cast<double>(i)));
    }
    const auto culled = survival_selection({}, many, 100, 0.3);
    CHECK(culled.size() == 7);
    CHECK(culled.back().fitness == 6.0);
}

TEST_CASE("migration") {
    const Bounds b = box(2, -10.0, 10.0);
    std::mt19937_64 rng(1);
    SUBCASE("identical population stays put") {
        std::vector<Habitat> pop(4, at({1.0, 2.0}, 5.0));
        const auto m = cluster_and_migrate(pop, 3, 0.9, 0.5, b, rng);
        CHECK_FALSE(m.moved);
        for (const auto& h : m.population) {
            CHECK(h.position == std::vector<double>{1.0, 2.0});
        }
    }
    SUBCASE("full migration with one cluster lands on the centroid") {
        std::vector<Habitat> pop{at({0.0, 0.0}, 1.0), at({2.0, 0.0}, 2.0), at({1.0, 3.0}, 3.0)};
        const auto m = cluster_and_migrate(pop, 1, 1.0, 0.0, b, rng);
        for (const auto& h : m.population) {
            CHECK(h.position[0] == Approx(1.0).epsilon(1e-14));
            CHECK(h.position[1] == Approx(1.0).epsilon(1e-14));
        }
    }
    SUBCASE("goal lies in the better cluster") {
        std::vector<Habitat> pop;
        std::mt19937_64 g(4);
        std::uniform_real_distribution<double> jitter(-0.5, 0.5);
        for (int i = 0; i < 8; ++i) {
            pop.push_back(at({-6.0 + jitter(g), -6.0 + jitter(g)}, 1.0 + 0.01 * i));
            pop.push_back(at({6.0 + jitter(g), 6.0 + jitter(g)}, 50.0 + 0.01 * i));
        }
        const auto m = cluster_and_migrate(pop, 2, 0.9, 0.3, b, rng);
        double min_x = 1e9, max_x = -1e9, min_y = 1e9, max_y = -1e9;
        for (const auto& h : pop) {
            if (h.fitness < 10.0) {
                min_x = std::min(min_x, h.position[0]);
                max_x = std::max(max_x, h.position[0]);
                min_y = std::min(min_y, h.position[1]);
                max_y = std::max(max_y, h.position[1]);
            }
        }
        CHECK(m.goal[0] >= min_x);
        CHECK(m.goal[0] <= max_x);
        CHECK(m.goal[1] >= min_y);
        CHECK(m.goal[1] <= max_y);
    }
    SUBCASE("pinned habitats do not move") {
        std::vector<Habitat> pop{at({-5.0, -5.0}, 0.0), at({5.0, 5.0}, 9.0), at({4.0, 5.0}, 8.0)};
        const auto m = cluster_and_migrate(pop, 2, 0.9, 0.2, b, rng, {true, false, false});
        CHECK(m.population[0].position == pop[0].position);
        for (const auto& h : m.population) {
            CHECK(b.contains(h.position));
        }
    }
}

TEST_CASE("zero iterations return the best initial habitat") {
    CoaParams p;
    p.max_iterations = 0;
    p.seed = 5;
    const auto r = optimize(sphere, box(3, -5.0, 5.0), p);
    REQUIRE(r.history.size() == 1);
    CHECK(r.evaluations == p.n_initial);
    CHECK(r.best_fitness == r.history[0].best_fitness);
    CHECK(sphere(r.best_position) == r.best_fitness);
}

TEST_CASE("sphere benchmark, monotone best and bound containment") {
    int solved = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        CoaParams p;
        p.seed = seed;
        p.max_evaluations = 5000;
        p.max_iterations = 10000;
        p.convergence_window = 0;
        const Bounds b = box(2, -5.0, 5.0);
        long long seen = 0;
        const auto r = optimize(
            [&](const std::vector<double>& x) {
                ++seen;
                CHECK(b.contains(x));
                return sphere(x);
            },
            b, p);
        CHECK(r.evaluations <= 5000);
        CHECK(seen == r.evaluations);
        for (std::size_t i = 1; i < r.history.size(); ++i) {
            CHECK(r.history[i].best_fitness <= r.history[i - 1].best_fitness);
        }
        if (r.best_fitness < 1e-6) {
            ++solved;
        }
    }
    CHECK(solved >= 9);
}

TEST_CASE("identical seeds give bitwise identical results") {
    CoaParams p;
    p.seed = 77;
    p.max_iterations = 40;
    const auto a = optimize(rastrigin, box(4, -5.12, 5.12), p);
    const auto b = optimize(rastrigin, box(4, -5.12, 5.12), p);
    CHECK(a.best_position == b.best_position);
    CHECK(a.best_fitness == b.best_fitness);
    CHECK(a.evaluations == b.evaluations);
    p.threads = 3;
    const auto c = optimize(rastrigin, box(4, -5.12, 5.12), p);
    CHECK(c.best_position == a.best_position);
    CHECK(c.history.size() == a.history.size());
}

TEST_CASE("10-D Rastrigin improves on the initial population by 99%") {
    for (std::uint64_t seed : {1, 2, 3}) {
        CoaParams p;
        p.seed = seed;
        p.max_iterations = 300;
        p.convergence_window = 0;
        const auto r = optimize(rastrigin, box(10, -5.12, 5.12), p);
        CHECK(r.best_fitness <= 0.01 * r.history.front().best_fitness);
    }
}

TEST_CASE("non-finite objective values rank last") {
    CoaParams p;
    p.seed = 2;
    p.max_iterations = 20;
    const auto r = optimize(
        [](const std::vector<double>& x) { return x[0] > 0.0 ? std::nan("") : sphere(x); }, box(1, -5.0, 5.0), p);
    CHECK(std::isfinite(r.best_fitness));
    CHECK(r.best_position[0] <= 0.0);
}
