// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include "support.hpp"

#include "microdispatch/coa.hpp"
#include "microdispatch/der_models.hpp"
#include "microdispatch/errors.hpp"
#include "microdispatch/evaluate.hpp"
#include "microdispatch/parallel.hpp"
#include "microdispatch/pipeline.hpp"
#include "microdispatch/uncertainty.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace microdispatch;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    std::string failed;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            failed += failed.empty() ? what : "; " + what;
            pass = false;
        }
    }
};

int failures = 0;

void report(int id, const std::string& title, const std::function<void(Outcome&)>& body) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
        body(o);
    } catch (const std::exception& e) {
        o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) {
        ++failures;
    }
    std::string info = o.detail.str();
    if (!o.failed.empty()) {
        info += (info.empty() ? "failed: " : " | failed: ") + o.failed;
    }
    std::printf("criterion %d: %s - %s (%.1f s)%s%s\n", id, o.pass ? "PASS" : "FAIL", title.c_str(), secs,
                info.empty() ? "" : " ", info.c_str());
    std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

double sphere(const std::vector<double>& x) { return x[0] * x[0] + x[1] * x[1]; }

// Largest per-unit mismatch between slack import and demand plus losses.
double slack_residual(const powerflow::InjectionVector& inj, const powerflow::FlowSolution& f, double s_base) {
    double demand = 0.0;
    for (double p : inj.p_kw) {
        demand -= p;
    }
    double branch_sum = 0.0;
    for (double l : f.branch_loss_kw) {
        branch_sum += l;
    }
    return std::max(std::abs(f.slack_p_kw - demand - f.total_loss_kw), std::abs(branch_sum - f.total_loss_kw)) /
           s_base;
}

}  // namespace

int main() {
    report(1, "device models reproduce the turbine and PV boundary values", [](Outcome& o) {
        const der::WtParams wt;
        for (double v = 0.0; v < 2.0; v += 0.05) {
            o.require(der::wt_power(v, wt) == 0.0, "WT below cut-in");
        }
        for (double v = 14.0; v <= 25.0; v += 0.25) {
            o.require(der::wt_power(v, wt) == 250.0, "WT rated plateau");
        }
        o.require(der::wt_power(25.0, wt) == 250.0, "WT at cut-out");
        for (double v : {25.01, 26.0, 40.0}) {
            o.require(der::wt_power(v, wt) == 0.0, "WT above cut-out");
        }
        o.require(std::abs(der::wt_power(8.0, wt) - 187.5) < 1e-12, "WT at 8 m/s");
        o.require(der::pv_power(1000.0, 25.0, der::PvParams{}) == 250.0, "PV at STC");
    });

    report(2, "Beta moment matching and sampling", [](Outcome& o) {
        std::mt19937_64 rng(2);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            const double mu = 0.01 + 0.98 * u(rng);
            const double sigma = std::sqrt(mu * (1.0 - mu)) * (0.01 + 0.98 * u(rng));
            const auto s = uncertainty::beta_params_from_moments(mu, sigma);
            const double sum = s.alpha + s.beta;
            worst = std::max(worst, std::abs(s.alpha / sum - mu));
            worst = std::max(worst, std::abs(std::sqrt(s.alpha * s.beta / (sum * sum * (sum + 1.0))) - sigma));
        }
        o.require(worst <= 1e-10, "round-trip error " + std::to_string(worst));

        // Clearness draws through the scenario generator: 4167 scenarios x 24 h >= 1e5 samples of Beta(2,2).
        auto c = testing::load_fixture("lv_microgrid.json");
        c.uncertainty.clearness_mean.assign(24, 0.5);
        c.uncertainty.clearness_std.assign(24, std::sqrt(0.05));
        c.profiles["irradiance"].assign(24, 1000.0);
        const auto set = uncertainty::generate_scenarios(c, 4167, 99);
        double sum = 0.0, sq = 0.0;
        double n = 0.0;
        for (const auto& s : set.scenarios) {
            for (double g : s.irradiance_wm2) {
                sum += g / 1000.0;
                sq += (g / 1000.0) * (g / 1000.0);
                n += 1.0;
            }
        }
        const double mean = sum / n;
        const double var = sq / n - mean * mean;
        o.detail << "samples=" << n << " mean=" << mean << " var=" << var;
        o.require(std::abs(mean - 0.5) <= 0.005, "sample mean");
        o.require(std::abs(var - 0.05) <= 0.002, "sample variance");
    });

    report(3, "power flow matches the reference sweep and conserves power", [](Outcome& o) {
        double worst_v = 0.0, worst_loss = 0.0, worst_residual = 0.0;
        auto compare = [&](const grid::NetworkCase& c, const powerflow::InjectionVector& inj) {
            const auto f = powerflow::solve_radial(c, inj);
            o.require(f.converged, "solver did not converge");
            const auto ref = testing::reference_sweep(c, inj);
            for (std::size_t i = 0; i < f.v_pu.size(); ++i) {
                worst_v = std::max(worst_v, std::abs(f.v_pu[i] - ref.v_mag[i]));
            }
            if (ref.loss_kw > 0.0) {
                worst_loss = std::max(worst_loss, std::abs(f.total_loss_kw - ref.loss_kw) / ref.loss_kw);
            }
            worst_residual = std::max(worst_residual, slack_residual(inj, f, c.base.s_base_kva));
        };
        const auto two = testing::chain_case(2, 0.01, 0.01);
        compare(two, {{0.0, -500.0}, {0.0, 0.0}});
        const auto c69 = testing::load_fixture("ieee69.json");
        compare(c69, testing::peak_load_injections(c69));
        // Every hour of the 69-bus fixture under a few scenarios and an idle-CHP schedule.
        const auto set = uncertainty::generate_scenarios(c69, 5, 3);
        const auto sched = evaluate::ScheduleLayout::of(c69).idle(c69);
        for (const auto& sc : set.scenarios) {
            for (int t = 0; t < c69.horizon.steps; ++t) {
                compare(c69, evaluate::build_injections(c69, sched, sc, t));
            }
        }
        o.detail << "max |dV|=" << worst_v << " pu, max loss rel err=" << worst_loss
                 << ", max residual=" << worst_residual << " pu";
        o.require(worst_v <= 1e-8, "voltage mismatch");
        o.require(worst_loss <= 1e-3, "loss mismatch");
        o.require(worst_residual < 1e-6, "conservation residual");
    });

    report(4, "scenario generation and reduction", [](Outcome& o) {
        const auto c = testing::load_fixture("lv_microgrid.json");
        const auto full = uncertainty::generate_scenarios(c, 1000, 2024);
        o.require(std::abs(full.total_probability() - 1.0) <= 1e-12, "generated probabilities");
        for (int target : {500, 100, 30, 5, 1}) {
            const auto r = uncertainty::reduce_scenarios(full, target);
            o.require(std::abs(r.total_probability() - 1.0) <= 1e-12,
                      "reduced probabilities at " + std::to_string(target));
        }
        const auto hand = uncertainty::reduce_scenarios(testing::scalar_set({0.0, 1.0, 2.0, 10.0, 11.0}), 2);
        o.require(hand.scenarios.size() == 2 && hand.scenarios[0].id == 1 && hand.scenarios[1].id == 4 &&
                      std::abs(hand.scenarios[0].probability - 0.6) < 1e-14 &&
                      std::abs(hand.scenarios[1].probability - 0.4) < 1e-14,
                  "hand case survivors");
        const auto reduced = uncertainty::reduce_scenarios(full, 30);
        const auto f = uncertainty::reduction_fidelity(full, reduced);
        o.detail << "hourly load error max=" << 100.0 * f.load.max_rel_error << "%, CV full=" << 100.0 * f.cv_original
                 << "%";
        o.require(f.load.max_rel_error <= 0.02, "hourly expected load drift");
    });

    report(5, "COA on the 2-D sphere", [](Outcome& o) {
        int solved = 0;
        bool monotone = true, contained = true;
        const coa::Bounds b{{-5.0, -5.0}, {5.0, 5.0}};
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            coa::CoaParams p;
            p.seed = seed;
            p.max_evaluations = 5000;
            p.max_iterations = 100000;
            p.convergence_window = 0;
            const auto r = coa::optimize(
                [&](const std::vector<double>& x) {
                    contained = contained && b.contains(x);
                    return sphere(x);
                },
                b, p);
            for (std::size_t i = 1; i < r.history.size(); ++i) {
                monotone = monotone && r.history[i].best_fitness <= r.history[i - 1].best_fitness;
            }
            solved += r.best_fitness < 1e-6 && r.evaluations <= 5000 ? 1 : 0;
            const auto again = coa::optimize(sphere, b, p);
            o.require(again.best_position == r.best_position && again.best_fitness == r.best_fitness,
                      "seed " + std::to_string(seed) + " not reproducible");
        }
        o.detail << solved << "/10 seeds below 1e-6";
        o.require(solved >= 9, "too few seeds converged");
        o.require(monotone, "best-so-far increased");
        o.require(contained, "evaluation outside bounds");
    });

    report(6, "objective components and weight degeneracies", [](Outcome& o) {
        grid::NetworkCase c = testing::chain_case(2, 0.0, 0.0);
        c.buses[1].load_p_peak = 100.0;
        grid::DerUnit chp;
        chp.name = "chp";
        chp.kind = grid::DerKind::CHP;
        chp.bus = 1;
        chp.om_rate = 0.02;
        chp.emission = {1.0, 0.01, 0.0, 0.0, 0.0};
        der::ChpParams p;
        p.efficiency = 0.4;
        p.heat_to_electric = 0.5;
        p.p_max = 200.0;
        chp.params = p;
        chp.p_max = 200.0;
        c.ders.push_back(chp);
        c.prices.gas_price = 0.05;
        c.prices.heat_credit = 0.01;
        c.prices.emission_price = 0.03;
        c.prices.interruption_price = 5.0;
        grid::validate_case(c);
        const evaluate::DispatchSchedule s{{{100.0}}, {}};
        const auto set = uncertainty::forecast_set(c);
        const double hand = (0.05 * 100.0 / 0.4 - 0.01 * 0.5 * 100.0) + 0.02 * 100.0 + (1.0 + 1.0) * 0.03;
        const auto rep = evaluate::evaluate_schedule(c, s, set);
        o.require(std::abs(rep.z - hand) <= 1e-9 * hand, "Z differs from the component sum");
        o.require(rep.eir == 1.0, "EIR with no failures");

        c.branches[0].failure_rate = 0.3;
        const auto full = evaluate::evaluate_schedule(c, s, set);
        o.require(full.f2 > 0.0, "reliability term missing");
        o.require(full.eir >= 0.0 && full.eir <= 1.0, "EIR outside [0, 1]");
        c.weights = {1.0, 0.0, 1.0};
        const auto no_rel = evaluate::evaluate_schedule(c, s, set);
        o.require(no_rel.z == no_rel.f1 + no_rel.penalty, "H2=0 keeps reliability");
        c.weights = {0.0, 1.0, 1.0};
        const auto no_cost = evaluate::evaluate_schedule(c, s, set);
        o.require(no_cost.z == no_cost.f2 + no_cost.penalty, "H1=0 keeps cost");

        const auto lv = testing::load_fixture("lv_microgrid.json");
        auto sched = evaluate::ScheduleLayout::of(lv).idle(lv);
        for (const auto& sc : uncertainty::generate_scenarios(lv, 50, 6).scenarios) {
            const auto r = evaluate::reliability_cost(lv, sc);
            o.require(r.eir >= 0.0 && r.eir <= 1.0, "fixture EIR outside [0, 1]");
        }
        (void)sched;
    });

    const fs::path out_root = fs::temp_directory_path() / "microdispatch_acceptance";
    fs::remove_all(out_root);

    report(7, "stochastic schedule is no worse out of sample on the LV fixture", [&](Outcome& o) {
        const auto c = testing::load_fixture("lv_microgrid.json");
        double slowest = 0.0;
        int ok = 0;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            pipeline::RunConfig cfg;
            cfg.case_path = testing::data_path("lv_microgrid.json");
            cfg.seed = seed;
            cfg.n_generate = 1000;
            cfg.n_reduced = 30;
            cfg.n_out_of_sample = 1000;
            cfg.coa.max_iterations = 200;
            cfg.coa.n_initial = 20;
            cfg.coa.max_population = 20;
            cfg.threads = resolve_threads(0);
            double z[2] = {0.0, 0.0};
            for (auto mode : {pipeline::Mode::Stochastic, pipeline::Mode::Deterministic}) {
                cfg.mode = mode;
                cfg.output_dir = out_root / ("seed_" + std::to_string(seed)) / pipeline::to_string(mode);
                const auto t0 = std::chrono::steady_clock::now();
                const auto r = pipeline::run_study(cfg, c);
                slowest = std::max(slowest, seconds_since(t0));
                z[mode == pipeline::Mode::Stochastic ? 0 : 1] = r.out_of_sample.z;
            }
            const bool dominated = z[0] <= z[1] + 0.01 * std::abs(z[1]);
            ok += dominated ? 1 : 0;
            o.detail << "seed " << seed << ": " << z[0] << " vs " << z[1] << "; ";
            o.require(dominated, "seed " + std::to_string(seed));
        }
        o.detail << "slowest run " << slowest << " s on " << resolve_threads(0) << " thread(s)";
        o.require(slowest < 300.0, "pipeline slower than 5 minutes");
    });

    report(8, "identical configuration reproduces the output directory byte for byte", [&](Outcome& o) {
        pipeline::RunConfig cfg;
        cfg.case_path = testing::data_path("lv_microgrid.json");
        cfg.seed = 1;
        cfg.coa.max_iterations = 200;
        cfg.coa.n_initial = 20;
        cfg.coa.max_population = 20;
        const fs::path first = out_root / "seed_1" / "stochastic";
        if (!fs::exists(first / "report.json")) {
            cfg.output_dir = out_root / "repro_a";
            pipeline::run_study(cfg);
        }
        const fs::path a = fs::exists(first / "report.json") ? first : out_root / "repro_a";
        cfg.output_dir = out_root / "repro_b";
        cfg.threads = 1;
        pipeline::run_study(cfg);
        const auto sa = testing::snapshot(a);
        const auto sb = testing::snapshot(cfg.output_dir);
        o.detail << sa.size() << " files compared";
        o.require(!sa.empty() && sa == sb, "directories differ");
    });

    return failures == 0 ? 0 : 1;
}
