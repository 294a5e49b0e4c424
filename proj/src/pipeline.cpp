#include "microdispatch/pipeline.hpp"

#include "microdispatch/errors.hpp"
#include "microdispatch/io_util.hpp"
#include "microdispatch/report_io.hpp"

#include <json.hpp>

#include <chrono>
#include <sstream>

namespace microdispatch::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(Mode m) { return m == Mode::Stochastic ? "stochastic" : "deterministic"; }

void RunConfig::validate() const {
    if (n_generate < 1) {
        throw ValidationError("n_generate", "must be at least 1");
    }
    if (n_reduced < 1 || n_reduced > n_generate) {
        throw ValidationError("n_reduced", "must lie in [1, n_generate]");
    }
    if (n_out_of_sample < 1) {
        throw ValidationError("n_out_of_sample", "must be at least 1");
    }
    if (coa.n_initial < 1 || coa.max_population < 1) {
        throw ValidationError("coa.population", "must be at least 1");
    }
    if (coa.min_eggs < 0 || coa.max_eggs < coa.min_eggs) {
        throw ValidationError("coa.eggs", "need 0 <= min_eggs <= max_eggs");
    }
    if (coa.max_iterations < 0) {
        throw ValidationError("coa.max_iterations", "must be non-negative");
    }
    if (!(coa.kill_fraction >= 0.0 && coa.kill_fraction < 1.0)) {
        throw ValidationError("coa.kill_fraction", "must lie in [0, 1)");
    }
    if (weights && (weights->h1 < 0.0 || weights->h2 < 0.0 || weights->hc < 0.0)) {
        throw ValidationError("weights", "must be non-negative");
    }
}

std::uint64_t out_of_sample_seed(std::uint64_t training_seed) {
    std::uint64_t s = io::mix_seed(training_seed, 0x6f75745f73616d70ULL);
    if (s == training_seed) {
        s ^= 1;
    }
    return s;
}

std::string run_config_json(const RunConfig& cfg) {
    json doc;
    doc["case"] = cfg.case_path.generic_string();
    doc["seed"] = cfg.seed;
    doc["mode"] = to_string(cfg.mode);
    doc["n_generate"] = cfg.n_generate;
    doc["n_reduced"] = cfg.n_reduced;
    doc["n_out_of_sample"] = cfg.n_out_of_sample;
    if (cfg.weights) {
        doc["weights"] = {{"h1", cfg.weights->h1}, {"h2", cfg.weights->h2}, {"hc", cfg.weights->hc}};
    }
    const auto& p = cfg.coa;
    doc["coa"] = {{"n_initial", p.n_initial},
                  {"min_eggs", p.min_eggs},
                  {"max_eggs", p.max_eggs},
                  {"max_population", p.max_population},
                  {"elr_alpha", p.elr_alpha},
                  {"kill_fraction", p.kill_fraction},
                  {"migration", p.migration},
                  {"deviation", p.deviation},
                  {"n_clusters", p.n_clusters},
                  {"max_iterations", p.max_iterations},
                  {"max_evaluations", p.max_evaluations},
                  {"convergence_window", p.convergence_window},
                  {"tolerance", p.tolerance},
                  {"heavy_tail_scale", p.heavy_tail_scale}};
    return doc.dump(2) + "\n";
}

std::string convergence_csv(const coa::OptResult& r) {
    std::ostringstream out;
    out << "iteration,best_fitness,mean_fitness,evaluations\n";
    for (const auto& h : r.history) {
        out << h.iteration << ',' << io::format_double(h.best_fitness) << ','
            << io::format_double(h.mean_fitness) << ',' << h.evaluations << '\n';
    }
    return out.str();
}

ComparisonRow comparison_row(std::uint64_t seed, const StudyResult& r) {
    ComparisonRow row;
    row.seed = seed;
    row.mode = r.mode;
    row.in_sample_z = r.training.z;
    row.reduced_set_z = r.reduced.z;
    row.out_of_sample_z = r.out_of_sample.z;
    row.out_of_sample_f1 = r.out_of_sample.f1;
    row.out_of_sample_f2 = r.out_of_sample.f2;
    row.out_of_sample_penalty = r.out_of_sample.penalty;
    return row;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
    using io::format_double;
    std::ostringstream out;
    out << "seed,mode,in_sample_z,reduced_set_z,out_of_sample_z,out_of_sample_f1,out_of_sample_f2,"
           "out_of_sample_penalty\n";
    for (const auto& r : rows) {
        out << r.seed << ',' << to_string(r.mode) << ',' << format_double(r.in_sample_z) << ','
            << format_double(r.reduced_set_z) << ',' << format_double(r.out_of_sample_z) << ','
            << format_double(r.out_of_sample_f1) << ',' << format_double(r.out_of_sample_f2) << ','
            << format_double(r.out_of_sample_penalty) << '\n';
    }
    return out.str();
}

std::string ComparisonTable::csv() const { return comparison_csv(rows); }

namespace {

json report_section(const evaluate::EvaluationReport& r) { return json::parse(evaluate::report_json(r)); }

StudyResult run(const RunConfig& cfg, const grid::NetworkCase& original) {
    cfg.validate();
    const auto started = std::chrono::steady_clock::now();
    grid::NetworkCase c = original;
    if (cfg.weights) {
        c.weights = *cfg.weights;
    }
    const bool write = !cfg.output_dir.empty();
    if (write) {
        fs::create_directories(cfg.output_dir);
        fs::remove(cfg.output_dir / "FAILED");
        io::write_text_file(cfg.output_dir / "run_config.json", run_config_json(cfg));
    }

    StudyResult result;
    result.mode = cfg.mode;
    result.full_set = uncertainty::generate_scenarios(c, cfg.n_generate, cfg.seed);
    result.reduced_set = uncertainty::reduce_scenarios(result.full_set, cfg.n_reduced);
    if (write) {
        io::write_text_file(cfg.output_dir / "scenarios_full.csv", uncertainty::scenarios_csv(result.full_set));
        io::write_text_file(cfg.output_dir / "scenarios_reduced.csv",
                            uncertainty::scenarios_csv(result.reduced_set));
    }

    const uncertainty::ScenarioSet training_set =
        cfg.mode == Mode::Stochastic ? result.reduced_set : uncertainty::forecast_set(c);
    evaluate::EvalOptions inner;
    inner.threads = 1;  // the optimizer parallelizes across habitats
    const evaluate::Evaluator trainer(c, training_set, inner);
    const auto& layout = trainer.layout();

    coa::CoaParams params = cfg.coa;
    params.seed = cfg.seed;
    params.threads = cfg.threads;
    const coa::Bounds bounds{layout.lower_bounds(c), layout.upper_bounds(c)};
    if (layout.dimension() > 0) {
        result.optimization = coa::optimize(
            [&](const std::vector<double>& x) { return trainer.objective(layout.decode(x)); }, bounds, params);
        result.schedule = layout.decode(result.optimization.best_position);
    } else {
        result.schedule = layout.idle(c);
        result.optimization.best_fitness = trainer.objective(result.schedule);
    }

    evaluate::EvalOptions outer;
    outer.threads = cfg.threads;
    result.training = evaluate::Evaluator(c, training_set, outer).evaluate(result.schedule);
    result.reduced = evaluate::Evaluator(c, result.reduced_set, outer).evaluate(result.schedule);
    result.out_of_sample_seed = out_of_sample_seed(cfg.seed);
    if (result.out_of_sample_seed == cfg.seed) {
        throw Error("out-of-sample seed coincides with the training seed");
    }
    const auto fresh = uncertainty::generate_scenarios(c, cfg.n_out_of_sample, result.out_of_sample_seed);
    result.out_of_sample = evaluate::Evaluator(c, fresh, outer).evaluate(result.schedule);

    if (write) {
        io::write_text_file(cfg.output_dir / "schedule.json", evaluate::schedule_json(c, result.schedule));
        json doc;
        doc["mode"] = to_string(cfg.mode);
        doc["seed"] = cfg.seed;
        doc["evaluations"] = result.optimization.evaluations;
        doc["converged"] = result.optimization.converged;
        doc["out_of_sample_seed"] = result.out_of_sample_seed;
        doc["training"] = report_section(result.training);
        doc["reduced_set"] = report_section(result.reduced);
        doc["out_of_sample"] = report_section(result.out_of_sample);
        io::write_text_file(cfg.output_dir / "report.json", doc.dump(2) + "\n");
        io::write_text_file(cfg.output_dir / "per_scenario.csv", evaluate::per_scenario_csv(result.training));
        io::write_text_file(cfg.output_dir / "per_hour.csv", evaluate::per_hour_csv(result.training));
        io::write_text_file(cfg.output_dir / "convergence.csv", convergence_csv(result.optimization));
        io::write_text_file(cfg.output_dir / "comparison.csv", comparison_csv({comparison_row(cfg.seed, result)}));
    }
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

void mark_failed(const fs::path& dir, const std::exception& e) {
    if (dir.empty()) {
        return;
    }
    try {
        fs::create_directories(dir);
        io::write_text_file(dir / "FAILED", std::string(e.what()) + "\n");
    } catch (...) {
        // The original error is more useful than this one.
    }
}

}  // namespace

StudyResult run_study(const RunConfig& cfg, const grid::NetworkCase& c) {
    try {
        return run(cfg, c);
    } catch (const std::exception& e) {
        mark_failed(cfg.output_dir, e);
        throw;
    }
}

StudyResult run_study(const RunConfig& cfg) {
    try {
        const grid::NetworkCase c = grid::load_case(cfg.case_path);
        return run(cfg, c);
    } catch (const std::exception& e) {
        mark_failed(cfg.output_dir, e);
        throw;
    }
}

ComparisonTable compare_modes(const RunConfig& base, const std::vector<std::uint64_t>& seeds) {
    if (seeds.empty()) {
        throw ValidationError("seeds", "need at least one seed");
    }
    const grid::NetworkCase c = grid::load_case(base.case_path);
    ComparisonTable table;
    double sum_stochastic = 0.0;
    double sum_deterministic = 0.0;
    for (std::uint64_t seed : seeds) {
        for (Mode mode : {Mode::Stochastic, Mode::Deterministic}) {
            RunConfig cfg = base;
            cfg.seed = seed;
            cfg.mode = mode;
            if (!base.output_dir.empty()) {
                cfg.output_dir = base.output_dir / ("seed_" + std::to_string(seed)) / to_string(mode);
            }
            const StudyResult r = run_study(cfg, c);
            table.rows.push_back(comparison_row(seed, r));
            (mode == Mode::Stochastic ? sum_stochastic : sum_deterministic) += r.out_of_sample.z;
        }
    }
    table.mean_stochastic_out_of_sample_z = sum_stochastic / static_cast<double>(seeds.size());
    table.mean_deterministic_out_of_sample_z = sum_deterministic / static_cast<double>(seeds.size());
    if (!base.output_dir.empty()) {
        io::write_text_file(base.output_dir / "comparison.csv", table.csv());
    }
    return table;
}

}  // namespace microdispatch::pipeline
