#pragma once

#include "microdispatch/coa.hpp"
#include "microdispatch/evaluate.hpp"
#include "microdispatch/grid_model.hpp"
#include "microdispatch/uncertainty.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace microdispatch::pipeline {

enum class Mode { Stochastic, Deterministic };

const char* to_string(Mode m);

struct RunConfig {
    std::filesystem::path case_path;
    std::uint64_t seed = 1;
    int n_generate = 1000;
    int n_reduced = 30;
    int n_out_of_sample = 1000;
    coa::CoaParams coa;
    Mode mode = Mode::Stochastic;
    std::optional<grid::Weights> weights;  // overrides the case weights
    std::filesystem::path output_dir;      // empty: nothing written
    int threads = 1;

    void validate() const;
};

struct StudyResult {
    Mode mode = Mode::Stochastic;
    evaluate::DispatchSchedule schedule;
    coa::OptResult optimization;
    uncertainty::ScenarioSet full_set;
    uncertainty::ScenarioSet reduced_set;
    // On the set the schedule was optimized against (reduced set or forecast).
    evaluate::EvaluationReport training;
    // On the reduced set regardless of mode, for like-for-like in-sample figures.
    evaluate::EvaluationReport reduced;
    evaluate::EvaluationReport out_of_sample;
    std::uint64_t out_of_sample_seed = 0;
    double wall_seconds = 0.0;
};

// Seed of the fresh evaluation set; never equal to the training seed.
std::uint64_t out_of_sample_seed(std::uint64_t training_seed);

/// Load case, generate and reduce scenarios, optimize the schedule in the
/// requested mode, then score it in-sample and on a fresh scenario set. With
/// an output directory, every artifact is written there; on failure a FAILED
/// marker with the error text is left behind and the error rethrown.
StudyResult run_study(const RunConfig& cfg);
StudyResult run_study(const RunConfig& cfg, const grid::NetworkCase& c);

struct ComparisonRow {
    std::uint64_t seed = 0;
    Mode mode = Mode::Stochastic;
    double in_sample_z = 0.0;    // on the set the schedule was trained on
    double reduced_set_z = 0.0;  // on the reduced set
    double out_of_sample_z = 0.0;
    double out_of_sample_f1 = 0.0;
    double out_of_sample_f2 = 0.0;
    double out_of_sample_penalty = 0.0;
};

ComparisonRow comparison_row(std::uint64_t seed, const StudyResult& r);

struct ComparisonTable {
    std::vector<ComparisonRow> rows;  // one per seed and mode
    double mean_stochastic_out_of_sample_z = 0.0;
    double mean_deterministic_out_of_sample_z = 0.0;

    std::string csv() const;
};

// Runs both modes per seed; `base` supplies every setting except seed and mode.
// With base.output_dir set, each run lands in seed_<s>/<mode>/ and the table in comparison.csv.
ComparisonTable compare_modes(const RunConfig& base, const std::vector<std::uint64_t>& seeds);

std::string run_config_json(const RunConfig& cfg);
std::string comparison_csv(const std::vector<ComparisonRow>& rows);
std::string convergence_csv(const coa::OptResult& r);

}  // namespace microdispatch::pipeline
