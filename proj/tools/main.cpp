#include "microdispatch/errors.hpp"
#include "microdispatch/grid_model.hpp"
#include "microdispatch/io_util.hpp"
#include "microdispatch/parallel.hpp"
#include "microdispatch/pipeline.hpp"
#include "microdispatch/report_io.hpp"
#include "microdispatch/uncertainty.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
namespace md = microdispatch;

namespace {

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        if (first == std::string::npos) {
            continue;
        }
        const auto last = item.find_last_not_of(" \t");
        const long long v = md::io::parse_int(item.substr(first, last - first + 1), "--seeds");
        if (v < 0) {
            throw md::ValidationError("--seeds", "seeds must be non-negative");
        }
        seeds.push_back(static_cast<std::uint64_t>(v));
    }
    if (seeds.empty()) {
        throw md::ValidationError("--seeds", "need at least one seed");
    }
    return seeds;
}

void print_summary(const std::string& label, const md::evaluate::EvaluationReport& r) {
    std::cout << label << ": Z=" << md::io::format_double(r.z) << " F1=" << md::io::format_double(r.f1)
              << " F2=" << md::io::format_double(r.f2) << " penalty=" << md::io::format_double(r.penalty)
              << " EIR=" << md::io::format_double(r.eir) << " scenarios=" << r.scenarios.size()
              << (r.feasible ? "" : " (infeasible)") << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic day-ahead microgrid dispatch"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads (0: MICRODISPATCH_THREADS or all cores)")
        ->check(CLI::NonNegativeNumber);

    // validate
    auto* validate = app.add_subcommand("validate", "Check a case file and print a summary");
    fs::path v_case;
    validate->add_option("--case", v_case, "Case JSON")->required();

    // scenarios
    auto* scenarios = app.add_subcommand("scenarios", "Generate a scenario set as CSV");
    fs::path s_case;
    fs::path s_out;
    int s_n = 1000;
    std::uint64_t s_seed = 1;
    scenarios->add_option("--case", s_case, "Case JSON")->required();
    scenarios->add_option("--n", s_n, "Number of scenarios")->capture_default_str()->check(CLI::PositiveNumber);
    scenarios->add_option("--seed", s_seed, "RNG seed")->capture_default_str();
    scenarios->add_option("--out", s_out, "Output directory (writes scenarios.csv)")->required();

    // reduce
    auto* reduce = app.add_subcommand("reduce", "Backward-reduce a scenario CSV");
    fs::path r_in;
    fs::path r_out;
    int r_to = 30;
    reduce->add_option("--in", r_in, "Input scenario CSV")->required()->check(CLI::ExistingFile);
    reduce->add_option("--to", r_to, "Target scenario count")->capture_default_str()->check(CLI::PositiveNumber);
    reduce->add_option("--out", r_out, "Output scenario CSV")->required();

    // dispatch
    auto* dispatch = app.add_subcommand("dispatch", "Run the full study and write all artifacts");
    md::pipeline::RunConfig cfg;
    std::vector<double> weights;
    bool deterministic = false;
    dispatch->add_option("--case", cfg.case_path, "Case JSON")->required();
    dispatch->add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
    dispatch->add_option("--scenarios", cfg.n_generate, "Scenarios generated")->capture_default_str();
    dispatch->add_option("--reduce-to", cfg.n_reduced, "Scenarios kept after reduction")->capture_default_str();
    dispatch->add_option("--out-of-sample", cfg.n_out_of_sample, "Scenarios in the fresh evaluation set")
        ->capture_default_str();
    dispatch->add_option("--iters", cfg.coa.max_iterations, "COA iterations")->capture_default_str();
    dispatch->add_option("--population", cfg.coa.n_initial, "Initial COA population")->capture_default_str();
    dispatch->add_option("--max-population", cfg.coa.max_population, "COA population cap")
        ->capture_default_str();
    dispatch->add_option("--weights", weights, "H1 H2 (defaults from the case)")->expected(2);
    dispatch->add_flag("--deterministic", deterministic, "Optimize against the forecast scenario only");
    dispatch->add_option("--out", cfg.output_dir, "Output directory")->required();

    // report
    auto* report = app.add_subcommand("report", "Re-render summaries from a dispatch directory");
    fs::path rep_in;
    report->add_option("--in", rep_in, "Dispatch output directory")->required()->check(CLI::ExistingDirectory);

    // compare
    auto* compare = app.add_subcommand("compare", "Stochastic vs deterministic over several seeds");
    md::pipeline::RunConfig cmp;
    std::string seeds_text;
    compare->add_option("--case", cmp.case_path, "Case JSON")->required();
    compare->add_option("--seeds", seeds_text, "Comma-separated seeds, e.g. \"1,2,3\"")->required();
    compare->add_option("--scenarios", cmp.n_generate, "Scenarios generated")->capture_default_str();
    compare->add_option("--reduce-to", cmp.n_reduced, "Scenarios kept after reduction")->capture_default_str();
    compare->add_option("--out-of-sample", cmp.n_out_of_sample, "Scenarios in the fresh evaluation set")
        ->capture_default_str();
    compare->add_option("--iters", cmp.coa.max_iterations, "COA iterations")->capture_default_str();
    compare->add_option("--population", cmp.coa.n_initial, "Initial COA population")->capture_default_str();
    compare->add_option("--max-population", cmp.coa.max_population, "COA population cap")
        ->capture_default_str();
    compare->add_option("--out", cmp.output_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const int n_threads = md::resolve_threads(threads);
        if (*validate) {
            const auto c = md::grid::load_case(v_case);
            const auto n_branches = c.branches.size();
            std::cout << c.buses.size() << (c.buses.size() == 1 ? " bus, " : " buses, ") << n_branches
                      << (n_branches == 1 ? " branch" : " branches") << ", radial: ok\n";
        } else if (*scenarios) {
            const auto c = md::grid::load_case(s_case);
            const auto set = md::uncertainty::generate_scenarios(c, s_n, s_seed);
            fs::create_directories(s_out);
            md::io::write_text_file(s_out / "scenarios.csv", md::uncertainty::scenarios_csv(set));
            std::cout << "wrote " << set.scenarios.size() << " scenarios to " << (s_out / "scenarios.csv").string()
                      << '\n';
        } else if (*reduce) {
            std::ifstream in(r_in);
            const auto set = md::uncertainty::read_scenarios_csv(in);
            const auto reduced = md::uncertainty::reduce_scenarios(set, r_to);
            if (r_out.has_parent_path()) {
                fs::create_directories(r_out.parent_path());
            }
            md::io::write_text_file(r_out, md::uncertainty::scenarios_csv(reduced));
            std::cout << "reduced " << set.scenarios.size() << " -> " << reduced.scenarios.size()
                      << " scenarios\n";
        } else if (*dispatch) {
            if (!weights.empty()) {
                md::grid::Weights w = md::grid::load_case(cfg.case_path).weights;
                w.h1 = weights[0];
                w.h2 = weights[1];
                cfg.weights = w;
            }
            cfg.mode = deterministic ? md::pipeline::Mode::Deterministic : md::pipeline::Mode::Stochastic;
            cfg.threads = n_threads;
            const auto r = md::pipeline::run_study(cfg);
            print_summary("in-sample", r.training);
            print_summary("out-of-sample", r.out_of_sample);
            std::cout << "evaluations=" << r.optimization.evaluations << " wall_s="
                      << md::io::format_double(r.wall_seconds) << '\n';
        } else if (*report) {
            const auto doc = nlohmann::json::parse(md::io::read_text_file(rep_in / "report.json"));
            const auto training = md::evaluate::parse_report_json(doc.at("training").dump());
            const auto oos = md::evaluate::parse_report_json(doc.at("out_of_sample").dump());
            md::io::write_text_file(rep_in / "per_scenario.csv", md::evaluate::per_scenario_csv(training));
            md::io::write_text_file(rep_in / "per_hour.csv", md::evaluate::per_hour_csv(training));
            print_summary("in-sample", training);
            print_summary("out-of-sample", oos);
        } else if (*compare) {
            cmp.threads = n_threads;
            const auto table = md::pipeline::compare_modes(cmp, parse_seed_list(seeds_text));
            std::cout << table.csv();
            std::cout << "mean out-of-sample Z: stochastic="
                      << md::io::format_double(table.mean_stochastic_out_of_sample_z)
                      << " deterministic=" << md::io::format_double(table.mean_deterministic_out_of_sample_z)
                      << '\n';
        }
    } catch (const md::ValidationFailure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
