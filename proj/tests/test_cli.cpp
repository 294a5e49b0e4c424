#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

Run cli(const std::string& args) {
    static int counter = 0;
    const auto dir = fs::temp_directory_path() / "microdispatch_cli_io";
    fs::create_directories(dir);
    const auto out = dir / ("out" + std::to_string(counter) + ".txt");
    const auto err = dir / ("err" + std::to_string(counter++) + ".txt");
    const std::string cmd =
        std::string("\"") + MICRODISPATCH_CLI + "\" " + args + " >\"" + out.string() + "\" 2>\"" + err.string() + "\"";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = testing::read_file(out);
    r.err = testing::read_file(err);
    return r;
}

std::string data(const std::string& f) { return "\"" + testing::data_path(f).string() + "\""; }

const std::string kSmall = " --scenarios 80 --reduce-to 8 --out-of-sample 60 --iters 10 --population 8 --max-population 8";

}  // namespace

TEST_CASE("validate") {
    const auto ok = cli("validate --case " + data("two_bus.json"));
    CHECK(ok.code == 0);
    CHECK(ok.out == "2 buses, 1 branch, radial: ok\n");
    CHECK(cli("validate --case " + data("ieee69.json")).out == "69 buses, 68 branches, radial: ok\n");

    const auto dir = testing::scratch_dir("cli_bad");
    const std::string bad = testing::read_file(testing::data_path("two_bus.json"));
    std::string broken = bad;
    broken.replace(broken.find("\"id\": 1"), 7, "\"id\": 0");
    {
        std::FILE* f = std::fopen((dir / "dup.json").string().c_str(), "wb");
        std::fwrite(broken.data(), 1, broken.size(), f);
        std::fclose(f);
    }
    const auto dup = cli("validate --case \"" + (dir / "dup.json").string() + "\"");
    CHECK(dup.code == 1);
    CHECK(dup.err.find("buses[1].id") != std::string::npos);
    CHECK(cli("validate --case \"" + (dir / "missing.json").string() + "\"").code == 1);
}

TEST_CASE("usage errors exit with 1") {
    CHECK(cli("").code == 1);
    CHECK(cli("frobnicate").code == 1);
    CHECK(cli("validate").code == 1);
    CHECK(cli("validate --case " + data("two_bus.json") + " --bogus").code == 1);
}

TEST_CASE("help documents every subcommand") {
    for (const char* sub : {"validate", "scenarios", "reduce", "dispatch", "report", "compare"}) {
        const auto r = cli(std::string(sub) + " --help");
        CHECK(r.code == 0);
        CHECK(r.out.find("--") != std::string::npos);
    }
    const auto d = cli("dispatch --help");
    for (const char* flag : {"--case", "--seed", "--scenarios", "--reduce-to", "--iters", "--weights",
                             "--deterministic", "--out"}) {
        CHECK_MESSAGE(d.out.find(flag) != std::string::npos, flag);
    }
}

TEST_CASE("scenarios are byte-identical across runs and reduce works") {
    const auto a = testing::scratch_dir("cli_scen_a");
    const auto b = testing::scratch_dir("cli_scen_b");
    CHECK(cli("scenarios --case " + data("lv_microgrid.json") + " --n 1000 --seed 7 --out \"" + a.string() + "\"").code == 0);
    CHECK(cli("scenarios --case " + data("lv_microgrid.json") + " --n 1000 --seed 7 --out \"" + b.string() + "\"").code == 0);
    const auto text = testing::read_file(a / "scenarios.csv");
    CHECK(text == testing::read_file(b / "scenarios.csv"));
    CHECK(text.rfind("scenario_id,probability,hour,load_mult,wind_ms,irradiance_wm2,price_mult\n", 0) == 0);

    const auto reduced = a / "reduced.csv";
    const auto r = cli("reduce --in \"" + (a / "scenarios.csv").string() + "\" --to 30 --out \"" + reduced.string() + "\"");
    CHECK(r.code == 0);
    CHECK(r.out == "reduced 1000 -> 30 scenarios\n");
    CHECK(cli("reduce --in \"" + (a / "scenarios.csv").string() + "\" --to 5000 --out \"" + reduced.string() + "\"").code == 1);
}

TEST_CASE("dispatch in both modes, then report and compare") {
    const auto s = testing::scratch_dir("cli_disp_s");
    const auto d = testing::scratch_dir("cli_disp_d");
    const std::string base = "dispatch --case " + data("lv_microgrid.json") + " --seed 3" + kSmall + " --weights 1 1";
    CHECK(cli(base + " --out \"" + s.string() + "\"").code == 0);
    CHECK(cli(base + " --deterministic --out \"" + d.string() + "\"").code == 0);
    for (const auto& dir : {s, d}) {
        for (const char* f : {"scenarios_full.csv", "scenarios_reduced.csv", "schedule.json", "report.json",
                              "per_scenario.csv", "per_hour.csv", "convergence.csv", "comparison.csv",
                              "run_config.json"}) {
            CHECK_MESSAGE(fs::exists(dir / f), f);
        }
    }
    const auto before = testing::read_file(s / "per_hour.csv");
    fs::remove(s / "per_hour.csv");
    const auto rep = cli("report --in \"" + s.string() + "\"");
    CHECK(rep.code == 0);
    CHECK(rep.out.find("out-of-sample: Z=") != std::string::npos);
    CHECK(testing::read_file(s / "per_hour.csv") == before);

    const auto c = testing::scratch_dir("cli_cmp");
    const auto cmp = cli("compare --case " + data("lv_microgrid.json") + " --seeds \"1,2\"" + kSmall + " --out \"" +
                         c.string() + "\"");
    CHECK(cmp.code == 0);
    const auto table = testing::read_file(c / "comparison.csv");
    CHECK(std::count(table.begin(), table.end(), '\n') == 5);
    CHECK(cli("compare --case " + data("lv_microgrid.json") + " --seeds \"x\" --out \"" + c.string() + "\"").code == 1);
}
