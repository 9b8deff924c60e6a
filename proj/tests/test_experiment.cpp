#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "d2dsim/experiment.hpp"
#include "doctest.h"

using namespace d2dsim;
namespace fs = std::filesystem;

namespace {

ExperimentPlan small_plan() {
    ExperimentPlan plan;
    plan.sweep_active_users = {10, 20};
    plan.seeds = {0, 1, 2, 3, 4};
    return plan;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> split(const std::string& line, const std::string& sep) {
    std::vector<std::string> out;
    size_t pos = 0;
    while (true) {
        size_t next = line.find(sep, pos);
        if (next == std::string::npos) {
            out.push_back(line.substr(pos));
            return out;
        }
        out.push_back(line.substr(pos, next - pos));
        pos = next + sep.size();
    }
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

bool same_summary(const MetricSummary& a, const MetricSummary& b) {
    return a.mean == b.mean && a.ci_half_width == b.ci_half_width &&
           a.meets_target == b.meets_target;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::path("tmp_test") / name) {
        fs::remove_all(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("format_real: six significant digits, fixed notation") {
    CHECK(format_real(1234.567) == "1234.57");
    CHECK(format_real(0.000123456) == "0.000123456");
    CHECK(format_real(1.5) == "1.50000");
    CHECK(format_real(123456.7) == "123457");
    CHECK(format_real(0.0) == "0");
    CHECK(format_real(-1234.567) == "-1234.57");
    CHECK(format_real(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_real(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(format_real(std::nan("")) == "nan");
}

TEST_CASE("rb_saving_percent") {
    SweepCell cel, d2d;
    cel.rbs.mean = 100.0;
    d2d.rbs.mean = 60.0;
    CHECK(rb_saving_percent(cel, d2d) == doctest::Approx(40.0));
    cel.rbs.mean = 0.0;
    CHECK(rb_saving_percent(cel, d2d) == 0.0);
}

TEST_CASE("parallel runs reproduce the serial reference exactly") {
    ExperimentPlan plan = small_plan();
    ExperimentResult serial = run_plan_serial(plan);
    ExperimentResult parallel = run_plan(plan, 2);

    REQUIRE(serial.cells.size() == 4);  // 2 scenarios x 2 sweep points
    REQUIRE(parallel.cells.size() == serial.cells.size());
    for (size_t i = 0; i < serial.cells.size(); ++i) {
        const SweepCell& a = serial.cells[i];
        const SweepCell& b = parallel.cells[i];
        REQUIRE(a.scenario == b.scenario);
        REQUIRE(a.n_active == b.n_active);
        REQUIRE(a.n_seeds == b.n_seeds);
        REQUIRE(same_summary(a.rbs, b.rbs));
        REQUIRE(same_summary(a.delay_ms, b.delay_ms));
        REQUIRE(same_summary(a.energy_j, b.energy_j));
    }

    // block layout: cellular first, n_active ascending, then d2d
    CHECK(serial.cells[0].scenario == Scenario::CellularOnly);
    CHECK(serial.cells[0].n_active == 10);
    CHECK(serial.cells[1].n_active == 20);
    CHECK(serial.cells[2].scenario == Scenario::CellularWithD2d);
    CHECK(serial.cells[2].n_active == 10);
    CHECK(serial.cells[0].n_seeds == 5);

    CHECK_THROWS_AS(run_plan(plan, 0), std::invalid_argument);
}

TEST_CASE("write_outputs emits the five files with the documented schema") {
    TempDir dir("outputs_schema");
    ExperimentPlan plan = small_plan();
    ExperimentResult result = run_plan_serial(plan);
    write_outputs(result, dir.path.string());

    for (const char* name :
         {"metrics.csv", "fig_rb.csv", "fig_delay.csv", "fig_energy.csv", "summary.txt"})
        CHECK(fs::exists(dir.path / name));

    auto metrics = lines_of(slurp(dir.path / "metrics.csv"));
    REQUIRE(metrics.size() == 1 + 3 * result.cells.size());
    CHECK(metrics[0] == "scenario,n_active,metric,mean,ci_half_width,n_seeds");
    auto first = split(metrics[1], ",");
    REQUIRE(first.size() == 6);
    CHECK(first[0] == "cellular");
    CHECK(first[1] == "10");
    CHECK(first[2] == "rbs");
    CHECK(first[5] == "5");
    // metric rows cycle rbs, delay_ms, energy_j
    CHECK(split(metrics[2], ",")[2] == "delay_ms");
    CHECK(split(metrics[3], ",")[2] == "energy_j");
    // second block is the d2d scenario
    CHECK(split(metrics[1 + 3 * 2], ",")[0] == "d2d");

    for (const char* fig : {"fig_rb.csv", "fig_delay.csv", "fig_energy.csv"}) {
        auto rows = lines_of(slurp(dir.path / fig));
        REQUIRE(rows.size() == 1 + plan.sweep_active_users.size());
        CHECK(rows[0] == "n_active,cellular,d2d");
        CHECK(split(rows[1], ",")[0] == "10");
        CHECK(split(rows[2], ",")[0] == "20");
    }

    std::string summary = slurp(dir.path / "summary.txt");
    CHECK(summary.find("rb_saving_%") != std::string::npos);
    CHECK(summary.find("average rb saving across sweep:") != std::string::npos);
}

TEST_CASE("the figure files agree with metrics.csv") {
    TempDir dir("outputs_consistency");
    ExperimentResult result = run_plan_serial(small_plan());
    write_outputs(result, dir.path.string());

    // means in fig_rb.csv are exactly the rbs rows of metrics.csv
    auto metrics = lines_of(slurp(dir.path / "metrics.csv"));
    std::map<std::pair<std::string, std::string>, std::string> rb_mean;
    for (size_t i = 1; i < metrics.size(); ++i) {
        auto f = split(metrics[i], ",");
        if (f[2] == "rbs") rb_mean[{f[0], f[1]}] = f[3];
    }
    auto fig = lines_of(slurp(dir.path / "fig_rb.csv"));
    for (size_t i = 1; i < fig.size(); ++i) {
        auto f = split(fig[i], ",");
        CHECK(f[1] == rb_mean.at({"cellular", f[0]}));
        CHECK(f[2] == rb_mean.at({"d2d", f[0]}));
    }
}

TEST_CASE("summary rb saving is consistent with metrics.csv") {
    TempDir dir("outputs_saving");
    ExperimentResult result = run_plan_serial(small_plan());
    write_outputs(result, dir.path.string());

    std::map<std::string, double> cellular_rbs, d2d_rbs;
    auto metrics = lines_of(slurp(dir.path / "metrics.csv"));
    for (size_t i = 1; i < metrics.size(); ++i) {
        auto f = split(metrics[i], ",");
        if (f[2] != "rbs") continue;
        (f[0] == "cellular" ? cellular_rbs : d2d_rbs)[f[1]] = std::stod(f[3]);
    }

    auto summary = lines_of(slurp(dir.path / "summary.txt"));
    int rows_checked = 0;
    for (const std::string& line : summary) {
        auto f = split(line, "  ");
        if (f.size() < 4) continue;
        auto it = cellular_rbs.find(f[0]);
        if (it == cellular_rbs.end()) continue;
        double expect = (it->second - d2d_rbs.at(f[0])) / it->second * 100.0;
        CHECK(std::stod(f[3]) == doctest::Approx(expect).epsilon(0.001));
        ++rows_checked;
    }
    CHECK(rows_checked == 2);
}

TEST_CASE("repeated identical plans produce byte-identical outputs") {
    TempDir a("outputs_repeat_a"), b("outputs_repeat_b");
    ExperimentPlan plan = small_plan();
    write_outputs(run_plan(plan, 2), a.path.string());
    write_outputs(run_plan(plan, 1), b.path.string());
    for (const char* name :
         {"metrics.csv", "fig_rb.csv", "fig_delay.csv", "fig_energy.csv", "summary.txt"})
        CHECK(slurp(a.path / name) == slurp(b.path / name));
}

TEST_CASE("single-seed plans flag insufficient precision instead of lying") {
    TempDir dir("outputs_single_seed");
    ExperimentPlan plan;
    plan.sweep_active_users = {10};
    plan.seeds = {0};
    ExperimentResult result = run_plan_serial(plan);

    REQUIRE(result.cells.size() == 2);
    CHECK(result.cells[0].n_seeds == 1);
    CHECK(std::isinf(result.cells[0].rbs.ci_half_width));
    CHECK(!result.cells[0].rbs.meets_target);

    write_outputs(result, dir.path.string());
    auto metrics = lines_of(slurp(dir.path / "metrics.csv"));
    auto f = split(metrics[1], ",");
    CHECK(f[4] == "inf");  // half-width column present, flagged unusable
    CHECK(f[5] == "1");
    std::string summary = slurp(dir.path / "summary.txt");
    CHECK(summary.find("above the 2% relative half-width target") != std::string::npos);
}

TEST_CASE("failed writes remove the partial outputs") {
    TempDir dir("outputs_cleanup");
    ExperimentResult result = run_plan_serial(small_plan());

    // Pre-create fig_rb.csv as a directory so the second write fails after
    // metrics.csv already landed.
    fs::create_directories(dir.path / "fig_rb.csv");
    CHECK_THROWS_AS(write_outputs(result, dir.path.string()), std::runtime_error);
    CHECK(!fs::exists(dir.path / "metrics.csv"));
    CHECK(!fs::exists(dir.path / "summary.txt"));

    ExperimentResult empty;
    CHECK_THROWS_AS(write_outputs(empty, dir.path.string()), std::invalid_argument);
}

TEST_CASE("planned_thread_count honors the env cap") {
    unsetenv("D2DSIM_THREADS");
    int hw = planned_thread_count();
    CHECK(hw >= 1);

    setenv("D2DSIM_THREADS", "1", 1);
    CHECK(planned_thread_count() == 1);

    setenv("D2DSIM_THREADS", "999999", 1);
    CHECK(planned_thread_count() == hw);  // capped at the hardware default

    setenv("D2DSIM_THREADS", "garbage", 1);
    CHECK(planned_thread_count() == hw);

    setenv("D2DSIM_THREADS", "0", 1);
    CHECK(planned_thread_count() == hw);

    setenv("D2DSIM_THREADS", "-3", 1);
    CHECK(planned_thread_count() == hw);

    unsetenv("D2DSIM_THREADS");
}
