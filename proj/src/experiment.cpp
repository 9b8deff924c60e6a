#include "d2dsim/experiment.hpp"

#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace d2dsim {

namespace {

constexpr double kConfidence = 0.95;
constexpr double kTargetRelHalfWidth = 0.02;

struct Task {
    Scenario scenario;
    int n_active;
    uint64_t seed;
    size_t cell;  // index into ExperimentResult::cells
};

std::vector<Task> build_tasks(const ExperimentPlan& plan) {
    std::vector<Task> tasks;
    tasks.reserve(2 * plan.sweep_active_users.size() * plan.seeds.size());
    size_t cell = 0;
    for (Scenario sc : {Scenario::CellularOnly, Scenario::CellularWithD2d}) {
        for (int n_active : plan.sweep_active_users) {
            for (uint64_t seed : plan.seeds) tasks.push_back({sc, n_active, seed, cell});
            ++cell;
        }
    }
    return tasks;
}

ScenarioMetrics run_task(const ExperimentPlan& plan, const Task& t) {
    ScenarioConfig cfg = plan.base;
    cfg.scenario = t.scenario;
    cfg.n_active = t.n_active;
    return simulate_scenario(cfg, t.seed);
}

MetricSummary single_run_summary(double value) {
    MetricSummary s;
    s.mean = value;
    s.ci_half_width = std::numeric_limits<double>::infinity();
    s.meets_target = false;
    return s;
}

ExperimentResult aggregate(const ExperimentPlan& plan,
                           const std::vector<Task>& tasks,
                           const std::vector<ScenarioMetrics>& results) {
    size_t n_cells = 2 * plan.sweep_active_users.size();
    std::vector<std::vector<ScenarioMetrics>> per_cell(n_cells);
    for (size_t i = 0; i < tasks.size(); ++i) per_cell[tasks[i].cell].push_back(results[i]);

    ExperimentResult out;
    out.confidence_level = kConfidence;
    out.cells.resize(n_cells);
    for (size_t c = 0; c < n_cells; ++c) {
        SweepCell& cell = out.cells[c];
        cell.scenario = c < plan.sweep_active_users.size() ? Scenario::CellularOnly
                                                           : Scenario::CellularWithD2d;
        cell.n_active = plan.sweep_active_users[c % plan.sweep_active_users.size()];
        cell.n_seeds = static_cast<int>(per_cell[c].size());
        if (cell.n_seeds >= 2) {
            AggregateResult agg = aggregate_runs(per_cell[c], kConfidence);
            cell.rbs = agg.rbs;
            cell.delay_ms = agg.delay_ms;
            cell.energy_j = agg.energy_j;
        } else {
            const ScenarioMetrics& m = per_cell[c].front();
            cell.rbs = single_run_summary(m.rbs_consumed);
            cell.delay_ms = single_run_summary(m.avg_delay_ms);
            cell.energy_j = single_run_summary(m.total_energy_j);
        }
    }
    return out;
}

}  // namespace

int planned_thread_count() {
#ifdef _OPENMP
    int hw = omp_get_max_threads();
#else
    int hw = static_cast<int>(std::thread::hardware_concurrency());
#endif
    if (hw < 1) hw = 1;
    const char* env = std::getenv("D2DSIM_THREADS");
    if (env && *env) {
        char* end = nullptr;
        long cap = std::strtol(env, &end, 10);
        if (end && *end == '\0' && cap >= 1 && cap < hw) return static_cast<int>(cap);
        if (end && *end == '\0' && cap >= hw) return hw;
        // unparsable value: fall through to the hardware default
    }
    return hw;
}

ExperimentResult run_plan_serial(const ExperimentPlan& plan) {
    std::vector<Task> tasks = build_tasks(plan);
    std::vector<ScenarioMetrics> results(tasks.size());
    for (size_t i = 0; i < tasks.size(); ++i) results[i] = run_task(plan, tasks[i]);
    return aggregate(plan, tasks, results);
}

ExperimentResult run_plan(const ExperimentPlan& plan, int threads) {
    if (threads < 1) throw std::invalid_argument("run_plan: thread count must be >= 1");
    std::vector<Task> tasks = build_tasks(plan);
    std::vector<ScenarioMetrics> results(tasks.size());
    std::vector<std::string> errors(tasks.size());
    std::atomic<bool> failed{false};

    // Independent runs; dynamic scheduling because run cost scales with
    // n_active. Exceptions may not cross the parallel region, so they are
    // parked per-task and rethrown after the join.
    long n = static_cast<long>(tasks.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
    for (long i = 0; i < n; ++i) {
        if (failed.load(std::memory_order_relaxed)) continue;
        try {
            results[static_cast<size_t>(i)] = run_task(plan, tasks[static_cast<size_t>(i)]);
        } catch (const std::exception& e) {
            errors[static_cast<size_t>(i)] = e.what();
            failed.store(true, std::memory_order_relaxed);
        }
    }
    if (failed.load()) {
        for (size_t i = 0; i < errors.size(); ++i) {
            if (errors[i].empty()) continue;
            const Task& t = tasks[i];
            throw std::runtime_error("run failed (scenario=" + std::string(to_string(t.scenario)) +
                                     " n_active=" + std::to_string(t.n_active) +
                                     " seed=" + std::to_string(t.seed) + "): " + errors[i]);
        }
    }
    return aggregate(plan, tasks, results);
}

std::string format_real(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (value == 0.0) return "0";
    int exp10 = static_cast<int>(std::floor(std::log10(std::fabs(value))));
    int decimals = 5 - exp10;  // six significant digits
    if (decimals < 0) decimals = 0;
    std::ostringstream out;
    out.imbue(std::locale::classic());
    out << std::fixed << std::setprecision(decimals) << value;
    return out.str();
}

double rb_saving_percent(const SweepCell& cellular, const SweepCell& d2d) {
    if (cellular.rbs.mean == 0.0) return 0.0;
    return (cellular.rbs.mean - d2d.rbs.mean) / cellular.rbs.mean * 100.0;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << body;
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string render_metrics_csv(const ExperimentResult& r) {
    std::string body = "scenario,n_active,metric,mean,ci_half_width,n_seeds\n";
    for (const SweepCell& c : r.cells) {
        auto row = [&](const char* name, const MetricSummary& s) {
            body += std::string(to_string(c.scenario)) + "," + std::to_string(c.n_active) + "," +
                    name + "," + format_real(s.mean) + "," + format_real(s.ci_half_width) + "," +
                    std::to_string(c.n_seeds) + "\n";
        };
        row("rbs", c.rbs);
        row("delay_ms", c.delay_ms);
        row("energy_j", c.energy_j);
    }
    return body;
}

std::string render_figure_csv(const ExperimentResult& r,
                              MetricSummary SweepCell::*metric) {
    size_t half = r.cells.size() / 2;
    std::string body = "n_active,cellular,d2d\n";
    for (size_t i = 0; i < half; ++i) {
        const SweepCell& cel = r.cells[i];
        const SweepCell& d2d = r.cells[half + i];
        body += std::to_string(cel.n_active) + "," + format_real((cel.*metric).mean) + "," +
                format_real((d2d.*metric).mean) + "\n";
    }
    return body;
}

std::string render_summary(const ExperimentResult& r) {
    size_t half = r.cells.size() / 2;
    std::ostringstream out;
    out.imbue(std::locale::classic());
    out << "uplink offloading experiment, " << format_real(r.confidence_level * 100)
        << "% Student-t intervals, " << r.cells.front().n_seeds << " seed(s) per point\n\n";
    out << "n_active  rbs(cellular)  rbs(d2d)  rb_saving_%  delay_ms(cellular)  delay_ms(d2d)"
           "  energy_j(cellular)  energy_j(d2d)\n";
    double saving_sum = 0.0;
    for (size_t i = 0; i < half; ++i) {
        const SweepCell& cel = r.cells[i];
        const SweepCell& d2d = r.cells[half + i];
        double saving = rb_saving_percent(cel, d2d);
        saving_sum += saving;
        out << cel.n_active << "  " << format_real(cel.rbs.mean) << "  "
            << format_real(d2d.rbs.mean) << "  " << format_real(saving) << "  "
            << format_real(cel.delay_ms.mean) << "  " << format_real(d2d.delay_ms.mean) << "  "
            << format_real(cel.energy_j.mean) << "  " << format_real(d2d.energy_j.mean) << "\n";
    }
    out << "\naverage rb saving across sweep: " << format_real(saving_sum / half) << "%\n";

    int misses = 0;
    for (const SweepCell& c : r.cells)
        misses += !c.rbs.meets_target + !c.delay_ms.meets_target + !c.energy_j.meets_target;
    if (misses == 0)
        out << "precision: every metric within the 2% relative half-width target\n";
    else
        out << "precision: " << misses << " metric(s) above the 2% relative half-width target\n";
    return out.str();
}

}  // namespace

void write_outputs(const ExperimentResult& result, const std::string& output_dir) {
    if (result.cells.empty() || result.cells.size() % 2 != 0)
        throw std::invalid_argument("write_outputs: result must hold both scenario blocks");
    namespace fs = std::filesystem;
    fs::path dir(output_dir);
    fs::create_directories(dir);
    const std::array<const char*, 5> names = {"metrics.csv", "fig_rb.csv", "fig_delay.csv",
                                              "fig_energy.csv", "summary.txt"};
    try {
        write_file(dir / names[0], render_metrics_csv(result));
        write_file(dir / names[1], render_figure_csv(result, &SweepCell::rbs));
        write_file(dir / names[2], render_figure_csv(result, &SweepCell::delay_ms));
        write_file(dir / names[3], render_figure_csv(result, &SweepCell::energy_j));
        write_file(dir / names[4], render_summary(result));
    } catch (...) {
        std::error_code ec;
        for (const char* name : names) fs::remove(dir / name, ec);
        throw;
    }
}

}  // namespace d2dsim
