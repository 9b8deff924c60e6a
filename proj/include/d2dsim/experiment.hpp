#pragma once

#include <string>
#include <vector>

#include "d2dsim/config.hpp"

namespace d2dsim {

// Aggregated statistics for one (scenario, active-user count) sweep point.
// With a single seed the half-widths are +inf and the precision flags are
// false: one run says nothing about spread.
struct SweepCell {
    Scenario scenario = Scenario::CellularOnly;
    int n_active = 0;
    int n_seeds = 0;
    MetricSummary rbs;
    MetricSummary delay_ms;
    MetricSummary energy_j;
};

struct ExperimentResult {
    // cellular block first, then d2d, n_active ascending within each
    std::vector<SweepCell> cells;
    double confidence_level = 0.95;
};

// Worker threads run_plan may use: D2DSIM_THREADS caps the hardware default
// when set to a positive integer.
int planned_thread_count();

// Runs every (scenario, n_active, seed) combination of the plan. The two
// variants produce identical results: runs share no mutable state, and
// aggregation happens in a fixed order after all runs complete. The serial
// one is the reference the parallel one is benchmarked and tested against.
ExperimentResult run_plan_serial(const ExperimentPlan& plan);
ExperimentResult run_plan(const ExperimentPlan& plan, int threads);

// 6-significant-digit fixed-notation rendering used by every output file.
std::string format_real(double value);

// Percentage of RBs saved by d2d relative to cellular at one sweep point.
double rb_saving_percent(const SweepCell& cellular, const SweepCell& d2d);

// Writes metrics.csv, fig_rb.csv, fig_delay.csv, fig_energy.csv and
// summary.txt into output_dir (created if needed). If anything fails
// mid-way, the partial files are removed before the error propagates.
void write_outputs(const ExperimentResult& result, const std::string& output_dir);

}  // namespace d2dsim
