#pragma once

#include <cstdint>
#include <deque>
#include <set>
#include <string>
#include <vector>

#include "d2dsim/channel.hpp"
#include "d2dsim/netmodel.hpp"
#include "d2dsim/rng.hpp"
#include "d2dsim/scheduler.hpp"
#include "d2dsim/selection.hpp"

namespace d2dsim {

enum class Scenario { CellularOnly, CellularWithD2d };

struct ScenarioConfig {
    Scenario scenario = Scenario::CellularWithD2d;
    int n_total = 100;
    int n_active = 50;
    double type2_fraction = 0.4;
    PlacementParams placement;
    ChannelParams channel;
    double snr_th_db = 10.0;
    double d2d_radius_m = 20.0;
    std::vector<double> power_levels_dbm{-5.0, 5.0, 15.0};
    FailModel fail;
    double c_per_rb = 1.0;
    // Cost the selection with r = 1/p_fail taken verbatim instead of
    // 1/(1 - p_fail); for fidelity experiments only.
    bool harq_literal_paper_formula = false;
    int discovery_control_rbs = 2;  // charged per D2D session (initiation+discovery)
    int handshake_control_rbs = 2;  // charged only when an offloader is selected
    int max_harq_attempts = 64;     // per RB; exhausting it fails the session
    std::string tdd_pattern{kDefaultTddPattern};
    bool delay_includes_control = true;
    bool delay_counts_failed = true;
    double tti_s = 0.001;
    int max_frames = 100000;
};

enum class SessionPhase {
    Initiation,
    Discovery,
    Handshaking,
    Scheduling,
    Communication,
    Done,
    Failed,
};

struct SessionState {
    int session_id = 0;
    int requester = 0;
    SessionPhase phase = SessionPhase::Initiation;
    PathDecision decision;
    long rbs_consumed = 0;          // data RB transmissions, retries included
    long control_rbs_consumed = 0;
    double first_request_time_ms = 0.0;
    double completion_time_ms = 0.0;  // terminal time (Done or Failed)
    double data_start_time_ms = 0.0;  // when the control phases finished
    double energy_j = 0.0;
    double leg1_power_dbm = 0.0;  // D2D transmit level, when offloading
};

struct HarqOutcome {
    long rb_transmissions = 0;
    bool success = true;
};

// Per-RB geometric retransmission: each of the k RBs is attempted until it
// succeeds or max_attempts is spent. Success means every RB got through.
HarqOutcome transmit_with_harq(int k_rbs, double p_fail, int max_attempts, Rng& rng);

// rb_transmissions at pt_dbm plus control overhead at control_pt_dbm, each
// lasting one TTI.
double energy_consumed_j(long rb_transmissions, double pt_dbm, double tti_s,
                         long control_overhead_rbs, double control_pt_dbm);

// Aggregates of one (config, seed) run. rbs_consumed counts every occupied
// uplink grid cell of the traffic epoch, control included.
struct ScenarioMetrics {
    double rbs_consumed = 0.0;
    double avg_delay_ms = 0.0;
    double total_energy_j = 0.0;
    int sessions_completed = 0;
    int sessions_failed = 0;
    long data_rb_transmissions = 0;
    long control_rbs = 0;
    int frames_elapsed = 0;
};

// One simulation run over an explicit topology. Owns all mutable state, so
// independent runs can execute in parallel.
class SimulationRun {
public:
    SimulationRun(ScenarioConfig config, Topology topology, uint64_t seed);
    ~SimulationRun();  // out of line: Session is private to the implementation
    SimulationRun(const SimulationRun&) = delete;
    SimulationRun& operator=(const SimulationRun&) = delete;

    ScenarioMetrics run();

    const Topology& topology() const { return topology_; }
    const std::vector<SessionState>& sessions() const { return session_states_; }
    long occupied_cells() const { return occupied_cells_; }

private:
    struct Stage;
    struct Session;

    void start_session_pipelines();
    void resolve_selection(Session& s, int frame);
    void advance_session(Session& s, const CellKey& cell);
    void fail_session(Session& s, const CellKey& cell);
    void realize_cell(Session& s, const Grant& grant, int frame);
    double stage_p_fail(Stage& stage, int frame);
    ScenarioMetrics collect_metrics() const;

    ScenarioConfig config_;
    Topology topology_;
    FadingField fading_;
    Rng harq_rng_;
    std::vector<Session> sessions_;
    std::vector<SessionState> session_states_;
    std::set<int> busy_offloaders_;
    long occupied_cells_ = 0;
    int frames_elapsed_ = 0;
};

// Places the population, classifies users against the frame-0 channel, and
// drives every session to Done or Failed. Bit-identical for identical
// (config, seed).
ScenarioMetrics simulate_scenario(const ScenarioConfig& config, uint64_t seed);

struct MetricSummary {
    double mean = 0.0;
    double ci_half_width = 0.0;
    bool meets_target = true;  // relative half-width within the 2% goal
};

// Sample mean and Student-t confidence half-width.
MetricSummary summarize(const std::vector<double>& samples, double confidence_level,
                        double target_rel_half_width = 0.02);

struct AggregateResult {
    MetricSummary rbs;
    MetricSummary delay_ms;
    MetricSummary energy_j;
    int n_runs = 0;
    double confidence_level = 0.95;
};

// Requires at least two runs.
AggregateResult aggregate_runs(const std::vector<ScenarioMetrics>& per_seed,
                               double confidence_level);

}  // namespace d2dsim
