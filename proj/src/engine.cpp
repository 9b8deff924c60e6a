#include "d2dsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace d2dsim {

namespace {

constexpr uint64_t kTopologyStream = 0x746f706fULL;
constexpr uint64_t kHarqStream = 0x68617271ULL;
constexpr uint64_t kFadingStream = 0x66616465ULL;

double cell_end_time_ms(const CellKey& cell) {
    return cell.frame * 10.0 + cell.subframe + 1.0;
}

}  // namespace

HarqOutcome transmit_with_harq(int k_rbs, double p_fail, int max_attempts, Rng& rng) {
    if (k_rbs < 1) throw std::invalid_argument("transmit_with_harq: k_rbs must be >= 1");
    if (p_fail < 0.0 || p_fail >= 1.0)
        throw std::invalid_argument("transmit_with_harq: p_fail outside [0,1)");
    if (max_attempts < 1)
        throw std::invalid_argument("transmit_with_harq: max_attempts must be >= 1");
    HarqOutcome out;
    for (int i = 0; i < k_rbs; ++i) {
        bool delivered = false;
        for (int a = 0; a < max_attempts && !delivered; ++a) {
            ++out.rb_transmissions;
            delivered = rng.uniform01() >= p_fail;
        }
        if (!delivered) out.success = false;
    }
    return out;
}

double energy_consumed_j(long rb_transmissions, double pt_dbm, double tti_s,
                         long control_overhead_rbs, double control_pt_dbm) {
    if (rb_transmissions < 0 || control_overhead_rbs < 0 || tti_s < 0.0)
        throw std::invalid_argument("energy_consumed_j: negative count");
    auto watts = [](double dbm) { return std::pow(10.0, dbm / 10.0) / 1000.0; };
    return static_cast<double>(rb_transmissions) * watts(pt_dbm) * tti_s +
           static_cast<double>(control_overhead_rbs) * watts(control_pt_dbm) * tti_s;
}

struct SimulationRun::Stage {
    enum class Kind { Control, Data };
    Kind kind = Kind::Data;
    Leg leg = Leg::CellularDirect;
    int tx = 0;
    int rx = kEnbId;
    double tx_power_dbm = 0.0;
    double distance_m = 0.0;
    double location_loss_db = 0.0;  // L_a on this link; UE<->eNB links only
    std::deque<int> units;          // attempts already spent, per pending unit
    std::optional<SubframeRef> not_before;
    bool resolve_selection_after = false;  // set on the discovery control stage
    int cached_frame = -1;
    double cached_p_fail = 0.0;
};

struct SimulationRun::Session {
    SessionState st;
    std::vector<Stage> stages;
    size_t current = 0;
    int offloader = -1;
    long tx_rbs_ptmax = 0;  // direct + relay-leg transmissions at pt_max
    long tx_rbs_leg1 = 0;   // UE->UE transmissions at the selected D2D level

    bool terminal() const {
        return st.phase == SessionPhase::Done || st.phase == SessionPhase::Failed;
    }
};

SimulationRun::~SimulationRun() = default;

SimulationRun::SimulationRun(ScenarioConfig config, Topology topology, uint64_t seed)
    : config_(std::move(config)),
      topology_(std::move(topology)),
      fading_(mix_seed(seed, kFadingStream), config_.channel),
      harq_rng_(mix_seed(seed, kHarqStream)) {
    for (size_t i = 0; i < topology_.ues.size(); ++i) {
        const UeRecord& ue = topology_.ues[i];
        if (ue.id != static_cast<int>(i))
            throw std::invalid_argument("SimulationRun: UE ids must be dense 0..n-1");
        bool active = ue.activity == Activity::ActiveTransmitter;
        if (active != (ue.payload_bits > 0))
            throw std::invalid_argument("SimulationRun: payload_bits > 0 iff active (UE " +
                                        std::to_string(ue.id) + ")");
    }

    // Classification against the frame-0 channel, as seen at SR time.
    std::map<int, double> direct_snr;
    for (const UeRecord& ue : topology_.ues) {
        if (ue.activity != Activity::ActiveTransmitter) continue;
        double d = distance(ue.position, topology_.enb_position);
        double loss = fading_.loss_db(ue.id, kEnbId, d, ue.location_loss_db, 0);
        direct_snr[ue.id] = snr_db(received_power_dbm(config_.channel.pt_max_dbm, loss),
                                   config_.channel.noise_power_dbm);
    }
    topology_ = classify_users(std::move(topology_), direct_snr, config_.snr_th_db);

    start_session_pipelines();
}

void SimulationRun::start_session_pipelines() {
    for (const UeRecord& ue : topology_.ues) {
        if (ue.activity != Activity::ActiveTransmitter) continue;
        Session s;
        s.st.session_id = static_cast<int>(sessions_.size());
        s.st.requester = ue.id;
        bool d2d_path = config_.scenario == Scenario::CellularWithD2d &&
                        ue.user_type == UserType::Type2;
        if (d2d_path && config_.discovery_control_rbs > 0) {
            Stage c;
            c.kind = Stage::Kind::Control;
            c.leg = Leg::CellularDirect;
            c.tx = ue.id;
            c.rx = kEnbId;
            c.tx_power_dbm = config_.channel.pt_max_dbm;
            c.units.assign(static_cast<size_t>(config_.discovery_control_rbs), 0);
            c.resolve_selection_after = true;
            s.stages.push_back(std::move(c));
            s.st.phase = SessionPhase::Discovery;
            sessions_.push_back(std::move(s));
        } else if (d2d_path) {
            sessions_.push_back(std::move(s));
            resolve_selection(sessions_.back(), 0);
        } else {
            long k = required_rbs(ue.payload_bits, config_.placement.bits_per_rb);
            Stage d;
            d.kind = Stage::Kind::Data;
            d.leg = Leg::CellularDirect;
            d.tx = ue.id;
            d.rx = kEnbId;
            d.tx_power_dbm = config_.channel.pt_max_dbm;
            d.distance_m = distance(ue.position, topology_.enb_position);
            d.location_loss_db = ue.location_loss_db;
            d.units.assign(static_cast<size_t>(k), 0);
            s.stages.push_back(std::move(d));
            s.st.phase = SessionPhase::Scheduling;
            s.st.decision.mode = PathMode::Direct;
            s.st.decision.x_vector = {1};
            s.st.decision.total_cost = 0.0;
            sessions_.push_back(std::move(s));
        }
    }
}

void SimulationRun::resolve_selection(Session& s, int frame) {
    const UeRecord& req = topology_.ue(s.st.requester);
    long k = required_rbs(req.payload_bits, config_.placement.bits_per_rb);
    double noise = config_.channel.noise_power_dbm;
    double pt_max = config_.channel.pt_max_dbm;

    auto leg_cost = [&](double snr) {
        double p_fail = rb_failure_probability(snr, config_.fail);
        double p = config_.harq_literal_paper_formula ? p_fail : 1.0 - p_fail;
        return link_cost({k, p, config_.c_per_rb});
    };

    CandidateSet cands = neighbors_within(topology_, req.id, config_.d2d_radius_m);
    std::vector<OffloadOption> options;
    std::vector<double> option_level_dbm;
    std::vector<double> option_dist_ij;
    for (int j : cands.candidate_ids) {
        if (busy_offloaders_.count(j)) continue;  // serving another session
        const UeRecord& off = topology_.ue(j);
        double d_ij = distance(req.position, off.position);
        // No location loss on the short UE-UE link; L_a models penetration
        // toward the macro cell.
        double loss_ij = fading_.loss_db(req.id, j, d_ij, 0.0, frame);
        double required_dbm = config_.snr_th_db + noise + loss_ij;
        auto level = d2d_power_level_dbm(required_dbm, config_.power_levels_dbm);
        if (!level) continue;  // cannot meet SNR_th at any level
        double snr_ij = snr_db(received_power_dbm(*level, loss_ij), noise);
        double d_je = distance(off.position, topology_.enb_position);
        double loss_je = fading_.loss_db(j, kEnbId, d_je, off.location_loss_db, frame);
        double snr_je = snr_db(received_power_dbm(pt_max, loss_je), noise);
        options.push_back({j, leg_cost(snr_ij), leg_cost(snr_je), snr_ij, snr_je});
        option_level_dbm.push_back(*level);
        option_dist_ij.push_back(d_ij);
    }

    double d_ie = distance(req.position, topology_.enb_position);
    double loss_ie = fading_.loss_db(req.id, kEnbId, d_ie, req.location_loss_db, frame);
    double snr_ie = snr_db(received_power_dbm(pt_max, loss_ie), noise);
    DirectOption direct{leg_cost(snr_ie), snr_ie};

    s.st.decision = select_path(direct, options, config_.snr_th_db);

    if (s.st.decision.mode == PathMode::Offload) {
        size_t idx = 0;
        for (size_t i = 0; i < options.size(); ++i) {
            if (s.st.decision.x_vector[1 + i]) idx = i;
        }
        const UeRecord& off = topology_.ue(s.st.decision.offloader_id);
        s.offloader = off.id;
        busy_offloaders_.insert(off.id);
        s.st.leg1_power_dbm = option_level_dbm[idx];

        if (config_.handshake_control_rbs > 0) {
            Stage h;
            h.kind = Stage::Kind::Control;
            h.leg = Leg::CellularDirect;
            h.tx = req.id;
            h.rx = kEnbId;
            h.tx_power_dbm = pt_max;
            h.units.assign(static_cast<size_t>(config_.handshake_control_rbs), 0);
            s.stages.push_back(std::move(h));
        }
        Stage leg1;
        leg1.kind = Stage::Kind::Data;
        leg1.leg = Leg::D2dOffload;
        leg1.tx = req.id;
        leg1.rx = off.id;
        leg1.tx_power_dbm = option_level_dbm[idx];
        leg1.distance_m = option_dist_ij[idx];
        leg1.location_loss_db = 0.0;
        leg1.units.assign(static_cast<size_t>(k), 0);
        s.stages.push_back(std::move(leg1));

        Stage leg2;
        leg2.kind = Stage::Kind::Data;
        leg2.leg = Leg::D2dRelay;
        leg2.tx = off.id;
        leg2.rx = kEnbId;
        leg2.tx_power_dbm = pt_max;
        leg2.distance_m = distance(off.position, topology_.enb_position);
        leg2.location_loss_db = off.location_loss_db;
        leg2.units.assign(static_cast<size_t>(k), 0);
        // not_before is pinned when leg 1 finishes
        s.stages.push_back(std::move(leg2));
        s.st.phase = SessionPhase::Handshaking;
    } else {
        // Direct survived the filter, or nothing did: transmit directly at
        // pt_max either way, as in the cellular-only scenario.
        Stage d;
        d.kind = Stage::Kind::Data;
        d.leg = Leg::CellularDirect;
        d.tx = req.id;
        d.rx = kEnbId;
        d.tx_power_dbm = pt_max;
        d.distance_m = d_ie;
        d.location_loss_db = req.location_loss_db;
        d.units.assign(static_cast<size_t>(k), 0);
        s.stages.push_back(std::move(d));
        s.st.phase = SessionPhase::Scheduling;
    }
}

void SimulationRun::fail_session(Session& s, const CellKey& cell) {
    s.st.phase = SessionPhase::Failed;
    s.st.completion_time_ms = cell_end_time_ms(cell);
    if (s.offloader >= 0) busy_offloaders_.erase(s.offloader);
}

void SimulationRun::advance_session(Session& s, const CellKey& cell) {
    bool was_control = s.stages[s.current].kind == Stage::Kind::Control;
    bool resolve = s.stages[s.current].resolve_selection_after;
    ++s.current;
    if (resolve) resolve_selection(s, cell.frame);  // appends the next stages

    if (s.current >= s.stages.size()) {
        s.st.phase = SessionPhase::Done;
        s.st.completion_time_ms = cell_end_time_ms(cell);
        if (s.offloader >= 0) busy_offloaders_.erase(s.offloader);
        return;
    }
    Stage& next = s.stages[s.current];
    if (next.leg == Leg::D2dRelay) {
        // relay strictly after the last UE->UE cell of this session
        next.not_before = cell.subframe_ref();
    }
    if (was_control && next.kind == Stage::Kind::Data)
        s.st.data_start_time_ms = cell_end_time_ms(cell);
    if (next.kind == Stage::Kind::Data) s.st.phase = SessionPhase::Scheduling;
}

void SimulationRun::realize_cell(Session& s, const Grant& grant, int frame) {
    if (s.terminal()) {
        // Grants issued before the session died this frame still go out on
        // air; they consume the cell and energy but carry nothing.
        Stage& st = s.stages[s.current];
        ++s.st.rbs_consumed;
        (st.leg == Leg::D2dOffload ? s.tx_rbs_leg1 : s.tx_rbs_ptmax)++;
        return;
    }
    Stage& st = s.stages[s.current];
    if (st.kind == Stage::Kind::Control) {
        st.units.pop_front();
        ++s.st.control_rbs_consumed;
        if (st.units.empty()) advance_session(s, grant.cell);
        return;
    }
    s.st.phase = SessionPhase::Communication;
    ++s.st.rbs_consumed;
    (st.leg == Leg::D2dOffload ? s.tx_rbs_leg1 : s.tx_rbs_ptmax)++;
    double p = stage_p_fail(st, frame);
    if (harq_rng_.uniform01() < p) {
        int attempts = ++st.units.front();
        if (attempts >= config_.max_harq_attempts) fail_session(s, grant.cell);
    } else {
        st.units.pop_front();
        if (st.units.empty()) advance_session(s, grant.cell);
    }
}

double SimulationRun::stage_p_fail(Stage& stage, int frame) {
    if (stage.cached_frame != frame) {
        double loss = fading_.loss_db(stage.tx, stage.rx, stage.distance_m,
                                      stage.location_loss_db, frame);
        double snr = snr_db(received_power_dbm(stage.tx_power_dbm, loss),
                            config_.channel.noise_power_dbm);
        stage.cached_p_fail = rb_failure_probability(snr, config_.fail);
        stage.cached_frame = frame;
    }
    return stage.cached_p_fail;
}

ScenarioMetrics SimulationRun::run() {
    auto live_sessions = [&] {
        return std::count_if(sessions_.begin(), sessions_.end(),
                             [](const Session& s) { return !s.terminal(); });
    };

    int frame = 0;
    while (live_sessions() > 0) {
        if (frame >= config_.max_frames)
            throw std::runtime_error("SimulationRun: frame budget exhausted");
        FrameGrid grid = build_frame(frame, config_.tdd_pattern);

        std::vector<ScheduleRequest> phase1, phase2;
        for (Session& s : sessions_) {
            if (s.terminal()) continue;
            const Stage& st = s.stages[s.current];
            ScheduleRequest r{s.st.session_id,
                              st.tx,
                              st.rx,
                              st.leg,
                              static_cast<int>(st.units.size()),
                              st.not_before};
            (phase_for(st.leg) == Phase::Phase1 ? phase1 : phase2).push_back(r);
        }
        ScheduleOutcome o1 = round_robin_schedule(std::move(phase1), grid);
        ScheduleOutcome o2 = round_robin_schedule(std::move(phase2), grid);

        std::vector<Grant> grants;
        grants.reserve(o1.grants.size() + o2.grants.size());
        grants.insert(grants.end(), o1.grants.begin(), o1.grants.end());
        grants.insert(grants.end(), o2.grants.begin(), o2.grants.end());
        std::sort(grants.begin(), grants.end(),
                  [](const Grant& a, const Grant& b) { return a.cell < b.cell; });

        for (const Grant& g : grants)
            realize_cell(sessions_[static_cast<size_t>(g.entry.session_id)], g, frame);

        occupied_cells_ += static_cast<long>(grid.allocations().size());
        ++frame;
        frames_elapsed_ = frame;
    }

    for (Session& s : sessions_) {
        s.st.energy_j =
            energy_consumed_j(s.tx_rbs_ptmax, config_.channel.pt_max_dbm, config_.tti_s,
                              s.st.control_rbs_consumed, config_.channel.pt_max_dbm) +
            energy_consumed_j(s.tx_rbs_leg1, s.st.leg1_power_dbm, config_.tti_s, 0, 0.0);
    }
    session_states_.clear();
    for (const Session& s : sessions_) session_states_.push_back(s.st);
    return collect_metrics();
}

ScenarioMetrics SimulationRun::collect_metrics() const {
    ScenarioMetrics m;
    m.rbs_consumed = static_cast<double>(occupied_cells_);
    m.frames_elapsed = frames_elapsed_;
    double delay_sum = 0.0;
    int delay_n = 0;
    for (const SessionState& st : session_states_) {
        m.data_rb_transmissions += st.rbs_consumed;
        m.control_rbs += st.control_rbs_consumed;
        m.total_energy_j += st.energy_j;
        bool done = st.phase == SessionPhase::Done;
        if (done)
            ++m.sessions_completed;
        else
            ++m.sessions_failed;
        if (done || config_.delay_counts_failed) {
            double start = config_.delay_includes_control ? st.first_request_time_ms
                                                          : st.data_start_time_ms;
            delay_sum += st.completion_time_ms - start;
            ++delay_n;
        }
    }
    if (delay_n > 0) m.avg_delay_ms = delay_sum / delay_n;
    return m;
}

ScenarioMetrics simulate_scenario(const ScenarioConfig& config, uint64_t seed) {
    Rng topo_rng(mix_seed(seed, kTopologyStream));
    Topology topo = place_ues(config.n_total, config.n_active, config.type2_fraction,
                              config.placement, topo_rng);
    SimulationRun run(config, std::move(topo), seed);
    return run.run();
}

MetricSummary summarize(const std::vector<double>& samples, double confidence_level,
                        double target_rel_half_width) {
    if (samples.size() < 2)
        throw std::invalid_argument("summarize: need at least 2 runs");
    if (confidence_level <= 0.0 || confidence_level >= 1.0)
        throw std::invalid_argument("summarize: confidence level outside (0,1)");
    double n = static_cast<double>(samples.size());
    double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : samples) ss += (x - mean) * (x - mean);
    double sd = std::sqrt(ss / (n - 1.0));

    MetricSummary out;
    out.mean = mean;
    if (sd > 0.0) {
        boost::math::students_t dist(n - 1.0);
        double tq = boost::math::quantile(dist, 0.5 + confidence_level / 2.0);
        out.ci_half_width = tq * sd / std::sqrt(n);
    }
    out.meets_target = mean == 0.0 ? out.ci_half_width == 0.0
                                   : out.ci_half_width <= target_rel_half_width * std::fabs(mean);
    return out;
}

AggregateResult aggregate_runs(const std::vector<ScenarioMetrics>& per_seed,
                               double confidence_level) {
    if (per_seed.size() < 2)
        throw std::invalid_argument("aggregate_runs: need at least 2 runs");
    std::vector<double> rbs, delay, energy;
    for (const ScenarioMetrics& m : per_seed) {
        rbs.push_back(m.rbs_consumed);
        delay.push_back(m.avg_delay_ms);
        energy.push_back(m.total_energy_j);
    }
    AggregateResult out;
    out.rbs = summarize(rbs, confidence_level);
    out.delay_ms = summarize(delay, confidence_level);
    out.energy_j = summarize(energy, confidence_level);
    out.n_runs = static_cast<int>(per_seed.size());
    out.confidence_level = confidence_level;
    return out;
}

}  // namespace d2dsim
