#include "d2dsim/config.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

namespace d2dsim {

using nlohmann::json;

ExperimentPlan::ExperimentPlan() {
    seeds.resize(100);
    std::iota(seeds.begin(), seeds.end(), uint64_t{0});
}

const char* to_string(Scenario scenario) {
    return scenario == Scenario::CellularOnly ? "cellular" : "d2d";
}

Scenario scenario_from_string(const std::string& name) {
    if (name == "cellular") return Scenario::CellularOnly;
    if (name == "d2d") return Scenario::CellularWithD2d;
    throw ConfigError("unknown scenario '" + name + "' (expected cellular or d2d)");
}

namespace {

// Collects complaints so a bad document reports everything wrong at once.
struct Checker {
    std::vector<std::string> problems;

    void require(bool ok, const std::string& message) {
        if (!ok) problems.push_back(message);
    }
    void finish() const {
        if (problems.empty()) return;
        std::string joined = "invalid configuration:";
        for (const std::string& p : problems) joined += "\n  - " + p;
        throw ConfigError(joined);
    }
};

// Reads known keys out of `section`, complains about unknown ones. Getters
// come typed so a wrong JSON type names the offending field.
struct Section {
    const json& node;
    std::string prefix;
    std::set<std::string> seen;

    Section(const json& n, std::string p) : node(n), prefix(std::move(p)) {
        if (!node.is_object())
            throw ConfigError(prefix.empty() ? std::string("top level must be an object")
                                             : prefix + " must be an object");
    }

    std::string path(const std::string& key) const {
        return prefix.empty() ? key : prefix + "." + key;
    }

    template <typename T>
    void get(const std::string& key, T& out) {
        seen.insert(key);
        auto it = node.find(key);
        if (it == node.end()) return;
        try {
            out = it->get<T>();
        } catch (const json::exception&) {
            throw ConfigError("field '" + path(key) + "' has the wrong type");
        }
    }

    bool has(const std::string& key) {
        seen.insert(key);
        return node.contains(key);
    }

    const json& child(const std::string& key) {
        seen.insert(key);
        return node.at(key);
    }

    void reject_unknown() const {
        for (auto it = node.begin(); it != node.end(); ++it) {
            if (!seen.count(it.key()))
                throw ConfigError("unknown configuration key '" + path(it.key()) + "'");
        }
    }
};

void read_topology(const json& node, ScenarioConfig& cfg) {
    Section s(node, "topology");
    s.get("n_total", cfg.n_total);
    s.get("n_active", cfg.n_active);
    s.get("type2_fraction", cfg.type2_fraction);
    s.get("cell_radius_m", cfg.placement.cell_radius_m);
    s.get("type2_loss_min_db", cfg.placement.type2_loss_min_db);
    s.get("type2_loss_max_db", cfg.placement.type2_loss_max_db);
    s.get("demand_min_rbs", cfg.placement.demand_min_rbs);
    s.get("demand_max_rbs", cfg.placement.demand_max_rbs);
    s.get("bits_per_rb", cfg.placement.bits_per_rb);
    s.reject_unknown();
}

void read_channel(const json& node, ScenarioConfig& cfg) {
    Section s(node, "channel");
    s.get("gamma", cfg.channel.gamma);
    s.get("freq_mhz", cfg.channel.freq_mhz);
    s.get("shadow_sigma_db", cfg.channel.shadow_sigma_db);
    s.get("noise_power_dbm", cfg.channel.noise_power_dbm);
    s.get("pt_max_dbm", cfg.channel.pt_max_dbm);
    std::string model;
    s.get("loss_model", model);
    if (!model.empty()) {
        if (model == "log_distance")
            cfg.channel.loss_model = LossModel::LogDistance;
        else if (model == "paper_literal")
            cfg.channel.loss_model = LossModel::PaperLiteral;
        else
            throw ConfigError("channel.loss_model must be log_distance or paper_literal, got '" +
                              model + "'");
    }
    s.reject_unknown();
}

void read_link(const json& node, ScenarioConfig& cfg) {
    Section s(node, "link");
    s.get("snr_th_db", cfg.snr_th_db);
    s.get("c_per_rb", cfg.c_per_rb);
    s.get("harq_literal_paper_formula", cfg.harq_literal_paper_formula);
    s.reject_unknown();
}

void read_fail_model(const json& node, ScenarioConfig& cfg) {
    Section s(node, "fail_model");
    s.get("p_floor", cfg.fail.p_floor);
    s.get("p_ceil", cfg.fail.p_ceil);
    s.get("k", cfg.fail.k);
    s.get("s_mid_db", cfg.fail.s_mid_db);
    s.reject_unknown();
}

void read_d2d(const json& node, ScenarioConfig& cfg) {
    Section s(node, "d2d");
    s.get("radius_m", cfg.d2d_radius_m);
    s.get("power_levels_dbm", cfg.power_levels_dbm);
    s.get("discovery_control_rbs", cfg.discovery_control_rbs);
    s.get("handshake_control_rbs", cfg.handshake_control_rbs);
    s.reject_unknown();
}

void read_engine(const json& node, ScenarioConfig& cfg) {
    Section s(node, "engine");
    s.get("max_harq_attempts", cfg.max_harq_attempts);
    s.get("tdd_pattern", cfg.tdd_pattern);
    s.get("delay_includes_control", cfg.delay_includes_control);
    s.get("delay_counts_failed", cfg.delay_counts_failed);
    s.get("tti_s", cfg.tti_s);
    s.get("max_frames", cfg.max_frames);
    s.reject_unknown();
}

void read_experiment(const json& node, ExperimentPlan& plan) {
    Section s(node, "experiment");
    s.get("sweep_active_users", plan.sweep_active_users);
    s.get("seeds", plan.seeds);
    s.get("output_dir", plan.output_dir);
    s.reject_unknown();
}

void validate_plan(const ExperimentPlan& plan) {
    const ScenarioConfig& c = plan.base;
    Checker ck;
    ck.require(c.n_total >= 1, "topology.n_total must be >= 1");
    ck.require(c.n_active >= 0, "topology.n_active must be >= 0");
    ck.require(c.n_active <= c.n_total, "topology.n_active must not exceed n_total");
    ck.require(c.type2_fraction >= 0.0 && c.type2_fraction <= 1.0,
               "topology.type2_fraction must lie in [0,1]");
    ck.require(c.placement.cell_radius_m > 0.0, "topology.cell_radius_m must be positive");
    ck.require(c.placement.type2_loss_min_db >= 0.0 &&
                   c.placement.type2_loss_min_db <= c.placement.type2_loss_max_db,
               "topology.type2_loss_min_db must lie in [0, type2_loss_max_db]");
    ck.require(c.placement.demand_min_rbs >= 1, "topology.demand_min_rbs must be >= 1");
    ck.require(c.placement.demand_min_rbs <= c.placement.demand_max_rbs,
               "topology.demand_min_rbs must not exceed demand_max_rbs");
    ck.require(c.placement.bits_per_rb >= 1, "topology.bits_per_rb must be >= 1");

    ck.require(c.channel.gamma > 0.0, "channel.gamma must be positive");
    ck.require(c.channel.freq_mhz > 0.0, "channel.freq_mhz must be positive");
    ck.require(c.channel.shadow_sigma_db >= 0.0, "channel.shadow_sigma_db must be >= 0");

    ck.require(c.c_per_rb > 0.0, "link.c_per_rb must be positive");

    ck.require(c.fail.p_floor >= 0.0, "fail_model.p_floor must be >= 0");
    ck.require(c.fail.p_floor <= c.fail.p_ceil, "fail_model.p_floor must not exceed p_ceil");
    ck.require(c.fail.p_ceil < 1.0, "fail_model.p_ceil must be < 1");
    ck.require(c.fail.k > 0.0, "fail_model.k must be positive");
    ck.require(!c.harq_literal_paper_formula || c.fail.p_floor > 0.0,
               "link.harq_literal_paper_formula requires fail_model.p_floor > 0");

    ck.require(c.d2d_radius_m >= 0.0, "d2d.radius_m must be >= 0");
    ck.require(!c.power_levels_dbm.empty(), "d2d.power_levels_dbm must be non-empty");
    ck.require(std::is_sorted(c.power_levels_dbm.begin(), c.power_levels_dbm.end()),
               "d2d.power_levels_dbm must be ascending");
    ck.require(c.discovery_control_rbs >= 0, "d2d.discovery_control_rbs must be >= 0");
    ck.require(c.handshake_control_rbs >= 0, "d2d.handshake_control_rbs must be >= 0");

    ck.require(c.max_harq_attempts >= 1, "engine.max_harq_attempts must be >= 1");
    bool pattern_ok = c.tdd_pattern.size() == 10;
    int uplinks = 0;
    for (char ch : c.tdd_pattern) {
        if (ch == 'U')
            ++uplinks;
        else if (ch != 'D' && ch != 'S')
            pattern_ok = false;
    }
    ck.require(pattern_ok, "engine.tdd_pattern must be 10 characters over {D,S,U}");
    ck.require(!pattern_ok || uplinks == kUplinkSubframesPerFrame,
               "engine.tdd_pattern must contain exactly 6 uplink subframes");
    ck.require(c.tti_s > 0.0, "engine.tti_s must be positive");
    ck.require(c.max_frames >= 1, "engine.max_frames must be >= 1");

    ck.require(!plan.sweep_active_users.empty(),
               "experiment.sweep_active_users must be non-empty");
    for (int v : plan.sweep_active_users)
        ck.require(v >= 1 && v <= c.n_total,
                   "experiment.sweep_active_users value " + std::to_string(v) +
                       " must lie in [1, n_total]");
    ck.require(!plan.seeds.empty(), "experiment.seeds must be non-empty");
    ck.require(!plan.output_dir.empty(), "experiment.output_dir must be non-empty");
    ck.finish();
}

}  // namespace

ExperimentPlan parse_config(const std::string& text) {
    ExperimentPlan plan;

    bool blank = text.find_first_not_of(" \t\r\n") == std::string::npos;
    json doc;
    try {
        doc = blank ? json::object() : json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("configuration parse error: ") + e.what());
    }

    Section top(doc, "");
    std::string scenario;
    top.get("scenario", scenario);
    if (!scenario.empty()) plan.base.scenario = scenario_from_string(scenario);
    if (top.has("topology")) read_topology(top.child("topology"), plan.base);
    if (top.has("channel")) read_channel(top.child("channel"), plan.base);
    if (top.has("link")) read_link(top.child("link"), plan.base);
    if (top.has("fail_model")) read_fail_model(top.child("fail_model"), plan.base);
    if (top.has("d2d")) read_d2d(top.child("d2d"), plan.base);
    if (top.has("engine")) read_engine(top.child("engine"), plan.base);
    if (top.has("experiment")) read_experiment(top.child("experiment"), plan);
    top.reject_unknown();

    validate_plan(plan);
    return plan;
}

ExperimentPlan load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_config(buffer.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string describe_plan(const ExperimentPlan& plan) {
    const ScenarioConfig& c = plan.base;
    std::ostringstream out;
    out.imbue(std::locale::classic());
    out << "topology: n_total=" << c.n_total << " n_active=" << c.n_active
        << " type2_fraction=" << c.type2_fraction
        << " cell_radius_m=" << c.placement.cell_radius_m << "\n";
    out << "demand: " << c.placement.demand_min_rbs << ".." << c.placement.demand_max_rbs
        << " RBs x " << c.placement.bits_per_rb << " bits\n";
    out << "channel: gamma=" << c.channel.gamma << " freq_mhz=" << c.channel.freq_mhz
        << " shadow_sigma_db=" << c.channel.shadow_sigma_db
        << " noise_dbm=" << c.channel.noise_power_dbm << " pt_max_dbm=" << c.channel.pt_max_dbm
        << " loss_model="
        << (c.channel.loss_model == LossModel::LogDistance ? "log_distance" : "paper_literal")
        << "\n";
    out << "link: snr_th_db=" << c.snr_th_db << " c_per_rb=" << c.c_per_rb
        << " harq_literal_paper_formula=" << (c.harq_literal_paper_formula ? "true" : "false")
        << "\n";
    out << "fail_model: p_floor=" << c.fail.p_floor << " p_ceil=" << c.fail.p_ceil
        << " k=" << c.fail.k << " s_mid_db=" << c.fail.s_mid_db << "\n";
    out << "d2d: radius_m=" << c.d2d_radius_m << " levels_dbm=[";
    for (size_t i = 0; i < c.power_levels_dbm.size(); ++i)
        out << (i ? "," : "") << c.power_levels_dbm[i];
    out << "] discovery_rbs=" << c.discovery_control_rbs
        << " handshake_rbs=" << c.handshake_control_rbs << "\n";
    out << "engine: max_harq_attempts=" << c.max_harq_attempts << " tdd=" << c.tdd_pattern
        << " tti_s=" << c.tti_s << " max_frames=" << c.max_frames << "\n";
    out << "experiment: sweep=[";
    for (size_t i = 0; i < plan.sweep_active_users.size(); ++i)
        out << (i ? "," : "") << plan.sweep_active_users[i];
    out << "] seeds=" << plan.seeds.size() << " output_dir=" << plan.output_dir << "\n";
    return out.str();
}

}  // namespace d2dsim
