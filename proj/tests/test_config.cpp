#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "d2dsim/config.hpp"
#include "doctest.h"

using namespace d2dsim;

TEST_CASE("empty document yields the full default plan") {
    for (const std::string& text : {std::string{}, std::string{"  \n\t"}}) {
        ExperimentPlan plan = parse_config(text);
        const ScenarioConfig& c = plan.base;

        CHECK(c.scenario == Scenario::CellularWithD2d);
        CHECK(c.n_total == 100);
        CHECK(c.n_active == 50);
        CHECK(c.type2_fraction == 0.4);
        CHECK(c.placement.cell_radius_m == 150.0);
        CHECK(c.placement.bits_per_rb == 672);  // 16-QAM
        CHECK(c.channel.gamma == 3.0);
        CHECK(c.channel.freq_mhz == 2300.0);
        CHECK(c.channel.shadow_sigma_db == 6.0);
        CHECK(c.channel.pt_max_dbm == 23.0);
        CHECK(c.channel.loss_model == LossModel::LogDistance);
        CHECK(c.snr_th_db == 10.0);
        CHECK(c.d2d_radius_m == 20.0);
        CHECK(c.power_levels_dbm == std::vector<double>{-5.0, 5.0, 15.0});
        CHECK(c.fail.p_floor == 0.01);
        CHECK(c.fail.p_ceil == 0.9);
        CHECK(c.tdd_pattern == "DSUUUUDSUU");

        CHECK(plan.sweep_active_users == std::vector<int>{10, 20, 30, 40, 50});
        REQUIRE(plan.seeds.size() == 100);
        CHECK(plan.seeds.front() == 0);
        CHECK(plan.seeds.back() == 99);
        CHECK(plan.output_dir == "out");
    }
}

TEST_CASE("fields override defaults and negative thresholds are legal") {
    ExperimentPlan plan = parse_config(R"({
        "scenario": "cellular",
        "topology": {"n_total": 40, "n_active": 12, "type2_fraction": 0.5},
        "channel": {"noise_power_dbm": -120.5, "loss_model": "paper_literal"},
        "link": {"snr_th_db": -3},
        "d2d": {"radius_m": 35, "power_levels_dbm": [-10, 0, 10, 20]},
        "engine": {"max_harq_attempts": 16},
        "experiment": {"sweep_active_users": [4, 8, 12], "seeds": [1, 2, 3],
                       "output_dir": "results"}
    })");
    CHECK(plan.base.scenario == Scenario::CellularOnly);
    CHECK(plan.base.n_total == 40);
    CHECK(plan.base.n_active == 12);
    CHECK(plan.base.snr_th_db == -3.0);
    CHECK(plan.base.channel.noise_power_dbm == -120.5);
    CHECK(plan.base.channel.loss_model == LossModel::PaperLiteral);
    CHECK(plan.base.d2d_radius_m == 35.0);
    CHECK(plan.base.power_levels_dbm.size() == 4);
    CHECK(plan.base.max_harq_attempts == 16);
    CHECK(plan.sweep_active_users == std::vector<int>{4, 8, 12});
    CHECK(plan.seeds == std::vector<uint64_t>{1, 2, 3});
    CHECK(plan.output_dir == "results");
}

TEST_CASE("sweep values beyond n_total are rejected with the value named") {
    try {
        parse_config(R"({"experiment": {"sweep_active_users": [10, 200]}})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        std::string msg = e.what();
        CHECK(msg.find("invalid configuration") != std::string::npos);
        CHECK(msg.find("200") != std::string::npos);
        CHECK(msg.find("n_total") != std::string::npos);
    }
}

TEST_CASE("every violation is reported at once") {
    try {
        parse_config(R"({
            "topology": {"n_total": 10, "n_active": 20, "type2_fraction": 1.5},
            "fail_model": {"p_floor": 0.5, "p_ceil": 0.2},
            "engine": {"tdd_pattern": "UUUUUUUUUU"}
        })");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        std::string msg = e.what();
        CHECK(msg.find("n_active must not exceed n_total") != std::string::npos);
        CHECK(msg.find("type2_fraction") != std::string::npos);
        CHECK(msg.find("p_floor must not exceed p_ceil") != std::string::npos);
        CHECK(msg.find("exactly 6 uplink subframes") != std::string::npos);
    }
}

TEST_CASE("unknown keys are rejected with their dotted path") {
    CHECK_THROWS_WITH_AS(parse_config(R"({"typo_section": {}})"),
                         "unknown configuration key 'typo_section'", ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"channel": {"gama": 3}})"),
                         "unknown configuration key 'channel.gama'", ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"d2d": {"radius": 20}})"),
                         "unknown configuration key 'd2d.radius'", ConfigError);
}

TEST_CASE("wrong JSON types name the offending field") {
    CHECK_THROWS_WITH_AS(parse_config(R"({"topology": {"n_total": "many"}})"),
                         "field 'topology.n_total' has the wrong type", ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"d2d": {"power_levels_dbm": 5}})"),
                         "field 'd2d.power_levels_dbm' has the wrong type", ConfigError);
}

TEST_CASE("malformed documents report a parse error") {
    try {
        parse_config("{ not json");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("configuration parse error") !=
              std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("[1, 2, 3]"), ConfigError);  // not an object
}

TEST_CASE("enumerated strings are validated") {
    CHECK_THROWS_AS(parse_config(R"({"scenario": "both"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"channel": {"loss_model": "freespace"}})"),
                    ConfigError);
    CHECK(scenario_from_string("cellular") == Scenario::CellularOnly);
    CHECK(scenario_from_string("d2d") == Scenario::CellularWithD2d);
    CHECK_THROWS_AS(scenario_from_string("x"), ConfigError);
    CHECK(std::string(to_string(Scenario::CellularOnly)) == "cellular");
    CHECK(std::string(to_string(Scenario::CellularWithD2d)) == "d2d");
}

TEST_CASE("literal HARQ costing needs a positive failure floor") {
    CHECK_THROWS_AS(parse_config(R"({
        "link": {"harq_literal_paper_formula": true},
        "fail_model": {"p_floor": 0.0}
    })"),
                    ConfigError);
    // with a positive floor it is accepted
    ExperimentPlan ok = parse_config(R"({
        "link": {"harq_literal_paper_formula": true},
        "fail_model": {"p_floor": 0.05}
    })");
    CHECK(ok.base.harq_literal_paper_formula);
}

TEST_CASE("unsorted power ladders are rejected") {
    CHECK_THROWS_AS(parse_config(R"({"d2d": {"power_levels_dbm": [15, 5, -5]}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"d2d": {"power_levels_dbm": []}})"), ConfigError);
}

TEST_CASE("more single-field invariants") {
    CHECK_THROWS_AS(parse_config(R"({"topology": {"demand_min_rbs": 0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"topology": {"cell_radius_m": 0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"channel": {"gamma": -1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"fail_model": {"p_ceil": 1.0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"engine": {"max_harq_attempts": 0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"engine": {"tti_s": 0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"engine": {"tdd_pattern": "DSUUU"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"experiment": {"seeds": []}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"experiment": {"sweep_active_users": []}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"experiment": {"output_dir": ""}})"), ConfigError);
}

TEST_CASE("load_config_file: round trip and missing-file diagnostics") {
    const std::string path = "test_config_roundtrip.json";
    {
        std::ofstream out(path);
        out << R"({"topology": {"n_active": 30}, "experiment": {"seeds": [7]}})";
    }
    ExperimentPlan plan = load_config_file(path);
    CHECK(plan.base.n_active == 30);
    CHECK(plan.seeds == std::vector<uint64_t>{7});
    std::remove(path.c_str());

    try {
        load_config_file("no_such_file.json");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("no_such_file.json") != std::string::npos);
    }

    // errors inside a file are prefixed with its path
    const std::string bad = "test_config_bad.json";
    {
        std::ofstream out(bad);
        out << R"({"channel": {"gama": 3}})";
    }
    try {
        load_config_file(bad);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        std::string msg = e.what();
        CHECK(msg.find(bad) != std::string::npos);
        CHECK(msg.find("channel.gama") != std::string::npos);
    }
    std::remove(bad.c_str());
}

TEST_CASE("describe_plan surfaces the effective settings") {
    ExperimentPlan plan = parse_config("");
    std::string text = describe_plan(plan);
    CHECK(text.find("n_total=100") != std::string::npos);
    CHECK(text.find("n_active=50") != std::string::npos);
    CHECK(text.find("pt_max_dbm=23") != std::string::npos);
    CHECK(text.find("log_distance") != std::string::npos);
    CHECK(text.find("sweep=[10,20,30,40,50]") != std::string::npos);
    CHECK(text.find("seeds=100") != std::string::npos);
    CHECK(text.find("tdd=DSUUUUDSUU") != std::string::npos);
}
