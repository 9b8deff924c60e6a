#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "d2dsim/engine.hpp"

namespace d2dsim {

// A full experiment: both scenarios swept over active-user counts, each point
// averaged over the seed list.
struct ExperimentPlan {
    ScenarioConfig base;
    std::vector<int> sweep_active_users{10, 20, 30, 40, 50};
    std::vector<uint64_t> seeds;  // default 0..99, set by the constructor
    std::string output_dir = "out";

    ExperimentPlan();
};

// Raised for malformed documents (with position diagnostics) and for invalid
// values (message lists every violated constraint, one per line).
class ConfigError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

// Parses a JSON configuration document. Unspecified fields keep their
// defaults; an empty document yields the stock plan. Unknown keys are
// rejected to catch typos.
ExperimentPlan parse_config(const std::string& text);

// Reads the file and parses it; the filename is included in diagnostics.
ExperimentPlan load_config_file(const std::string& path);

const char* to_string(Scenario scenario);
Scenario scenario_from_string(const std::string& name);  // "cellular" | "d2d"

// One-line-per-field rendering of the effective plan, for `validate`.
std::string describe_plan(const ExperimentPlan& plan);

}  // namespace d2dsim
