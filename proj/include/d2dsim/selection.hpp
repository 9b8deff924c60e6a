#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace d2dsim {

struct LinkCostInput {
    long k_rbs = 1;          // RBs needed for the payload
    double p_success = 1.0;  // per-RB success probability, (0, 1]
    double c_per_rb = 1.0;   // cost units per RB transmission
};

// Mean attempts until first success: 1 / p_success.
double expected_transmissions(double p_success);

// k * r * c.
double link_cost(const LinkCostInput& input);

// ceil(payload_bits / bits_per_rb); zero payload needs zero RBs.
long required_rbs(long payload_bits, long bits_per_rb);

enum class PathMode { Direct, Offload, Infeasible };

struct DirectOption {
    double cost = 0.0;
    double snr_db = 0.0;
};

struct OffloadOption {
    int offloader_id = 0;
    double c_ij = 0.0;  // requester -> offloader
    double c_je = 0.0;  // offloader -> eNB
    double snr_ij_db = 0.0;
    double snr_je_db = 0.0;
};

struct PathDecision {
    PathMode mode = PathMode::Infeasible;
    int offloader_id = -1;   // valid iff mode == Offload
    double total_cost = 0.0;
    // Boolean assignment: x[0] is the direct path, x[1+i] is candidates[i].
    // Exactly one entry set unless Infeasible (then all zero).
    std::vector<uint8_t> x_vector;
};

// Feasibility-filtered minimum over the direct path and every candidate pair:
// the direct path needs snr >= snr_th, a candidate needs both its legs at or
// above snr_th. Ties prefer Direct, then the lowest offloader id. An empty
// feasible set yields Infeasible (a valid outcome, not an error).
PathDecision select_path(const std::optional<DirectOption>& direct,
                         const std::vector<OffloadOption>& candidates,
                         double snr_th_db);

}  // namespace d2dsim
