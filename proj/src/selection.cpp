#include "d2dsim/selection.hpp"

#include <stdexcept>

namespace d2dsim {

double expected_transmissions(double p_success) {
    if (p_success <= 0.0 || p_success > 1.0)
        throw std::invalid_argument("expected_transmissions: p_success outside (0,1]");
    return 1.0 / p_success;
}

double link_cost(const LinkCostInput& input) {
    if (input.k_rbs < 1) throw std::invalid_argument("link_cost: k_rbs must be >= 1");
    if (input.c_per_rb <= 0.0) throw std::invalid_argument("link_cost: c_per_rb must be > 0");
    return static_cast<double>(input.k_rbs) * expected_transmissions(input.p_success) *
           input.c_per_rb;
}

long required_rbs(long payload_bits, long bits_per_rb) {
    if (payload_bits < 0) throw std::invalid_argument("required_rbs: negative payload");
    if (bits_per_rb <= 0) throw std::invalid_argument("required_rbs: bits_per_rb must be > 0");
    if (payload_bits == 0) return 0;
    return (payload_bits + bits_per_rb - 1) / bits_per_rb;
}

PathDecision select_path(const std::optional<DirectOption>& direct,
                         const std::vector<OffloadOption>& candidates,
                         double snr_th_db) {
    PathDecision decision;
    decision.x_vector.assign(1 + candidates.size(), 0);

    bool found = false;
    double best_cost = 0.0;
    // Direct is examined first, so on cost ties it wins; candidates are
    // examined in input order and only strictly cheaper ones replace the
    // incumbent, which yields the lowest-id tie-break.
    if (direct && direct->snr_db >= snr_th_db) {
        found = true;
        best_cost = direct->cost;
        decision.mode = PathMode::Direct;
    }
    size_t best_index = 0;
    for (size_t i = 0; i < candidates.size(); ++i) {
        const OffloadOption& c = candidates[i];
        if (c.snr_ij_db < snr_th_db || c.snr_je_db < snr_th_db) continue;
        double cost = c.c_ij + c.c_je;
        bool better = !found || cost < best_cost ||
                      (cost == best_cost && decision.mode == PathMode::Offload &&
                       c.offloader_id < candidates[best_index].offloader_id);
        if (better) {
            found = true;
            best_cost = cost;
            best_index = i;
            decision.mode = PathMode::Offload;
        }
    }

    if (!found) {
        decision.mode = PathMode::Infeasible;
        return decision;
    }
    decision.total_cost = best_cost;
    if (decision.mode == PathMode::Direct) {
        decision.x_vector[0] = 1;
    } else {
        decision.offloader_id = candidates[best_index].offloader_id;
        decision.x_vector[1 + best_index] = 1;
    }
    return decision;
}

}  // namespace d2dsim
