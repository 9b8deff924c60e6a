#pragma once

// Helpers shared by the unit tests and the acceptance gate: a brute-force
// reference for the path-selection optimization plus a random instance
// generator for it.

#include <bit>
#include <cstdint>
#include <optional>
#include <vector>

#include "d2dsim/rng.hpp"
#include "d2dsim/selection.hpp"

namespace testsupport {

struct SelectionInstance {
    std::optional<d2dsim::DirectOption> direct;
    std::vector<d2dsim::OffloadOption> candidates;
    double snr_th_db = 10.0;
};

// Enumerates every Boolean vector over {direct, candidate_1..m}. Vectors
// with more than one bit set violate the single-path constraint; a set bit
// on an infeasible path (SNR below threshold on any leg) is likewise
// rejected. Among the surviving one-bit vectors the minimum objective wins,
// ties preferring the direct path and then the lowest offloader id. The
// all-zero vector is the outcome only when no one-bit vector survives.
inline d2dsim::PathDecision brute_force_select(const SelectionInstance& in) {
    using d2dsim::PathDecision;
    using d2dsim::PathMode;
    const size_t m = in.candidates.size();
    const size_t n_bits = m + 1;

    PathDecision best;
    best.mode = PathMode::Infeasible;
    best.x_vector.assign(n_bits, 0);
    bool have_best = false;

    for (uint64_t mask = 0; mask < (uint64_t{1} << n_bits); ++mask) {
        if (std::popcount(mask) != 1) continue;  // all-zero handled by default
        size_t bit = static_cast<size_t>(std::countr_zero(mask));

        PathMode mode;
        int offloader = -1;
        double cost;
        if (bit == 0) {
            if (!in.direct || in.direct->snr_db < in.snr_th_db) continue;
            mode = PathMode::Direct;
            cost = in.direct->cost;
        } else {
            const d2dsim::OffloadOption& c = in.candidates[bit - 1];
            if (c.snr_ij_db < in.snr_th_db || c.snr_je_db < in.snr_th_db) continue;
            mode = PathMode::Offload;
            offloader = c.offloader_id;
            cost = c.c_ij + c.c_je;
        }

        bool better;
        if (!have_best) {
            better = true;
        } else if (cost != best.total_cost) {
            better = cost < best.total_cost;
        } else if (mode != best.mode) {
            better = mode == PathMode::Direct;  // tie: direct wins
        } else {
            better = mode == PathMode::Offload && offloader < best.offloader_id;
        }
        if (better) {
            have_best = true;
            best.mode = mode;
            best.offloader_id = offloader;
            best.total_cost = cost;
            best.x_vector.assign(n_bits, 0);
            best.x_vector[bit] = 1;
        }
    }
    if (!have_best) {
        best.offloader_id = -1;
        best.total_cost = 0.0;
    }
    return best;
}

// Random instance with up to `max_m` candidates. Costs are drawn from a
// small integer lattice half the time so exact ties actually occur.
inline SelectionInstance random_selection_instance(d2dsim::Rng& rng, int max_m = 6) {
    SelectionInstance in;
    in.snr_th_db = 10.0;
    auto cost = [&rng] {
        return rng.uniform01() < 0.5 ? static_cast<double>(rng.uniform_int(1, 8)) * 5.0
                                     : rng.uniform_real(1.0, 100.0);
    };
    auto snr = [&rng] { return rng.uniform_real(0.0, 20.0); };

    if (rng.uniform01() < 0.9) in.direct = d2dsim::DirectOption{cost(), snr()};
    int m = static_cast<int>(rng.uniform_int(0, max_m));
    for (int j = 0; j < m; ++j) {
        d2dsim::OffloadOption c;
        c.offloader_id = 100 + j;  // distinct, ascending
        c.c_ij = cost();
        c.c_je = cost();
        c.snr_ij_db = snr();
        c.snr_je_db = snr();
        in.candidates.push_back(c);
    }
    // shuffle candidate order so input order != id order sometimes
    for (size_t i = in.candidates.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(i) - 1));
        std::swap(in.candidates[i - 1], in.candidates[j]);
    }
    return in;
}

inline bool same_decision(const d2dsim::PathDecision& a, const d2dsim::PathDecision& b) {
    if (a.mode != b.mode) return false;
    if (a.mode == d2dsim::PathMode::Offload && a.offloader_id != b.offloader_id) return false;
    if (a.mode != d2dsim::PathMode::Infeasible && a.total_cost != b.total_cost) return false;
    return true;
}

}  // namespace testsupport
