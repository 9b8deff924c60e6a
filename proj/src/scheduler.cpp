#include "d2dsim/scheduler.hpp"

#include <algorithm>
#include <stdexcept>

namespace d2dsim {

Phase phase_for(Leg leg) {
    return leg == Leg::D2dRelay ? Phase::Phase2 : Phase::Phase1;
}

FrameGrid::FrameGrid(int frame_index, std::string pattern)
    : frame_index_(frame_index), pattern_(std::move(pattern)) {
    if (pattern_.size() != 10)
        throw std::invalid_argument("FrameGrid: TDD pattern must have 10 subframes");
    for (int i = 0; i < 10; ++i) {
        char c = pattern_[static_cast<size_t>(i)];
        if (c != 'U' && c != 'D' && c != 'S')
            throw std::invalid_argument("FrameGrid: pattern may only contain U/D/S");
        if (c == 'U') uplink_subframes_.push_back(i);
    }
}

bool FrameGrid::is_uplink(int subframe) const {
    return subframe >= 0 && subframe < 10 && pattern_[static_cast<size_t>(subframe)] == 'U';
}

bool FrameGrid::is_free(int subframe, int rb) const {
    if (!is_uplink(subframe) || rb < 0 || rb >= kRbsPerSubframe) return false;
    return allocations_.find({subframe, rb}) == allocations_.end();
}

int FrameGrid::free_cells() const {
    return static_cast<int>(uplink_subframes_.size()) * kRbsPerSubframe -
           static_cast<int>(allocations_.size());
}

void FrameGrid::allocate(int subframe, int rb, const AllocationEntry& entry) {
    if (!is_uplink(subframe) || rb < 0 || rb >= kRbsPerSubframe)
        throw std::invalid_argument("FrameGrid::allocate: not an uplink cell");
    if (entry.phase != phase_for(entry.leg))
        throw std::invalid_argument("FrameGrid::allocate: leg/phase mismatch");
    auto [it, inserted] = allocations_.emplace(std::make_pair(subframe, rb), entry);
    if (!inserted) throw std::logic_error("FrameGrid::allocate: cell already booked");
}

std::optional<CellKey> FrameGrid::first_free_after(
    const std::optional<SubframeRef>& after) const {
    for (int sf : uplink_subframes_) {
        if (after) {
            if (frame_index_ < after->frame) continue;
            if (frame_index_ == after->frame && sf <= after->subframe) continue;
        }
        for (int rb = 0; rb < kRbsPerSubframe; ++rb) {
            if (is_free(sf, rb)) return CellKey{frame_index_, sf, rb};
        }
    }
    return std::nullopt;
}

FrameGrid build_frame(int frame_index, const std::string& tdd_pattern) {
    FrameGrid grid(frame_index, tdd_pattern);
    if (grid.uplink_subframes().size() != kUplinkSubframesPerFrame)
        throw std::invalid_argument("build_frame: pattern must mark exactly 6 uplink subframes");
    return grid;
}

ScheduleOutcome round_robin_schedule(std::vector<ScheduleRequest> requests,
                                     FrameGrid& grid) {
    ScheduleOutcome out;

    struct Slot {
        size_t input_index;
        int remaining;
        bool blocked = false;
    };
    std::vector<Slot> slots;
    for (size_t i = 0; i < requests.size(); ++i) {
        if (requests[i].rbs_needed < 1)
            throw std::invalid_argument("round_robin_schedule: rbs_needed must be >= 1");
        slots.push_back({i, requests[i].rbs_needed});
    }
    std::stable_sort(slots.begin(), slots.end(), [&](const Slot& a, const Slot& b) {
        const ScheduleRequest& ra = requests[a.input_index];
        const ScheduleRequest& rb = requests[b.input_index];
        if (ra.tx_ue != rb.tx_ue) return ra.tx_ue < rb.tx_ue;
        return ra.session_id < rb.session_id;
    });

    bool progressed = true;
    while (progressed) {
        progressed = false;
        for (Slot& slot : slots) {
            if (slot.remaining == 0 || slot.blocked) continue;
            const ScheduleRequest& req = requests[slot.input_index];
            auto cell = grid.first_free_after(req.not_before);
            if (!cell) {
                slot.blocked = true;  // cells only get scarcer within a grid
                continue;
            }
            AllocationEntry entry{req.session_id, req.leg, req.tx_ue, req.rx_node,
                                  phase_for(req.leg)};
            grid.allocate(cell->subframe, cell->rb, entry);
            out.grants.push_back({*cell, entry});
            --slot.remaining;
            progressed = true;
        }
    }

    std::vector<int> remaining_by_input(requests.size(), 0);
    for (const Slot& slot : slots) remaining_by_input[slot.input_index] = slot.remaining;
    for (size_t i = 0; i < requests.size(); ++i) {
        if (remaining_by_input[i] > 0) {
            ScheduleRequest leftover = requests[i];
            leftover.rbs_needed = remaining_by_input[i];
            out.leftovers.push_back(leftover);
        }
    }
    return out;
}

TwoPhaseResult two_phase_schedule(const std::vector<ScheduleRequest>& phase1,
                                  const std::vector<ScheduleRequest>& phase2,
                                  const std::string& tdd_pattern,
                                  int max_frames) {
    std::map<int, int> phase1_remaining;  // session -> unplaced Phase-1 RBs
    for (const ScheduleRequest& r : phase1) {
        if (phase_for(r.leg) != Phase::Phase1)
            throw std::invalid_argument("two_phase_schedule: non-Phase-1 leg in phase1 list");
        if (r.rbs_needed < 1)
            throw std::invalid_argument("two_phase_schedule: rbs_needed must be >= 1");
        phase1_remaining[r.session_id] += r.rbs_needed;
    }
    for (const ScheduleRequest& r : phase2) {
        if (r.leg != Leg::D2dRelay)
            throw std::invalid_argument("two_phase_schedule: phase2 list must hold relay legs");
        if (!r.not_before && phase1_remaining.find(r.session_id) == phase1_remaining.end())
            throw std::invalid_argument("two_phase_schedule: orphan relay for session " +
                                        std::to_string(r.session_id));
    }

    TwoPhaseResult result;
    std::vector<ScheduleRequest> p1_pending = phase1;
    std::vector<ScheduleRequest> p2_waiting = phase2;  // phase 1 not finished yet
    std::vector<ScheduleRequest> p2_pending;

    auto release_ready_relays = [&] {
        auto it = p2_waiting.begin();
        while (it != p2_waiting.end()) {
            auto rem = phase1_remaining.find(it->session_id);
            bool has_phase1 = rem != phase1_remaining.end();
            bool ready = false;
            if (!has_phase1) {
                ready = true;  // completed earlier; caller supplied the key
            } else if (rem->second == 0) {
                SubframeRef last = result.phase1_last.at(it->session_id);
                it->not_before = it->not_before ? std::max(*it->not_before, last) : last;
                ready = true;
            }
            if (ready) {
                p2_pending.push_back(*it);
                it = p2_waiting.erase(it);
            } else {
                ++it;
            }
        }
    };
    release_ready_relays();

    for (int frame = 0; frame < max_frames; ++frame) {
        if (p1_pending.empty() && p2_pending.empty() && p2_waiting.empty()) break;
        FrameGrid grid = build_frame(frame, tdd_pattern);

        ScheduleOutcome o1 = round_robin_schedule(std::move(p1_pending), grid);
        for (const Grant& g : o1.grants) {
            result.grants.push_back(g);
            int session = g.entry.session_id;
            auto& last = result.phase1_last[session];
            last = std::max(last, g.cell.subframe_ref());
            --phase1_remaining[session];
        }
        p1_pending = std::move(o1.leftovers);
        release_ready_relays();

        ScheduleOutcome o2 = round_robin_schedule(std::move(p2_pending), grid);
        for (const Grant& g : o2.grants) result.grants.push_back(g);
        p2_pending = std::move(o2.leftovers);

        result.frames_used = frame + 1;
    }
    if (!p1_pending.empty() || !p2_pending.empty() || !p2_waiting.empty())
        throw std::runtime_error("two_phase_schedule: frame budget exhausted");
    return result;
}

}  // namespace d2dsim
