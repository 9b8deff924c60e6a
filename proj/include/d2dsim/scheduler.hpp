#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace d2dsim {

inline constexpr int kRbsPerSubframe = 6;
inline constexpr int kUplinkSubframesPerFrame = 6;
inline constexpr std::string_view kDefaultTddPattern = "DSUUUUDSUU";

enum class Leg { CellularDirect, D2dOffload, D2dRelay };
enum class Phase { Phase1, Phase2 };

// Cellular and UE->UE traffic goes in Phase 1; the relay leg is Phase 2.
Phase phase_for(Leg leg);

// Position of one uplink subframe in time; compares lexicographically, so
// "strictly after" is the natural ordering on (frame, subframe).
struct SubframeRef {
    int frame = 0;
    int subframe = 0;
    auto operator<=>(const SubframeRef&) const = default;
};

struct CellKey {
    int frame = 0;
    int subframe = 0;  // position 0..9 within the frame
    int rb = 0;        // 0..5
    auto operator<=>(const CellKey&) const = default;
    SubframeRef subframe_ref() const { return {frame, subframe}; }
};

struct AllocationEntry {
    int session_id = 0;
    Leg leg = Leg::CellularDirect;
    int tx_ue = 0;
    int rx_node = 0;
    Phase phase = Phase::Phase1;
};

struct ScheduleRequest {
    int session_id = 0;
    int tx_ue = 0;
    int rx_node = 0;
    Leg leg = Leg::CellularDirect;
    int rbs_needed = 1;
    // Cells at or before this subframe are off limits for the request.
    std::optional<SubframeRef> not_before;
};

// One TDD frame: ten 1 ms subframes, six of them uplink, six RBs each.
class FrameGrid {
public:
    FrameGrid(int frame_index, std::string pattern);

    int frame_index() const { return frame_index_; }
    const std::string& pattern() const { return pattern_; }
    const std::vector<int>& uplink_subframes() const { return uplink_subframes_; }

    bool is_uplink(int subframe) const;
    bool is_free(int subframe, int rb) const;
    int free_cells() const;

    // Throws on double booking, non-uplink subframes, or a leg/phase mismatch.
    void allocate(int subframe, int rb, const AllocationEntry& entry);

    const std::map<std::pair<int, int>, AllocationEntry>& allocations() const {
        return allocations_;
    }

    // Earliest free cell strictly after `after` (or anywhere when unset),
    // scanning (subframe, rb) lexicographically.
    std::optional<CellKey> first_free_after(const std::optional<SubframeRef>& after) const;

private:
    int frame_index_;
    std::string pattern_;
    std::vector<int> uplink_subframes_;
    std::map<std::pair<int, int>, AllocationEntry> allocations_;
};

// Validates the pattern (exactly six 'U' subframes) and returns an empty grid.
FrameGrid build_frame(int frame_index, const std::string& tdd_pattern);

struct Grant {
    CellKey cell;
    AllocationEntry entry;
};

struct ScheduleOutcome {
    std::vector<Grant> grants;               // in grant (turn) order
    std::vector<ScheduleRequest> leftovers;  // unfilled remainders, original order
};

// Grants one RB per turn, cycling through requesters in id order, until every
// request is filled or no request can take another cell of this grid.
ScheduleOutcome round_robin_schedule(std::vector<ScheduleRequest> requests,
                                     FrameGrid& grid);

struct TwoPhaseResult {
    std::vector<Grant> grants;
    std::map<int, SubframeRef> phase1_last;  // per session, last Phase-1 cell
    int frames_used = 0;
};

// Runs Phase-1 requests round-robin first in every frame, releases each
// session's Phase-2 request once its Phase-1 demand is fully placed, and keys
// the Phase-2 cells strictly after the session's last Phase-1 subframe.
// Throws orphan-relay (std::invalid_argument) for a Phase-2 request whose
// session has neither a Phase-1 counterpart nor a not_before key.
TwoPhaseResult two_phase_schedule(const std::vector<ScheduleRequest>& phase1,
                                  const std::vector<ScheduleRequest>& phase2,
                                  const std::string& tdd_pattern,
                                  int max_frames = 100000);

}  // namespace d2dsim
