#pragma once

#include <map>
#include <vector>

#include "d2dsim/rng.hpp"

namespace d2dsim {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

double distance(const Point2& a, const Point2& b);

enum class Activity { ActiveTransmitter, Idle };

enum class UserType { Type1, Type2, Unclassified };

struct UeRecord {
    int id = 0;
    Point2 position;
    Activity activity = Activity::Idle;
    UserType user_type = UserType::Unclassified;
    long payload_bits = 0;          // > 0 iff ActiveTransmitter
    double location_loss_db = 0.0;  // extra loss from the UE's placement
};

struct Topology {
    double cell_radius_m = 0.0;
    Point2 enb_position;
    std::vector<UeRecord> ues;  // ids dense 0..n-1, index == id

    const UeRecord& ue(int id) const { return ues.at(static_cast<size_t>(id)); }
};

// Idle UEs within D2D range of a requester, ascending by id.
struct CandidateSet {
    int requester_id = 0;
    std::vector<int> candidate_ids;
};

struct PlacementParams {
    double cell_radius_m = 150.0;
    double type2_loss_min_db = 20.0;  // extra location loss for designated users
    double type2_loss_max_db = 40.0;
    int demand_min_rbs = 1;  // uplink demand per active UE, in RB equivalents
    int demand_max_rbs = 10;
    long bits_per_rb = 672;  // 16-QAM: 4 bit x 12 subcarriers x 14 symbols
};

// Uniform placement over the disk; the first n_active UEs are the active
// transmitters; round-half-up(type2_fraction * n_active) of them are
// designated poor-channel users and get a nonzero location loss drawn from
// [type2_loss_min_db, type2_loss_max_db]. Same seed, same topology.
Topology place_ues(int n_total, int n_active, double type2_fraction,
                   const PlacementParams& params, Rng& rng);

// Active UE i becomes Type1 iff direct_snr_db[i] > snr_th_db (strict),
// otherwise Type2. Idle UEs stay Unclassified. Throws if an active UE has no
// table entry.
Topology classify_users(Topology topology, const std::map<int, double>& direct_snr_db,
                        double snr_th_db);

// All idle UEs within d2d_radius_m of the requester (which must be an active
// Type2 transmitter), sorted ascending by id. May be empty.
CandidateSet neighbors_within(const Topology& topology, int requester_id,
                              double d2d_radius_m);

}  // namespace d2dsim
