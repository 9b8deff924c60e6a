#include "d2dsim/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace d2dsim {

double distance(const Point2& a, const Point2& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

Topology place_ues(int n_total, int n_active, double type2_fraction,
                   const PlacementParams& params, Rng& rng) {
    if (n_total < 1)
        throw std::invalid_argument("place_ues: need at least one UE");
    if (n_active < 0 || n_active > n_total)
        throw std::invalid_argument("place_ues: need 0 <= n_active <= n_total");
    if (type2_fraction < 0.0 || type2_fraction > 1.0)
        throw std::invalid_argument("place_ues: type2_fraction outside [0,1]");
    if (params.cell_radius_m <= 0.0)
        throw std::invalid_argument("place_ues: cell radius must be positive");
    if (params.demand_min_rbs < 1 || params.demand_max_rbs < params.demand_min_rbs)
        throw std::invalid_argument("place_ues: bad demand range");

    Topology topo;
    topo.cell_radius_m = params.cell_radius_m;
    topo.enb_position = {0.0, 0.0};
    topo.ues.resize(static_cast<size_t>(n_total));

    // Uniform over the disk: r = R*sqrt(u) corrects for area.
    for (int i = 0; i < n_total; ++i) {
        double r = params.cell_radius_m * std::sqrt(rng.uniform01());
        double theta = 2.0 * std::numbers::pi * rng.uniform01();
        UeRecord& ue = topo.ues[static_cast<size_t>(i)];
        ue.id = i;
        ue.position = {r * std::cos(theta), r * std::sin(theta)};
        ue.activity = i < n_active ? Activity::ActiveTransmitter : Activity::Idle;
    }

    for (int i = 0; i < n_active; ++i) {
        long rbs = rng.uniform_int(params.demand_min_rbs, params.demand_max_rbs);
        topo.ues[static_cast<size_t>(i)].payload_bits = rbs * params.bits_per_rb;
    }

    // Designate round-half-up(fraction * n_active) active UEs as poor-channel
    // users via a partial Fisher-Yates over the active ids.
    int n_type2 = static_cast<int>(std::floor(type2_fraction * n_active + 0.5));
    std::vector<int> active_ids(static_cast<size_t>(n_active));
    for (int i = 0; i < n_active; ++i) active_ids[static_cast<size_t>(i)] = i;
    std::vector<int> designated;
    designated.reserve(static_cast<size_t>(n_type2));
    for (int i = 0; i < n_type2; ++i) {
        int j = static_cast<int>(rng.uniform_int(i, n_active - 1));
        std::swap(active_ids[static_cast<size_t>(i)], active_ids[static_cast<size_t>(j)]);
        designated.push_back(active_ids[static_cast<size_t>(i)]);
    }
    std::sort(designated.begin(), designated.end());
    for (int id : designated) {
        topo.ues[static_cast<size_t>(id)].location_loss_db =
            rng.uniform_real(params.type2_loss_min_db, params.type2_loss_max_db);
    }
    return topo;
}

Topology classify_users(Topology topology, const std::map<int, double>& direct_snr_db,
                        double snr_th_db) {
    for (UeRecord& ue : topology.ues) {
        if (ue.activity != Activity::ActiveTransmitter) {
            ue.user_type = UserType::Unclassified;
            continue;
        }
        auto it = direct_snr_db.find(ue.id);
        if (it == direct_snr_db.end())
            throw std::invalid_argument("classify_users: missing direct-link SNR for UE " +
                                        std::to_string(ue.id));
        ue.user_type = it->second > snr_th_db ? UserType::Type1 : UserType::Type2;
    }
    return topology;
}

CandidateSet neighbors_within(const Topology& topology, int requester_id,
                              double d2d_radius_m) {
    if (requester_id < 0 || static_cast<size_t>(requester_id) >= topology.ues.size())
        throw std::invalid_argument("neighbors_within: unknown requester");
    const UeRecord& req = topology.ue(requester_id);
    if (req.activity != Activity::ActiveTransmitter || req.user_type != UserType::Type2)
        throw std::invalid_argument("neighbors_within: requester is not a Type-2 transmitter");

    CandidateSet set;
    set.requester_id = requester_id;
    for (const UeRecord& ue : topology.ues) {
        if (ue.id == requester_id || ue.activity != Activity::Idle) continue;
        if (distance(ue.position, req.position) <= d2d_radius_m)
            set.candidate_ids.push_back(ue.id);
    }
    // ids visited in ascending order already; keep the contract explicit
    std::sort(set.candidate_ids.begin(), set.candidate_ids.end());
    return set;
}

}  // namespace d2dsim
