#include "d2dsim/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace d2dsim {

double base_path_loss_db(double distance_m, const ChannelParams& params) {
    if (distance_m < 0.0) throw std::invalid_argument("base_path_loss_db: negative distance");
    switch (params.loss_model) {
        case LossModel::PaperLiteral:
            return params.gamma * std::log10(distance_m + params.freq_mhz);
        case LossModel::LogDistance:
            return 10.0 * params.gamma * std::log10(std::max(distance_m, 1.0)) +
                   20.0 * std::log10(params.freq_mhz);
    }
    throw std::logic_error("unknown loss model");
}

double shadowing_loss_db(double sigma_db, Rng& rng) {
    return rng.normal(0.0, sigma_db);
}

double rayleigh_loss_db(Rng& rng) {
    return -10.0 * std::log10(rng.exponential(1.0));
}

double path_loss_db(double distance_m, const ChannelParams& params,
                    double location_loss_db, Rng& rng) {
    double base = base_path_loss_db(distance_m, params);
    double l_sh = shadowing_loss_db(params.shadow_sigma_db, rng);
    double l_rl = rayleigh_loss_db(rng);
    return base + l_sh + l_rl + location_loss_db;
}

double received_power_dbm(double pt_dbm, double loss_db) {
    return pt_dbm - loss_db;
}

double snr_db(double pr_dbm, double noise_dbm) {
    return pr_dbm - noise_dbm;
}

std::optional<double> d2d_power_level_dbm(double required_dbm,
                                          std::span<const double> levels) {
    if (levels.empty()) throw std::invalid_argument("d2d_power_level_dbm: empty level set");
    if (!std::is_sorted(levels.begin(), levels.end()))
        throw std::invalid_argument("d2d_power_level_dbm: levels not ascending");
    for (double level : levels) {
        if (level >= required_dbm) return level;
    }
    return std::nullopt;  // power-infeasible: link cannot meet the threshold
}

double rb_failure_probability(double snr_db, const FailModel& model) {
    return model.p_floor +
           (model.p_ceil - model.p_floor) /
               (1.0 + std::exp(model.k * (snr_db - model.s_mid_db)));
}

LinkProfile make_link_profile(int src, int dst, double distance_m, double pt_dbm,
                              double loss_db, double noise_dbm, const FailModel& fail) {
    LinkProfile p;
    p.src = src;
    p.dst = dst;
    p.distance_m = distance_m;
    p.loss_db = loss_db;
    p.snr_db = snr_db(received_power_dbm(pt_dbm, loss_db), noise_dbm);
    p.p_fail = rb_failure_probability(p.snr_db, fail);
    return p;
}

double FadingField::loss_db(int src, int dst, double distance_m,
                            double location_loss_db, int frame_index) const {
    // Reciprocity: the same fade in both directions.
    uint64_t a = static_cast<uint64_t>(static_cast<int64_t>(std::min(src, dst)));
    uint64_t b = static_cast<uint64_t>(static_cast<int64_t>(std::max(src, dst)));
    uint64_t link = mix_seed(base_seed_, mix_seed(a, b));
    // Shadowing is slow fading: one draw per link for the whole run.
    // Rayleigh is fast fading: redrawn every frame.
    Rng shadow_rng(link);
    Rng fast_rng(mix_seed(link, static_cast<uint64_t>(frame_index) + 1));
    return base_path_loss_db(distance_m, params_) +
           shadowing_loss_db(params_.shadow_sigma_db, shadow_rng) +
           rayleigh_loss_db(fast_rng) + location_loss_db;
}

}  // namespace d2dsim
