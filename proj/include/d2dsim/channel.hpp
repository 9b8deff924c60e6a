#pragma once

#include <optional>
#include <span>
#include <vector>

#include "d2dsim/rng.hpp"

namespace d2dsim {

// Node id used for the base station in link endpoints.
inline constexpr int kEnbId = -1;

enum class LossModel {
    // gamma * log10(d + f) with f in MHz. Kept selectable for fidelity runs;
    // yields very small losses, so thresholds rarely bite.
    PaperLiteral,
    // 10*gamma*log10(max(d,1)) + 20*log10(f). Used for the headline experiments.
    LogDistance,
};

struct ChannelParams {
    double gamma = 3.0;            // path-loss exponent
    double freq_mhz = 2300.0;
    double shadow_sigma_db = 6.0;  // log-normal shadowing std dev
    double noise_power_dbm = -128.0;
    double pt_max_dbm = 23.0;
    LossModel loss_model = LossModel::LogDistance;
};

// Saturating logistic map from per-RB SNR to per-RB failure probability.
// Constant curves (p_floor == p_ceil) are valid and handy in tests.
struct FailModel {
    double p_floor = 0.01;
    double p_ceil = 0.9;
    double k = 0.8;        // steepness, 1/dB
    double s_mid_db = 10.0;  // midpoint; defaults to the SNR threshold
};

// Radio state of one directed link at one channel coherence interval.
struct LinkProfile {
    int src = 0;
    int dst = kEnbId;
    double distance_m = 0.0;
    double loss_db = 0.0;
    double snr_db = 0.0;
    double p_fail = 0.0;
};

// Distance/frequency part of the loss, no fading terms.
double base_path_loss_db(double distance_m, const ChannelParams& params);

// One shadowing realization, N(0, sigma^2) in dB.
double shadowing_loss_db(double sigma_db, Rng& rng);

// One Rayleigh realization as a dB loss: -10*log10(X), X ~ Exp(1)
// (unit-mean power fade, so the linear-domain mean is 1).
double rayleigh_loss_db(Rng& rng);

// Total loss: base + shadowing + Rayleigh + location loss. Draws the two
// fading terms from `rng` (shadowing first).
double path_loss_db(double distance_m, const ChannelParams& params,
                    double location_loss_db, Rng& rng);

double received_power_dbm(double pt_dbm, double loss_db);

double snr_db(double pr_dbm, double noise_dbm);

// Smallest configured level (dBm, ascending) meeting the required power.
// nullopt means no level can reach the SNR threshold on this link, so the
// candidate must be excluded.
std::optional<double> d2d_power_level_dbm(double required_dbm,
                                          std::span<const double> levels);

double rb_failure_probability(double snr_db, const FailModel& model);

// Assembles a LinkProfile; snr = pt - loss - noise by construction.
LinkProfile make_link_profile(int src, int dst, double distance_m, double pt_dbm,
                              double loss_db, double noise_dbm, const FailModel& fail);

// Deterministic fading field: the fading draw for a link depends only on
// (base seed, frame, endpoints), never on evaluation order. Links are
// reciprocal, and the channel holds for one full frame.
class FadingField {
public:
    FadingField(uint64_t base_seed, const ChannelParams& params)
        : base_seed_(base_seed), params_(params) {}

    double loss_db(int src, int dst, double distance_m, double location_loss_db,
                   int frame_index) const;

    const ChannelParams& params() const { return params_; }

private:
    uint64_t base_seed_;
    ChannelParams params_;
};

}  // namespace d2dsim
