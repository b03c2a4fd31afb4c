#pragma once

// Air-to-ground radio link model: LoS probability, path loss, Rician/Nakagami
// fading with lognormal shadowing, reuse-aware interference, SINR/rate and the
// feasibility-driven power rule used by the environment-side scheduler.

#include <cmath>
#include <span>

#include "uavmoe/rng.hpp"

namespace uavmoe::channel {

struct LinkGeometry
{
    double d_horiz = 0.0; ///< horizontal distance [m]
    double h_rel = 0.0;   ///< UAV altitude minus user height [m]
    double r_3d = 0.0;    ///< slant range [m]

    static LinkGeometry from(double d_horiz, double h_rel);
};

struct RadioConfig
{
    double fc_ghz = 2.0;
    double rician_k_db = 6.0;
    double nakagami_m = 2.0;
    double shadow_sigma_los_db = 4.0;
    double shadow_sigma_nlos_db = 7.8;
    double g_tx_db = 0.0;
    double g_rx_db = 0.0;
    double n0 = 4e-21;                 ///< W/Hz (-174 dBm/Hz)
    double bandwidth_total_hz = 20e6;
    int reuse_factor = 1;
    double rho_adj = 1e-3;
    double alpha_impl = 0.8;
    double p_max_w = 5.0;
    double eps_gain = 1e-15;
    bool small_scale_fading = true;    ///< false forces |h|^2 = 1

    /// Throws ConfigError naming the first invalid field (prefixed by `prefix`).
    void validate(const char* prefix = "channel") const;
};

struct LinkSample
{
    bool is_los = false;
    double gain_linear = 0.0;
    double pl_db = 0.0;        ///< realized large-scale loss, shadowing included
    double fading_power = 1.0; ///< |h_small|^2
    double shadow_db = 0.0;
};

double los_probability(const LinkGeometry& geom);
double path_loss_db(const LinkGeometry& geom, const RadioConfig& cfg, bool is_los);

/// Unit-mean Rician power |h|^2 with linear K factor.
double rician_power(double k_linear, RandomStream& rng);
/// Unit-mean Nakagami-m power, i.e. Gamma(m, 1/m).
double nakagami_power(double m, RandomStream& rng);

LinkSample sample_link(const LinkGeometry& geom, const RadioConfig& cfg, RandomStream& rng);

/// Co-channel plus adjacent-leakage interference seen by a user served by `serving`.
double interference(std::span<const double> user_gains, std::span<const double> tx_powers,
                    std::span<const int> colors, std::size_t serving, const RadioConfig& cfg);

struct SinrRate
{
    double sinr = 0.0;
    double rate_bps = 0.0;
};

SinrRate sinr_and_rate(double p, double g, double b_user, double i, const RadioConfig& cfg);

/// Power needed to reach `target_rate` under interference `i`; gain floored at eps_gain.
double required_power(double target_rate, double b_user, double i, double g, const RadioConfig& cfg);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

} // namespace uavmoe::channel
