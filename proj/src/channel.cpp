#include "uavmoe/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "uavmoe/errors.hpp"

namespace uavmoe::channel {

namespace {

void require_finite(double v, const char* what)
{
    if (!std::isfinite(v))
        throw std::invalid_argument(std::string(what) + " must be finite");
}

} // namespace

LinkGeometry LinkGeometry::from(double d_horiz, double h_rel)
{
    require_finite(d_horiz, "d_horiz");
    require_finite(h_rel, "h_rel");
    if (d_horiz < 0.0)
        throw std::invalid_argument("d_horiz must be non-negative");
    return LinkGeometry{d_horiz, h_rel, std::hypot(d_horiz, h_rel)};
}

void RadioConfig::validate(const char* prefix) const
{
    const std::string p = std::string(prefix) + ".";
    auto positive = [&](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ConfigError(p + name, "must be a positive finite number");
    };
    positive(fc_ghz, "fc_ghz");
    positive(nakagami_m, "nakagami_m");
    if (nakagami_m < 0.5)
        throw ConfigError(p + "nakagami_m", "must be >= 0.5");
    if (shadow_sigma_los_db < 0.0 || shadow_sigma_nlos_db < 0.0)
        throw ConfigError(p + "shadow_sigma_db", "must be non-negative");
    positive(n0, "n0");
    positive(bandwidth_total_hz, "bandwidth_total_hz");
    if (reuse_factor < 1)
        throw ConfigError(p + "reuse_factor", "must be >= 1");
    if (!(rho_adj >= 0.0 && rho_adj < 1.0))
        throw ConfigError(p + "rho_adj", "must lie in [0, 1)");
    if (!(alpha_impl > 0.0 && alpha_impl <= 1.0))
        throw ConfigError(p + "alpha_impl", "must lie in (0, 1]");
    positive(p_max_w, "p_max_w");
    positive(eps_gain, "eps_gain");
}

double los_probability(const LinkGeometry& geom)
{
    require_finite(geom.r_3d, "r_3d");
    require_finite(geom.h_rel, "h_rel");
    if (!(geom.r_3d > 0.0))
        throw std::invalid_argument("r_3d must be positive");

    const double r = geom.r_3d;
    if (r <= 18.0)
        return 1.0;
    const double c0 = std::pow(std::max(geom.h_rel - 13.0, 0.0) / 10.0, 1.5);
    const double p = 18.0 / r + std::exp(-r / 36.0) * (1.0 - 18.0 / r) * (1.0 + c0);
    return std::clamp(p, 0.0, 1.0);
}

double path_loss_db(const LinkGeometry& geom, const RadioConfig& cfg, bool is_los)
{
    require_finite(geom.r_3d, "r_3d");
    const double r = std::max(geom.r_3d, 1.0);
    const double los = 28.0 + 22.0 * std::log10(r) + 20.0 * std::log10(cfg.fc_ghz);
    if (is_los)
        return los;
    return los + 13.0 + 0.1 * std::pow(r, 0.25);
}

double rician_power(double k_linear, RandomStream& rng)
{
    // h = sqrt(K/(K+1)) + sqrt(1/(K+1)) * CN(0,1)
    const double los_amp = std::sqrt(k_linear / (k_linear + 1.0));
    const double diffuse = std::sqrt(1.0 / (2.0 * (k_linear + 1.0)));
    const double re = los_amp + diffuse * rng.normal();
    const double im = diffuse * rng.normal();
    return re * re + im * im;
}

double nakagami_power(double m, RandomStream& rng) { return rng.gamma(m, 1.0 / m); }

LinkSample sample_link(const LinkGeometry& geom, const RadioConfig& cfg, RandomStream& rng)
{
    LinkSample s;
    s.is_los = rng.bernoulli(los_probability(geom));

    if (cfg.small_scale_fading) {
        s.fading_power = s.is_los ? rician_power(db_to_linear(cfg.rician_k_db), rng)
                                  : nakagami_power(cfg.nakagami_m, rng);
    }
    const double sigma = s.is_los ? cfg.shadow_sigma_los_db : cfg.shadow_sigma_nlos_db;
    if (sigma > 0.0)
        s.shadow_db = sigma * rng.normal();

    s.pl_db = path_loss_db(geom, cfg, s.is_los) + s.shadow_db;
    const double antenna = db_to_linear(cfg.g_tx_db + cfg.g_rx_db);
    s.gain_linear = antenna * s.fading_power * std::pow(10.0, -s.pl_db / 10.0);
    // Gamma/Rician draws can underflow to exactly zero in principle.
    s.gain_linear = std::max(s.gain_linear, std::numeric_limits<double>::min());
    return s;
}

double interference(std::span<const double> user_gains, std::span<const double> tx_powers,
                    std::span<const int> colors, std::size_t serving, const RadioConfig& cfg)
{
    if (user_gains.size() != tx_powers.size() || user_gains.size() != colors.size())
        throw std::invalid_argument("interference: gains, powers and colors must have equal length");
    if (serving >= user_gains.size())
        throw std::invalid_argument("interference: serving index out of range");

    double co_channel = 0.0;
    double adjacent = 0.0;
    for (std::size_t u = 0; u < user_gains.size(); ++u) {
        if (u == serving)
            continue;
        const double rx = tx_powers[u] * user_gains[u];
        if (colors[u] == colors[serving])
            co_channel += rx;
        else
            adjacent += rx;
    }
    return co_channel + cfg.rho_adj * adjacent;
}

SinrRate sinr_and_rate(double p, double g, double b_user, double i, const RadioConfig& cfg)
{
    if (!(b_user > 0.0))
        throw std::invalid_argument("sinr_and_rate: b_user must be positive");
    SinrRate out;
    out.sinr = p * g / (cfg.n0 * b_user + i);
    out.rate_bps = cfg.alpha_impl * b_user * std::log2(1.0 + out.sinr);
    return out;
}

double required_power(double target_rate, double b_user, double i, double g, const RadioConfig& cfg)
{
    if (!(b_user > 0.0))
        throw std::invalid_argument("required_power: b_user must be positive");
    if (target_rate < 0.0)
        throw std::invalid_argument("required_power: target_rate must be non-negative");
    const double gamma_star = std::exp2(target_rate / (cfg.alpha_impl * b_user)) - 1.0;
    return gamma_star * (cfg.n0 * b_user + i) / std::max(g, cfg.eps_gain);
}

} // namespace uavmoe::channel
