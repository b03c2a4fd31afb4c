#include "uavmoe/mobility.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "uavmoe/errors.hpp"

namespace uavmoe::mobility {

void MobilityParams::validate(const char* prefix) const
{
    const std::string p = std::string(prefix) + ".";
    if (!(gm_alpha >= 0.0 && gm_alpha < 1.0))
        throw ConfigError(p + "gm_alpha", "must lie in [0, 1)");
    if (!(follow_kappa >= 0.0 && follow_kappa <= 1.0))
        throw ConfigError(p + "follow_kappa", "must lie in [0, 1]");
    if (v0_nominal < 0.0 || gm_sigma < 0.0 || follow_sigma_f < 0.0 || center_speed < 0.0)
        throw ConfigError(p + "speeds", "speeds and noise scales must be non-negative");
    if (retarget_period == 0)
        throw ConfigError(p + "retarget_period", "must be >= 1");
    if (group_count == 0)
        throw ConfigError(p + "group_count", "must be >= 1");
    if (!(eps > 0.0))
        throw ConfigError(p + "eps", "must be positive");
}

namespace {

Vec2 soft_unit(const Vec2& v, double eps) { return v / (v.norm() + eps); }

Vec2 standard_normal2(RandomStream& rng)
{
    const double x = rng.normal();
    const double y = rng.normal();
    return Vec2(x, y);
}

} // namespace

Hotspot step_center(Hotspot h, const MobilityParams& params, double area_s, double dt,
                    std::size_t step_count, RandomStream& rng)
{
    if (step_count > 0 && step_count % params.retarget_period == 0) {
        const double x = rng.uniform(0.0, area_s);
        const double y = rng.uniform(0.0, area_s);
        h.waypoint = Vec2(x, y);
    }
    h.center += params.center_speed * soft_unit(h.waypoint - h.center, params.eps) * dt;
    h.center = h.center.cwiseMax(0.0).cwiseMin(area_s);
    return h;
}

Vec2 gm_velocity(const Vec2& v, const MobilityParams& params, RandomStream& rng)
{
    const double a = params.gm_alpha;
    const Vec2 xi = standard_normal2(rng);
    return a * v + (1.0 - a) * params.v0_nominal * soft_unit(v, params.eps) +
           std::sqrt(1.0 - a * a) * params.gm_sigma * xi;
}

Vec2 blend_rpgm(const Vec2& v_gm, const UserState& user, const Vec2& center, const MobilityParams& params,
                RandomStream& rng)
{
    const double k = params.follow_kappa;
    const Vec2 eta = params.follow_sigma_f * standard_normal2(rng);
    return (1.0 - k) * v_gm + k * params.v0_nominal * soft_unit(center - user.pos, params.eps) + eta;
}

std::pair<Vec2, Vec2> reflect_position(const Vec2& pos, const Vec2& vel, double dt, double area_s)
{
    if (!(area_s > 0.0))
        throw std::invalid_argument("reflect_position: area must be positive");
    Vec2 p = pos + vel * dt;
    Vec2 v = vel;
    for (int axis = 0; axis < 2; ++axis) {
        if (!std::isfinite(p[axis]))
            throw std::invalid_argument("reflect_position: non-finite position");
        // Shifting by whole periods of 2S is an even number of mirrors.
        if (std::abs(p[axis]) > 4.0 * area_s)
            p[axis] = std::fmod(p[axis], 2.0 * area_s);
        while (p[axis] < 0.0 || p[axis] > area_s) {
            p[axis] = p[axis] < 0.0 ? -p[axis] : 2.0 * area_s - p[axis];
            v[axis] = -v[axis];
        }
    }
    return {p, v};
}

std::vector<std::vector<std::size_t>> split_groups(std::size_t n, std::size_t g)
{
    if (g == 0)
        throw std::invalid_argument("split_groups: group count must be positive");
    std::vector<std::vector<std::size_t>> groups(g);
    const std::size_t base = n / g;
    const std::size_t extra = n % g;
    std::size_t next = 0;
    for (std::size_t k = 0; k < g; ++k) {
        const std::size_t size = base + (k < extra ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i)
            groups[k].push_back(next++);
    }
    return groups;
}

} // namespace uavmoe::mobility
