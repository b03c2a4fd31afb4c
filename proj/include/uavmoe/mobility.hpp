#pragma once

// Ground-user crowd motion: hotspot centers drifting toward periodically
// re-drawn waypoints, a Gauss-Markov velocity process blended with
// reference-point group following, and reflecting area boundaries.

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "uavmoe/rng.hpp"

namespace uavmoe::mobility {

using Vec2 = Eigen::Vector2d;

struct MobilityParams
{
    double v0_nominal = 0.5;
    double gm_alpha = 0.9;       ///< velocity memory, in [0, 1)
    double gm_sigma = 0.08;      ///< [m/s]
    double follow_kappa = 0.3;   ///< group follow gain, in [0, 1]
    double follow_sigma_f = 0.15; ///< [m/s]
    double center_speed = 0.6;   ///< [m/s]
    std::size_t retarget_period = 8;
    std::size_t group_count = 3;
    double eps = 1e-6;

    void validate(const char* prefix = "mobility") const;
};

enum class DemandClass { low = 0, medium = 1, high = 2 };

struct Hotspot
{
    Vec2 center = Vec2::Zero();
    Vec2 waypoint = Vec2::Zero();
    std::vector<std::size_t> members;
};

struct UserState
{
    Vec2 pos = Vec2::Zero();
    Vec2 vel = Vec2::Zero();
    std::size_t group = 0;
    DemandClass demand = DemandClass::low;
};

/// Moves the hotspot center toward its waypoint. When `step_count` is a positive
/// multiple of `retarget_period` a fresh uniform waypoint is drawn first.
Hotspot step_center(Hotspot h, const MobilityParams& params, double area_s, double dt,
                    std::size_t step_count, RandomStream& rng);

Vec2 gm_velocity(const Vec2& v, const MobilityParams& params, RandomStream& rng);

Vec2 blend_rpgm(const Vec2& v_gm, const UserState& user, const Vec2& center, const MobilityParams& params,
                RandomStream& rng);

/// Advances `pos` by `vel * dt` and mirrors it back into [0, S]^2. Each mirror
/// flips the matching velocity component.
std::pair<Vec2, Vec2> reflect_position(const Vec2& pos, const Vec2& vel, double dt, double area_s);

/// Splits `n` users into `g` contiguous groups whose sizes differ by at most one.
std::vector<std::vector<std::size_t>> split_groups(std::size_t n, std::size_t g);

} // namespace uavmoe::mobility
