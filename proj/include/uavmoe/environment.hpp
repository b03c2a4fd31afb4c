#pragma once

// Phase-driven multi-UAV emergency-communication environment.
//
// One step: UAV motion from 2D actions -> hotspot and user mobility -> clock,
// phase and demand refresh -> environment-side radio resource allocation ->
// team reward -> per-agent observations. The phase index drives the simulator
// only and never appears in an observation.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "uavmoe/channel.hpp"
#include "uavmoe/energy.hpp"
#include "uavmoe/mobility.hpp"
#include "uavmoe/rng.hpp"

namespace uavmoe::env {

inline constexpr std::size_t kPhaseCount = 3;
template <class T> using PerPhase = std::array<T, kPhaseCount>;
template <class T> using PerClass = std::array<T, 3>;

struct PhaseSchedule
{
    std::size_t phase_len_steps = 0; ///< 0 = derive from total training steps
    std::size_t cycles = 3;
    PerClass<double> demand_thresholds_mbps{0.5, 1.0, 2.0};
    PerClass<double> qoe_weights{5.0, 10.0, 20.0};
    double energy_weight = 0.1;
    double collision_weight = 100.0;
    PerPhase<double> overlap_weight{20.0, 40.0, 80.0};
    double overlap_sigma_m = 150.0;
    PerPhase<double> service_radius_m{200.0, 150.0, 150.0};
    PerPhase<int> reuse_factor{1, 1, 1};
    double d_min_m = 50.0;
};

struct PhaseMobility
{
    bool user_moves = true;
    PerPhase<double> user_speed{0.2, 0.5, 0.8};
    PerPhase<double> direction_jitter{0.2, 0.5, 0.8}; ///< multiplier on gm_noise
    PerPhase<double> follow_gain{0.3, 0.3, 0.3};
    double gm_memory = 0.9;
    double gm_noise = 0.08;
    double follow_noise = 0.15;
    double center_speed_factor = 1.2;
    std::size_t groups = 3;
    std::size_t retarget_period = 8;

    mobility::MobilityParams for_phase(int phase) const;
};

struct ScenarioConfig
{
    double area_m = 1000.0;
    std::size_t n_uavs = 3;
    std::size_t n_users = 20;
    double dt_s = 60.0;
    std::size_t episode_len = 32;
    std::size_t max_users_per_uav = 5;
    double altitude_m = 100.0;
    double user_height_m = 1.5;
    double max_step_m = 60.0;
    double battery_capacity_j = 640000.0;
    double rate_scale_bps = 4e6; ///< observation normaliser for per-user rates

    PhaseSchedule phases;
    PhaseMobility mobility;
    channel::RadioConfig radio;
    energy::RotorParams rotor;

    void validate() const;

    /// Commanded horizontal speed; chosen so the largest per-slot move fits in dt.
    double cruise_speed() const;
    std::size_t obs_dim() const { return 4 * n_uavs + 4 * n_users; }
    std::size_t global_state_dim() const { return obs_dim(); }
};

struct UavState
{
    Eigen::Vector3d pos = Eigen::Vector3d::Zero();
    energy::Battery battery;
    bool active = true;
};

struct WorldState
{
    std::size_t time_step = 0; ///< global clock, persists across episodes
    std::size_t episode_step = 0;
    int phase = 0;
    std::uint64_t seed = 0;
    std::vector<UavState> uavs;
    std::vector<mobility::UserState> users;
    std::vector<mobility::Hotspot> hotspots;
    RandomStream init_rng;
    RandomStream mobility_rng;
    RandomStream channel_rng;
};

struct LinkReport
{
    std::vector<std::optional<std::size_t>> association; ///< per user
    std::vector<std::vector<std::size_t>> admitted;      ///< per UAV, admission order
    std::vector<double> bandwidth_hz;                    ///< per user (0 if not admitted)
    std::vector<double> power_w;
    std::vector<double> sinr;
    std::vector<double> rate_bps;
    std::vector<double> interference_w;
    std::vector<bool> served_ok;
    std::vector<double> uav_power_w;      ///< per UAV realized total
    std::vector<double> uav_bandwidth_hz; ///< per UAV allocated total
    std::vector<int> colors;
    Eigen::MatrixXd gains; ///< users x UAVs

    std::size_t served_count() const;
    std::size_t associated_count() const;
};

struct ActionResult
{
    std::vector<double> energy_j;
    std::vector<bool> infeasible;
    std::vector<bool> depleted;
};

struct RewardBreakdown
{
    double qoe = 0.0;
    double energy = 0.0;    ///< already weighted, enters with a minus sign
    double collision = 0.0; ///< weighted
    double overlap = 0.0;   ///< weighted
    std::size_t collisions = 0;
    double overlap_raw = 0.0;
    double total = 0.0;
};

struct StepInfo
{
    std::size_t time_step = 0;
    int phase = 0;
    std::size_t collisions = 0;
    std::vector<double> energy_j;
    std::size_t served = 0;
    double coverage = 0.0;
    std::vector<bool> infeasible;
    RewardBreakdown reward;
    LinkReport link;
};

using Observation = std::vector<double>;

struct StepOutcome
{
    std::vector<Observation> observations;
    std::vector<double> rewards; ///< team reward replicated per agent
    Observation global_state;
    bool done = false;
    StepInfo info;
};

struct ResetOutcome
{
    std::vector<Observation> observations;
    Observation global_state;
    LinkReport link;
};

using Action = Eigen::Vector2d;

int phase_of(std::size_t t, std::size_t phase_len);
mobility::DemandClass demand_class_of(std::size_t user_index, int phase);

/// Moves every active UAV by `action * max_step_m` (per-axis, clipped to the
/// area) and charges the slot energy. Throws InvalidAction on NaN input.
ActionResult apply_actions(WorldState& state, const ScenarioConfig& cfg, std::span<const Action> actions);

/// Association, admission, bandwidth and power allocation for the current slot.
LinkReport allocate(const WorldState& state, const ScenarioConfig& cfg, RandomStream& rng);

RewardBreakdown reward(const WorldState& state, const ScenarioConfig& cfg, const LinkReport& link,
                       std::span<const double> energy_j);

std::size_t count_collisions(const WorldState& state, double d_min);

Observation observe(const WorldState& state, const ScenarioConfig& cfg, const LinkReport& link, std::size_t agent);
Observation global_state(const WorldState& state, const ScenarioConfig& cfg, const LinkReport& link);

class Environment
{
public:
    explicit Environment(ScenarioConfig cfg);

    /// Fresh world and clock for `seed`.
    ResetOutcome reset(std::uint64_t seed);
    /// New episode that keeps the global clock and continues all random streams.
    ResetOutcome next_episode();
    StepOutcome step(std::span<const Action> actions);

    const WorldState& state() const { return state_; }
    WorldState& mutable_state() { return state_; }
    const ScenarioConfig& config() const { return cfg_; }
    std::size_t obs_dim() const { return cfg_.obs_dim(); }
    std::size_t n_agents() const { return cfg_.n_uavs; }

private:
    ResetOutcome start_episode();
    void refresh_demands();

    ScenarioConfig cfg_;
    WorldState state_;
};

} // namespace uavmoe::env
