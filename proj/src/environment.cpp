#include "uavmoe/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "uavmoe/errors.hpp"

namespace uavmoe::env {

using mobility::DemandClass;
using mobility::Vec2;

mobility::MobilityParams PhaseMobility::for_phase(int phase) const
{
    mobility::MobilityParams p;
    p.v0_nominal = user_speed[phase];
    p.gm_alpha = gm_memory;
    p.gm_sigma = gm_noise * direction_jitter[phase];
    p.follow_kappa = follow_gain[phase];
    p.follow_sigma_f = follow_noise;
    p.center_speed = center_speed_factor * user_speed[phase];
    p.retarget_period = retarget_period;
    p.group_count = groups;
    return p;
}

void ScenarioConfig::validate() const
{
    auto positive = [](double v, const char* path) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ConfigError(path, "must be a positive finite number");
    };
    positive(area_m, "env.area_m");
    positive(dt_s, "env.dt_s");
    positive(altitude_m, "env.altitude_m");
    positive(max_step_m, "env.max_step_m");
    positive(battery_capacity_j, "env.battery_capacity_j");
    positive(rate_scale_bps, "env.rate_scale_bps");
    if (n_uavs == 0)
        throw ConfigError("env.n_uavs", "must be >= 1");
    if (n_users == 0)
        throw ConfigError("env.n_users", "must be >= 1");
    if (episode_len == 0)
        throw ConfigError("env.episode_len", "must be >= 1");
    if (max_users_per_uav == 0)
        throw ConfigError("env.max_users_per_uav", "must be >= 1");
    if (user_height_m < 0.0 || user_height_m >= altitude_m)
        throw ConfigError("env.user_height_m", "must lie in [0, altitude_m)");

    const auto& ph = phases;
    if (ph.phase_len_steps == 0)
        throw ConfigError("phase.phase_len_steps", "must be >= 1 (or derived from train.total_steps)");
    if (ph.cycles == 0)
        throw ConfigError("phase.cycles", "must be >= 1");
    const auto& thr = ph.demand_thresholds_mbps;
    if (!(thr[0] > 0.0 && thr[0] < thr[1] && thr[1] < thr[2]))
        throw ConfigError("phase.demand_thresholds_mbps", "must be positive and strictly increasing L < M < H");
    for (double w : ph.qoe_weights)
        if (w < 0.0)
            throw ConfigError("phase.qoe_weights", "must be non-negative");
    if (ph.energy_weight < 0.0)
        throw ConfigError("phase.energy_weight", "must be non-negative");
    if (ph.collision_weight < 0.0)
        throw ConfigError("phase.collision_weight", "must be non-negative");
    for (double w : ph.overlap_weight)
        if (w < 0.0)
            throw ConfigError("phase.overlap_weight", "must be non-negative");
    positive(ph.overlap_sigma_m, "phase.overlap_sigma_m");
    for (double r : ph.service_radius_m)
        positive(r, "phase.service_radius_m");
    for (int f : ph.reuse_factor)
        if (f < 1)
            throw ConfigError("phase.reuse_factor", "must be >= 1");
    if (ph.d_min_m < 0.0)
        throw ConfigError("phase.d_min_m", "must be non-negative");

    const auto& mob = mobility;
    for (int k = 0; k < static_cast<int>(kPhaseCount); ++k)
        mob.for_phase(k).validate("mobility");
    if (mob.groups > n_users)
        throw ConfigError("mobility.groups", "must not exceed env.n_users");

    radio.validate("channel");
    rotor.validate("energy");
}

double ScenarioConfig::cruise_speed() const { return max_step_m * std::sqrt(2.0) / dt_s; }

std::size_t LinkReport::served_count() const
{
    return static_cast<std::size_t>(std::count(served_ok.begin(), served_ok.end(), true));
}

std::size_t LinkReport::associated_count() const
{
    return static_cast<std::size_t>(
        std::count_if(association.begin(), association.end(), [](const auto& a) { return a.has_value(); }));
}

int phase_of(std::size_t t, std::size_t phase_len)
{
    if (phase_len == 0)
        throw std::invalid_argument("phase_of: phase length must be positive");
    return static_cast<int>((t / phase_len) % kPhaseCount);
}

DemandClass demand_class_of(std::size_t user_index, int phase)
{
    return static_cast<DemandClass>((user_index + static_cast<std::size_t>(phase)) % 3);
}

ActionResult apply_actions(WorldState& state, const ScenarioConfig& cfg, std::span<const Action> actions)
{
    if (actions.size() != state.uavs.size())
        throw InvalidAction("expected " + std::to_string(state.uavs.size()) + " actions, got " +
                            std::to_string(actions.size()));
    for (const Action& a : actions)
        if (!a.allFinite())
            throw InvalidAction("action contains a non-finite component");

    const std::size_t n = state.uavs.size();
    ActionResult out{std::vector<double>(n, 0.0), std::vector<bool>(n, false), std::vector<bool>(n, false)};
    const double vh = cfg.cruise_speed();

    for (std::size_t u = 0; u < n; ++u) {
        UavState& uav = state.uavs[u];
        if (!uav.active)
            continue;

        const Eigen::Vector2d step = actions[u].cwiseMax(-1.0).cwiseMin(1.0) * cfg.max_step_m;
        Eigen::Vector2d target = uav.pos.head<2>() + step;
        target = target.cwiseMax(0.0).cwiseMin(cfg.area_m);
        const double s_h = (target - uav.pos.head<2>()).norm();

        double e = 0.0;
        try {
            e = energy::slot_energy(s_h, 0.0, vh, 0.0, cfg.dt_s, cfg.rotor);
            uav.pos.head<2>() = target;
        } catch (const InfeasibleAction&) {
            out.infeasible[u] = true;
            e = energy::hover_power(cfg.rotor) * cfg.dt_s;
        }

        const auto drawn = energy::battery_step(uav.battery, e);
        uav.battery = drawn.battery;
        out.energy_j[u] = e;
        if (drawn.depleted) {
            uav.active = false;
            out.depleted[u] = true;
        }
    }
    return out;
}

namespace {

int class_priority(DemandClass c) { return static_cast<int>(c); }

double threshold_bps(const ScenarioConfig& cfg, DemandClass c)
{
    return cfg.phases.demand_thresholds_mbps[static_cast<int>(c)] * 1e6;
}

double horizontal_distance(const UavState& uav, const mobility::UserState& user)
{
    return (uav.pos.head<2>() - user.pos).norm();
}

} // namespace

LinkReport allocate(const WorldState& state, const ScenarioConfig& cfg, RandomStream& rng)
{
    const std::size_t n_users = state.users.size();
    const std::size_t n_uavs = state.uavs.size();
    const int phase = state.phase;
    const double radius = cfg.phases.service_radius_m[phase];
    const int reuse = cfg.phases.reuse_factor[phase];

    channel::RadioConfig radio = cfg.radio;
    radio.reuse_factor = reuse;

    LinkReport rep;
    rep.association.assign(n_users, std::nullopt);
    rep.admitted.assign(n_uavs, {});
    rep.bandwidth_hz.assign(n_users, 0.0);
    rep.power_w.assign(n_users, 0.0);
    rep.sinr.assign(n_users, 0.0);
    rep.rate_bps.assign(n_users, 0.0);
    rep.interference_w.assign(n_users, 0.0);
    rep.served_ok.assign(n_users, false);
    rep.uav_power_w.assign(n_uavs, 0.0);
    rep.uav_bandwidth_hz.assign(n_uavs, 0.0);
    rep.colors.resize(n_uavs);
    for (std::size_t u = 0; u < n_uavs; ++u)
        rep.colors[u] = static_cast<int>(u % static_cast<std::size_t>(reuse));

    // Fading is redrawn for every link each slot.
    rep.gains.resize(static_cast<Eigen::Index>(n_users), static_cast<Eigen::Index>(n_uavs));
    for (std::size_t n = 0; n < n_users; ++n) {
        for (std::size_t u = 0; u < n_uavs; ++u) {
            const auto geom = channel::LinkGeometry::from(horizontal_distance(state.uavs[u], state.users[n]),
                                                          state.uavs[u].pos.z() - cfg.user_height_m);
            rep.gains(n, u) = channel::sample_link(geom, radio, rng).gain_linear;
        }
    }

    // (i) nearest active UAV within the phase's service radius
    std::vector<std::vector<std::size_t>> candidates(n_uavs);
    for (std::size_t n = 0; n < n_users; ++n) {
        std::optional<std::size_t> best;
        double best_d = 0.0;
        for (std::size_t u = 0; u < n_uavs; ++u) {
            if (!state.uavs[u].active)
                continue;
            const double d = horizontal_distance(state.uavs[u], state.users[n]);
            if (d <= radius && (!best || d < best_d)) {
                best = u;
                best_d = d;
            }
        }
        rep.association[n] = best;
        if (best)
            candidates[*best].push_back(n);
    }

    // Conservative interference: every other active UAV radiating its full budget.
    std::vector<double> worst_case_power(n_uavs, 0.0);
    for (std::size_t u = 0; u < n_uavs; ++u)
        worst_case_power[u] = state.uavs[u].active ? cfg.radio.p_max_w : 0.0;

    const double color_bandwidth = cfg.radio.bandwidth_total_hz / reuse;
    for (std::size_t u = 0; u < n_uavs; ++u) {
        auto& cand = candidates[u];
        // (ii) admission: H > M > L, ties broken by proximity, then index
        std::stable_sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
            const int pa = class_priority(state.users[a].demand);
            const int pb = class_priority(state.users[b].demand);
            if (pa != pb)
                return pa > pb;
            return horizontal_distance(state.uavs[u], state.users[a]) <
                   horizontal_distance(state.uavs[u], state.users[b]);
        });
        std::vector<std::size_t> admitted(cand.begin(),
                                          cand.begin() + std::min(cand.size(), cfg.max_users_per_uav));

        // (iii)+(iv): equal split of B/F, feasibility-driven power. Users that
        // would overrun P_max are dropped and the split is redone over the rest.
        std::vector<double> powers;
        while (!admitted.empty()) {
            const double b_user = color_bandwidth / static_cast<double>(admitted.size());
            std::vector<std::size_t> kept;
            powers.clear();
            double cumulative = 0.0;
            for (std::size_t n : admitted) {
                std::vector<double> gains_n(n_uavs, 0.0);
                for (std::size_t k = 0; k < n_uavs; ++k)
                    gains_n[k] = rep.gains(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
                const double i_cons = channel::interference(gains_n, worst_case_power, rep.colors, u, radio);
                const double p = channel::required_power(threshold_bps(cfg, state.users[n].demand), b_user, i_cons,
                                                         gains_n[u], radio);
                if (cumulative + p > cfg.radio.p_max_w)
                    continue;
                cumulative += p;
                kept.push_back(n);
                powers.push_back(p);
            }
            if (kept.size() == admitted.size())
                break;
            admitted = std::move(kept);
        }

        rep.admitted[u] = admitted;
        if (!admitted.empty()) {
            const double b_user = color_bandwidth / static_cast<double>(admitted.size());
            for (std::size_t k = 0; k < admitted.size(); ++k) {
                rep.bandwidth_hz[admitted[k]] = b_user;
                rep.power_w[admitted[k]] = powers[k];
                rep.uav_power_w[u] += powers[k];
            }
            rep.uav_bandwidth_hz[u] = b_user * static_cast<double>(admitted.size());
        }
    }

    // Realized SINR and rate with the powers actually radiated this slot.
    std::vector<double> gains_n(n_uavs, 0.0);
    for (std::size_t u = 0; u < n_uavs; ++u) {
        for (std::size_t n : rep.admitted[u]) {
            for (std::size_t k = 0; k < n_uavs; ++k)
                gains_n[k] = rep.gains(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
            const double i_real = channel::interference(gains_n, rep.uav_power_w, rep.colors, u, radio);
            const auto sr = channel::sinr_and_rate(rep.power_w[n], gains_n[u], rep.bandwidth_hz[n], i_real, radio);
            rep.interference_w[n] = i_real;
            rep.sinr[n] = sr.sinr;
            rep.rate_bps[n] = sr.rate_bps;
            const double thr = threshold_bps(cfg, state.users[n].demand);
            rep.served_ok[n] = sr.rate_bps >= thr * (1.0 - 1e-9);
        }
    }
    return rep;
}

std::size_t count_collisions(const WorldState& state, double d_min)
{
    std::size_t count = 0;
    for (std::size_t a = 0; a < state.uavs.size(); ++a)
        for (std::size_t b = a + 1; b < state.uavs.size(); ++b)
            if ((state.uavs[a].pos - state.uavs[b].pos).norm() < d_min)
                ++count;
    return count;
}

RewardBreakdown reward(const WorldState& state, const ScenarioConfig& cfg, const LinkReport& link,
                       std::span<const double> energy_j)
{
    const auto& ph = cfg.phases;
    RewardBreakdown r;
    for (std::size_t n = 0; n < state.users.size(); ++n)
        if (link.served_ok[n])
            r.qoe += ph.qoe_weights[static_cast<int>(state.users[n].demand)];

    const double e_total = std::accumulate(energy_j.begin(), energy_j.end(), 0.0);
    r.energy = ph.energy_weight * e_total;

    r.collisions = count_collisions(state, ph.d_min_m);
    r.collision = ph.collision_weight * static_cast<double>(r.collisions);

    const double cutoff = 2.0 * ph.service_radius_m[state.phase];
    const double two_sigma2 = 2.0 * ph.overlap_sigma_m * ph.overlap_sigma_m;
    for (std::size_t a = 0; a < state.uavs.size(); ++a) {
        for (std::size_t b = a + 1; b < state.uavs.size(); ++b) {
            const double d = (state.uavs[a].pos - state.uavs[b].pos).norm();
            if (d < cutoff)
                r.overlap_raw += std::exp(-d * d / two_sigma2);
        }
    }
    r.overlap = ph.overlap_weight[state.phase] * r.overlap_raw;
    r.total = r.qoe - r.energy - r.collision - r.overlap;
    return r;
}

Observation observe(const WorldState& state, const ScenarioConfig& cfg, const LinkReport& link, std::size_t agent)
{
    const std::size_t n_uavs = state.uavs.size();
    const std::size_t n_users = state.users.size();
    if (agent >= n_uavs)
        throw std::out_of_range("observe: agent index out of range");

    Observation obs;
    obs.reserve(cfg.obs_dim());
    // Ego-first UAV block: agent, agent+1, ... wrapping around.
    for (std::size_t k = 0; k < n_uavs; ++k) {
        const auto& p = state.uavs[(agent + k) % n_uavs].pos;
        obs.push_back(p.x() / cfg.area_m);
        obs.push_back(p.y() / cfg.area_m);
        obs.push_back(p.z() / cfg.area_m);
    }
    for (std::size_t k = 0; k < n_uavs; ++k)
        obs.push_back(state.uavs[(agent + k) % n_uavs].battery.fraction());
    for (std::size_t n = 0; n < n_users; ++n)
        obs.push_back(std::min(link.rate_bps[n] / cfg.rate_scale_bps, 2.0));
    for (std::size_t n = 0; n < n_users; ++n)
        obs.push_back(0.5 * static_cast<double>(static_cast<int>(state.users[n].demand)));
    for (std::size_t n = 0; n < n_users; ++n) {
        obs.push_back(state.users[n].pos.x() / cfg.area_m);
        obs.push_back(state.users[n].pos.y() / cfg.area_m);
    }
    return obs;
}

Observation global_state(const WorldState& state, const ScenarioConfig& cfg, const LinkReport& link)
{
    return observe(state, cfg, link, 0);
}

Environment::Environment(ScenarioConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

void Environment::refresh_demands()
{
    for (std::size_t n = 0; n < state_.users.size(); ++n)
        state_.users[n].demand = demand_class_of(n, state_.phase);
}

ResetOutcome Environment::reset(std::uint64_t seed)
{
    state_ = WorldState{};
    state_.seed = seed;
    state_.init_rng = RandomStream(seed, "env.init");
    state_.mobility_rng = RandomStream(seed, "env.mobility");
    state_.channel_rng = RandomStream(seed, "env.channel");
    return start_episode();
}

ResetOutcome Environment::next_episode() { return start_episode(); }

ResetOutcome Environment::start_episode()
{
    auto& rng = state_.init_rng;
    const double s = cfg_.area_m;
    state_.episode_step = 0;
    state_.phase = phase_of(state_.time_step, cfg_.phases.phase_len_steps);

    state_.uavs.assign(cfg_.n_uavs, UavState{});
    for (auto& uav : state_.uavs) {
        const double x = rng.uniform(0.0, s);
        const double y = rng.uniform(0.0, s);
        uav.pos = Eigen::Vector3d(x, y, cfg_.altitude_m);
        uav.battery = energy::Battery{cfg_.battery_capacity_j, cfg_.battery_capacity_j};
        uav.active = true;
    }

    const auto groups = mobility::split_groups(cfg_.n_users, cfg_.mobility.groups);
    state_.hotspots.assign(groups.size(), mobility::Hotspot{});
    state_.users.assign(cfg_.n_users, mobility::UserState{});
    for (std::size_t g = 0; g < groups.size(); ++g) {
        auto& h = state_.hotspots[g];
        const double cx = rng.uniform(0.0, s);
        const double cy = rng.uniform(0.0, s);
        const double wx = rng.uniform(0.0, s);
        const double wy = rng.uniform(0.0, s);
        h.center = Vec2(cx, cy);
        h.waypoint = Vec2(wx, wy);
        h.members = groups[g];
        for (std::size_t n : h.members) {
            auto& user = state_.users[n];
            const double dx = rng.normal(0.0, s / 10.0);
            const double dy = rng.normal(0.0, s / 10.0);
            user.pos = (h.center + Vec2(dx, dy)).cwiseMax(0.0).cwiseMin(s);
            user.vel = Vec2::Zero();
            user.group = g;
        }
    }
    refresh_demands();

    ResetOutcome out;
    out.link = allocate(state_, cfg_, state_.channel_rng);
    for (std::size_t a = 0; a < cfg_.n_uavs; ++a)
        out.observations.push_back(observe(state_, cfg_, out.link, a));
    out.global_state = global_state(state_, cfg_, out.link);
    return out;
}

StepOutcome Environment::step(std::span<const Action> actions)
{
    const ActionResult act = apply_actions(state_, cfg_, actions);

    // Mobility runs with the parameters of the phase the slot started in.
    const auto params = cfg_.mobility.for_phase(state_.phase);
    const std::size_t slot = state_.episode_step + 1;
    for (auto& h : state_.hotspots)
        h = mobility::step_center(std::move(h), params, cfg_.area_m, cfg_.dt_s, slot, state_.mobility_rng);
    if (cfg_.mobility.user_moves) {
        for (auto& user : state_.users) {
            const Vec2 v_gm = mobility::gm_velocity(user.vel, params, state_.mobility_rng);
            const Vec2 v_plus =
                mobility::blend_rpgm(v_gm, user, state_.hotspots[user.group].center, params, state_.mobility_rng);
            auto [pos, vel] = mobility::reflect_position(user.pos, v_plus, cfg_.dt_s, cfg_.area_m);
            user.pos = pos;
            user.vel = vel;
        }
    }

    ++state_.time_step;
    ++state_.episode_step;
    state_.phase = phase_of(state_.time_step, cfg_.phases.phase_len_steps);
    refresh_demands();

    StepOutcome out;
    out.info.link = allocate(state_, cfg_, state_.channel_rng);
    out.info.reward = reward(state_, cfg_, out.info.link, act.energy_j);
    out.info.time_step = state_.time_step;
    out.info.phase = state_.phase;
    out.info.collisions = out.info.reward.collisions;
    out.info.energy_j = act.energy_j;
    out.info.infeasible = act.infeasible;
    out.info.served = out.info.link.served_count();
    out.info.coverage =
        static_cast<double>(out.info.link.associated_count()) / static_cast<double>(state_.users.size());

    out.rewards.assign(cfg_.n_uavs, out.info.reward.total);
    for (std::size_t a = 0; a < cfg_.n_uavs; ++a)
        out.observations.push_back(observe(state_, cfg_, out.info.link, a));
    out.global_state = global_state(state_, cfg_, out.info.link);
    out.done = state_.episode_step >= cfg_.episode_len;
    return out;
}

} // namespace uavmoe::env
