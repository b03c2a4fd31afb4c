#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "uavmoe/environment.hpp"
#include "uavmoe/errors.hpp"

using namespace uavmoe;
using namespace uavmoe::env;

namespace {

ScenarioConfig scenario(std::size_t phase_len = 16)
{
    ScenarioConfig cfg;
    cfg.phases.phase_len_steps = phase_len;
    return cfg;
}

std::vector<Action> random_actions(std::size_t n, RandomStream& rng)
{
    std::vector<Action> a(n);
    for (auto& x : a)
        x = Action(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2));
    return a;
}

// Reward recomputed from the raw state, independent of the library routine.
double reference_reward(const WorldState& s, const ScenarioConfig& cfg, const LinkReport& link,
                        const std::vector<double>& energy)
{
    const auto& ph = cfg.phases;
    double qoe = 0.0;
    for (std::size_t n = 0; n < s.users.size(); ++n) {
        const int c = static_cast<int>(s.users[n].demand);
        if (link.rate_bps[n] >= ph.demand_thresholds_mbps[c] * 1e6 * (1.0 - 1e-9) && link.association[n])
            qoe += ph.qoe_weights[c];
    }
    double e = 0.0;
    for (double x : energy)
        e += x;
    double coll = 0.0, overlap = 0.0;
    for (std::size_t a = 0; a < s.uavs.size(); ++a)
        for (std::size_t b = a + 1; b < s.uavs.size(); ++b) {
            const double d = (s.uavs[a].pos - s.uavs[b].pos).norm();
            if (d < ph.d_min_m)
                coll += 1.0;
            if (d < 2.0 * ph.service_radius_m[s.phase])
                overlap += std::exp(-d * d / (2.0 * ph.overlap_sigma_m * ph.overlap_sigma_m));
        }
    return qoe - ph.energy_weight * e - ph.collision_weight * coll - ph.overlap_weight[s.phase] * overlap;
}

} // namespace

TEST_SUITE("environment")
{
    TEST_CASE("resource caps hold on every step of random episodes")
    {
        auto cfg = scenario(16);
        Environment e(cfg);
        e.reset(3);
        RandomStream rng(9, "actions");
        std::size_t checked = 0;
        for (int ep = 0; ep < 100; ++ep) {
            if (ep > 0)
                e.next_episode();
            for (std::size_t t = 0; t < cfg.episode_len; ++t) {
                const auto out = e.step(random_actions(cfg.n_uavs, rng));
                const auto& link = out.info.link;
                const int reuse = cfg.phases.reuse_factor[out.info.phase];
                for (std::size_t u = 0; u < cfg.n_uavs; ++u) {
                    REQUIRE(link.uav_power_w[u] <= cfg.radio.p_max_w * (1.0 + 1e-12));
                    REQUIRE(link.uav_bandwidth_hz[u] <= cfg.radio.bandwidth_total_hz / reuse * (1.0 + 1e-12));
                    REQUIRE(link.admitted[u].size() <= cfg.max_users_per_uav);
                }
                ++checked;
            }
        }
        CHECK(checked == 100 * cfg.episode_len);
    }

    TEST_CASE("reward components sum to the total and match a direct recompute")
    {
        auto cfg = scenario(8);
        cfg.max_step_m = 60.0;
        Environment e(cfg);
        e.reset(21);
        RandomStream rng(1, "actions");
        for (int t = 0; t < 96; ++t) {
            const auto out = e.step(random_actions(cfg.n_uavs, rng));
            const auto& r = out.info.reward;
            CHECK(r.total == r.qoe - r.energy - r.collision - r.overlap);
            CHECK(r.total == doctest::Approx(reference_reward(e.state(), cfg, out.info.link, out.info.energy_j))
                                 .epsilon(1e-12));
            for (double x : out.rewards)
                CHECK(x == r.total);
            if (out.done)
                e.next_episode();
        }
    }

    TEST_CASE("collisions are counted and penalised")
    {
        auto cfg = scenario();
        Environment e(cfg);
        e.reset(1);
        auto& s = e.mutable_state();
        s.uavs[0].pos = Eigen::Vector3d(500.0, 500.0, 100.0);
        s.uavs[1].pos = Eigen::Vector3d(520.0, 500.0, 100.0);
        s.uavs[2].pos = Eigen::Vector3d(900.0, 900.0, 100.0);
        CHECK(count_collisions(s, cfg.phases.d_min_m) == 1);
        const std::vector<Action> hold(3, Action::Zero());
        const auto out = e.step(hold);
        CHECK(out.info.collisions == 1);
        CHECK(out.info.reward.collision == cfg.phases.collision_weight);
    }

    TEST_CASE("phase sequence cycles with switches at multiples of L")
    {
        const std::size_t L = 5;
        auto cfg = scenario(L);
        cfg.episode_len = 7;
        Environment e(cfg);
        e.reset(2);
        const std::vector<Action> hold(cfg.n_uavs, Action::Zero());
        for (int k = 0; k < 60; ++k) {
            const auto out = e.step(hold);
            const std::size_t t = out.info.time_step;
            CHECK(out.info.phase == static_cast<int>((t / L) % 3));
            if (out.done)
                e.next_episode();
        }
        CHECK(phase_of(0, L) == 0);
        CHECK(phase_of(4, L) == 0);
        CHECK(phase_of(5, L) == 1);
        CHECK(phase_of(10, L) == 2);
        CHECK(phase_of(15, L) == 0);
    }

    TEST_CASE("observations do not carry the phase index")
    {
        // Freeze everything that could differ between two phases except the index.
        auto cfg = scenario(1);
        cfg.mobility.user_moves = false;
        cfg.mobility.center_speed_factor = 0.0;
        cfg.phases.service_radius_m = {150.0, 150.0, 150.0};
        cfg.radio.small_scale_fading = false;
        cfg.radio.shadow_sigma_los_db = 0.0;
        cfg.radio.shadow_sigma_nlos_db = 0.0;
        Environment e(cfg);
        e.reset(4);
        CHECK(e.obs_dim() == 4 * cfg.n_uavs + 4 * cfg.n_users);
        CHECK(e.obs_dim() == 92);

        WorldState a = e.state();
        WorldState b = e.state();
        a.phase = 0;
        b.phase = 1;
        for (std::size_t n = 0; n < a.users.size(); ++n)
            b.users[n].demand = a.users[n].demand;
        RandomStream ra(1, "x"), rb(1, "x");
        const auto la = allocate(a, cfg, ra);
        const auto lb = allocate(b, cfg, rb);
        for (std::size_t k = 0; k < cfg.n_uavs; ++k)
            CHECK(observe(a, cfg, la, k) == observe(b, cfg, lb, k));
    }

    TEST_CASE("observations are ego-first")
    {
        auto cfg = scenario();
        Environment e(cfg);
        const auto r = e.reset(8);
        const auto& s = e.state();
        REQUIRE(r.observations.size() == 3);
        for (std::size_t a = 0; a < 3; ++a) {
            const auto& o = r.observations[a];
            REQUIRE(o.size() == e.obs_dim());
            CHECK(o[0] == s.uavs[a].pos.x() / cfg.area_m);
            CHECK(o[1] == s.uavs[a].pos.y() / cfg.area_m);
            CHECK(o[9] == s.uavs[a].battery.fraction());
        }
        CHECK(r.global_state == r.observations[0]);
    }

    TEST_CASE("demand classes rotate with the phase")
    {
        CHECK(demand_class_of(0, 0) == mobility::DemandClass::low);
        CHECK(demand_class_of(0, 1) == mobility::DemandClass::medium);
        CHECK(demand_class_of(4, 2) == mobility::DemandClass::low);
    }

    TEST_CASE("same seed gives identical trajectories")
    {
        auto cfg = scenario(6);
        Environment a(cfg), b(cfg);
        a.reset(77);
        b.reset(77);
        RandomStream ra(5, "act"), rb(5, "act");
        for (int t = 0; t < 40; ++t) {
            const auto oa = a.step(random_actions(3, ra));
            const auto ob = b.step(random_actions(3, rb));
            REQUIRE(oa.observations == ob.observations);
            REQUIRE(oa.rewards == ob.rewards);
            if (oa.done) {
                a.next_episode();
                b.next_episode();
            }
        }
    }

    TEST_CASE("non-finite or mis-sized actions are rejected")
    {
        Environment e(scenario());
        e.reset(1);
        std::vector<Action> bad(3, Action::Zero());
        bad[1].x() = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(e.step(bad), InvalidAction);
        const std::vector<Action> few(2, Action::Zero());
        CHECK_THROWS_AS(e.step(few), InvalidAction);
    }

    TEST_CASE("actions are clipped and positions stay in the area")
    {
        auto cfg = scenario();
        Environment e(cfg);
        e.reset(1);
        auto& s = e.mutable_state();
        s.uavs[0].pos = Eigen::Vector3d(10.0, 500.0, 100.0);
        const Eigen::Vector3d before1 = s.uavs[1].pos;
        const std::vector<Action> a{Action(-5.0, 0.0), Action(0.5, 0.0), Action::Zero()};
        e.step(a);
        CHECK(e.state().uavs[0].pos.x() == 0.0);
        const double expected = std::min(before1.x() + 30.0, cfg.area_m);
        CHECK(e.state().uavs[1].pos.x() == doctest::Approx(expected));
    }

    TEST_CASE("higher demand classes are admitted first")
    {
        auto cfg = scenario();
        cfg.n_uavs = 1;
        cfg.n_users = 9;
        cfg.mobility.groups = 1;
        cfg.max_users_per_uav = 3;
        cfg.radio.small_scale_fading = false;
        cfg.radio.shadow_sigma_los_db = 0.0;
        cfg.radio.shadow_sigma_nlos_db = 0.0;
        Environment e(cfg);
        e.reset(1);
        WorldState s = e.state();
        s.uavs[0].pos = Eigen::Vector3d(500.0, 500.0, 100.0);
        for (std::size_t n = 0; n < 9; ++n) {
            s.users[n].pos = Eigen::Vector2d(500.0 + 10.0 * static_cast<double>(n), 500.0);
            s.users[n].demand = demand_class_of(n, 0);
        }
        RandomStream rng(1, "c");
        const auto link = allocate(s, cfg, rng);
        // High-demand users are 2, 5, 8; ordered by distance.
        REQUIRE(link.admitted[0].size() <= 3);
        for (std::size_t n : link.admitted[0])
            CHECK(s.users[n].demand == mobility::DemandClass::high);
        for (std::size_t n = 0; n < 9; ++n)
            CHECK(link.association[n] == std::optional<std::size_t>(0));
    }

    TEST_CASE("users outside the service radius stay unassociated")
    {
        auto cfg = scenario();
        cfg.n_uavs = 1;
        cfg.n_users = 2;
        cfg.mobility.groups = 1;
        Environment e(cfg);
        e.reset(1);
        WorldState s = e.state();
        s.uavs[0].pos = Eigen::Vector3d(0.0, 0.0, 100.0);
        s.users[0].pos = Eigen::Vector2d(100.0, 0.0);
        s.users[1].pos = Eigen::Vector2d(900.0, 900.0);
        RandomStream rng(1, "c");
        const auto link = allocate(s, cfg, rng);
        CHECK(link.association[0].has_value());
        CHECK_FALSE(link.association[1].has_value());
        CHECK(link.rate_bps[1] == 0.0);
    }

    TEST_CASE("a depleted UAV stops acting and serving")
    {
        auto cfg = scenario();
        cfg.battery_capacity_j = 5000.0;
        Environment e(cfg);
        e.reset(1);
        const std::vector<Action> hold(3, Action::Zero());
        const auto out = e.step(hold);
        for (const auto& u : e.state().uavs) {
            CHECK_FALSE(u.active);
            CHECK(u.battery.remaining_j == 0.0);
        }
        CHECK(out.info.served == 0);
        const auto out2 = e.step(hold);
        for (double x : out2.info.energy_j)
            CHECK(x == 0.0);
    }

    TEST_CASE("episodes end at the configured length and the clock persists")
    {
        auto cfg = scenario();
        cfg.episode_len = 4;
        Environment e(cfg);
        e.reset(1);
        const std::vector<Action> hold(3, Action::Zero());
        for (int t = 0; t < 3; ++t)
            CHECK_FALSE(e.step(hold).done);
        CHECK(e.step(hold).done);
        e.next_episode();
        CHECK(e.state().time_step == 4);
        CHECK(e.state().episode_step == 0);
    }

    TEST_CASE("invalid scenarios are rejected with the offending key")
    {
        auto cfg = scenario();
        cfg.n_uavs = 0;
        try {
            cfg.validate();
            FAIL("expected ConfigError");
        } catch (const ConfigError& err) {
            CHECK(err.path() == "env.n_uavs");
        }
        cfg = scenario(0);
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
}
