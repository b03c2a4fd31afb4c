#include <doctest.h>

#include <cmath>

#include "uavmoe/environment.hpp"
#include "uavmoe/mobility.hpp"

using namespace uavmoe;
using namespace uavmoe::mobility;

TEST_SUITE("mobility")
{
    TEST_CASE("reflection keeps positions inside the area")
    {
        RandomStream rng(11, "fuzz");
        const double s = 1000.0;
        for (int k = 0; k < 100000; ++k) {
            const Vec2 p(rng.uniform(0.0, s), rng.uniform(0.0, s));
            const Vec2 v(rng.normal(0.0, 200.0), rng.normal(0.0, 200.0));
            const auto [q, w] = reflect_position(p, v, 60.0, s);
            REQUIRE(q.x() >= 0.0);
            REQUIRE(q.x() <= s);
            REQUIRE(q.y() >= 0.0);
            REQUIRE(q.y() <= s);
            CHECK(std::abs(w.x()) == std::abs(v.x()));
        }
    }

    TEST_CASE("huge excursions fold in bounded time")
    {
        const auto [q, w] = reflect_position(Vec2(10.0, 10.0), Vec2(1e12, -3e11), 60.0, 1000.0);
        CHECK(q.x() >= 0.0);
        CHECK(q.x() <= 1000.0);
        CHECK(q.y() >= 0.0);
        CHECK(q.y() <= 1000.0);
    }

    TEST_CASE("single reflection mirrors position and velocity")
    {
        const auto [q, w] = reflect_position(Vec2(990.0, 5.0), Vec2(1.0, -1.0), 20.0, 1000.0);
        CHECK(q.x() == doctest::Approx(990.0));
        CHECK(w.x() == -1.0);
        CHECK(q.y() == doctest::Approx(15.0));
        CHECK(w.y() == 1.0);
    }

    TEST_CASE("groups are contiguous blocks")
    {
        const auto g = split_groups(20, 3);
        REQUIRE(g.size() == 3);
        CHECK(g[0].size() == 7);
        CHECK(g[1].size() == 7);
        CHECK(g[2].size() == 6);
        CHECK(g[0].front() == 0);
        CHECK(g[1].front() == 7);
        CHECK(g[2].back() == 19);
    }

    TEST_CASE("Gauss-Markov limits")
    {
        RandomStream rng(2, "gm");
        MobilityParams p;
        p.gm_sigma = 0.0;
        p.gm_alpha = 1.0 - 1e-12;
        const Vec2 v(0.3, -0.7);
        CHECK((gm_velocity(v, p, rng) - v).norm() < 1e-9);

        p.gm_alpha = 0.0;
        p.v0_nominal = 0.8;
        const Vec2 w = gm_velocity(Vec2(3.0, 4.0), p, rng);
        CHECK(w.norm() == doctest::Approx(0.8).epsilon(1e-6));
        CHECK(w.x() / w.y() == doctest::Approx(0.75));
    }

    TEST_CASE("follow blend with zero gain and noise is the identity")
    {
        RandomStream rng(2, "rpgm");
        MobilityParams p;
        p.follow_kappa = 0.0;
        p.follow_sigma_f = 0.0;
        UserState u;
        u.pos = Vec2(100.0, 100.0);
        const Vec2 v(0.1, 0.2);
        CHECK((blend_rpgm(v, u, Vec2(500.0, 500.0), p, rng) - v).norm() == 0.0);
    }

    TEST_CASE("hotspot centres retarget on the period and stay in the area")
    {
        RandomStream rng(4, "center");
        MobilityParams p;
        p.center_speed = 50.0;
        Hotspot h;
        h.center = Vec2(500.0, 500.0);
        h.waypoint = Vec2(900.0, 100.0);
        Vec2 prev_wp = h.waypoint;
        for (std::size_t k = 1; k <= 64; ++k) {
            h = step_center(h, p, 1000.0, 60.0, k, rng);
            CHECK(h.center.minCoeff() >= 0.0);
            CHECK(h.center.maxCoeff() <= 1000.0);
            if (k % p.retarget_period != 0)
                CHECK(h.waypoint == prev_wp);
            prev_wp = h.waypoint;
        }
    }

    TEST_CASE("group membership is fixed over an episode")
    {
        env::ScenarioConfig cfg;
        cfg.phases.phase_len_steps = 64;
        env::Environment e(cfg);
        e.reset(5);
        std::vector<std::size_t> groups;
        for (const auto& u : e.state().users)
            groups.push_back(u.group);
        std::vector<env::Action> a(3, env::Action(0.3, -0.2));
        for (int t = 0; t < 32; ++t) {
            e.step(a);
            for (std::size_t n = 0; n < groups.size(); ++n)
                CHECK(e.state().users[n].group == groups[n]);
        }
    }
}
