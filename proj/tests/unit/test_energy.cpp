#include <doctest.h>

#include <cmath>

#include "uavmoe/energy.hpp"
#include "uavmoe/errors.hpp"

using namespace uavmoe;
using namespace uavmoe::energy;

namespace {

// Rotor power in its textbook form, independent of the library rearrangement.
double ref_power(double vh, double vz, const RotorParams& p)
{
    const double v2 = vh * vh + vz * vz;
    const double v0 = p.v0_hover;
    const double induced = std::sqrt(std::sqrt(1.0 + v2 * v2 / (4.0 * std::pow(v0, 4))) - v2 / (2.0 * v0 * v0));
    return p.p0_w * (1.0 + 3.0 * vh * vh / (p.u_tip * p.u_tip)) + p.pi_w * induced +
           0.5 * p.d0 * p.rho_air * p.solidity_s * p.disk_area_a * vh * vh * vh;
}

} // namespace

TEST_SUITE("energy")
{
    TEST_CASE("hover power is P0 + Pi exactly")
    {
        RotorParams p;
        CHECK(rotor_power(0.0, 0.0, p) == p.p0_w + p.pi_w);
        CHECK(hover_power(p) == 79.86 + 88.63);
    }

    TEST_CASE("rotor power matches the reference form")
    {
        RotorParams p;
        for (double vh : {0.0, 0.5, 1.4142, 5.0, 10.0, 25.0})
            for (double vz : {0.0, 1.0, 3.0})
                CHECK(rotor_power(vh, vz, p) == doctest::Approx(ref_power(vh, vz, p)).epsilon(1e-12));
    }

    TEST_CASE("infeasible motion is reported")
    {
        CHECK_THROWS_AS(slot_times(100.0, 0.0, 1.0, 1.0, 60.0), InfeasibleAction);
        CHECK_THROWS_AS(slot_times(40.0, 30.0, 1.0, 1.0, 60.0), InfeasibleAction);
        const auto t = slot_times(30.0, 20.0, 1.0, 2.0, 60.0);
        CHECK(t.horizontal == 30.0);
        CHECK(t.vertical == 10.0);
        CHECK(t.hover == 20.0);
    }

    TEST_CASE("slot energy is additive over sub-slots")
    {
        RotorParams p;
        const double vh = 1.5, vz = 2.0;
        const double whole = slot_energy(45.0, 20.0, vh, vz, 60.0, p);
        const double split = slot_energy(30.0, 8.0, vh, vz, 35.0, p) + slot_energy(15.0, 12.0, vh, vz, 25.0, p);
        CHECK(std::abs(whole - split) / whole < 1e-9);
    }

    TEST_CASE("slot energy for pure hover")
    {
        RotorParams p;
        CHECK(slot_energy(0.0, 0.0, 1.0, 1.0, 60.0, p) == doctest::Approx(hover_power(p) * 60.0));
    }

    TEST_CASE("battery clamps at zero and flags depletion")
    {
        Battery b{100.0, 1000.0};
        auto s = battery_step(b, 40.0);
        CHECK(s.battery.remaining_j == 60.0);
        CHECK_FALSE(s.depleted);
        s = battery_step(s.battery, 80.0);
        CHECK(s.battery.remaining_j == 0.0);
        CHECK(s.depleted);
        CHECK(s.battery.fraction() == 0.0);
        CHECK_THROWS_AS(battery_step(b, -1.0), std::invalid_argument);
    }

    TEST_CASE("negative horizontal speed is rejected")
    {
        CHECK_THROWS_AS(rotor_power(-1.0, 0.0, RotorParams{}), std::invalid_argument);
    }
}
