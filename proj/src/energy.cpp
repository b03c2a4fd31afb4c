#include "uavmoe/energy.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "uavmoe/errors.hpp"

namespace uavmoe::energy {

void RotorParams::validate(const char* prefix) const
{
    const std::string p = std::string(prefix) + ".";
    const std::pair<double, const char*> fields[] = {
        {p0_w, "p0_w"},       {pi_w, "pi_w"},       {u_tip, "u_tip"},
        {v0_hover, "v0_hover"}, {d0, "d0"},         {rho_air, "rho_air"},
        {solidity_s, "solidity_s"}, {disk_area_a, "disk_area_a"}};
    for (const auto& [value, name] : fields) {
        if (!(value > 0.0) || !std::isfinite(value))
            throw ConfigError(p + name, "must be a positive finite number");
    }
}

double rotor_power(double vh, double vz, const RotorParams& params)
{
    if (!(vh >= 0.0) || !std::isfinite(vh) || !std::isfinite(vz))
        throw std::invalid_argument("rotor_power: vh must be finite and non-negative");

    const double v2 = vh * vh + vz * vz;
    const double v0_2 = params.v0_hover * params.v0_hover;
    const double profile = params.p0_w * (1.0 + 3.0 * vh * vh / (params.u_tip * params.u_tip));
    // sqrt(1+x^2) - x with x = v2 / (2 v0^2); lies in (0, 1] for x >= 0.
    const double x = v2 / (2.0 * v0_2);
    const double bracket = std::sqrt(1.0 + x * x) - x;
    const double induced = params.pi_w * std::sqrt(bracket);
    const double parasite = 0.5 * params.d0 * params.rho_air * params.solidity_s * params.disk_area_a * vh * vh * vh;
    return profile + induced + parasite;
}

SlotTimes slot_times(double s_h, double s_v, double vh, double vz, double dt)
{
    if (!(dt > 0.0))
        throw std::invalid_argument("slot_times: dt must be positive");
    if (s_h < 0.0 || s_v < 0.0)
        throw std::invalid_argument("slot_times: displacements must be non-negative");

    auto segment = [](double s, double v, const char* axis) {
        if (s == 0.0)
            return 0.0;
        if (!(std::abs(v) > 0.0))
            throw std::invalid_argument(std::string("slot_times: zero ") + axis + " speed with non-zero displacement");
        return s / std::abs(v);
    };

    SlotTimes t;
    t.horizontal = segment(s_h, vh, "horizontal");
    t.vertical = segment(s_v, vz, "vertical");
    const double moving = t.horizontal + t.vertical;
    if (moving > dt * (1.0 + 1e-12))
        throw InfeasibleAction("motion time " + std::to_string(moving) + " s exceeds slot length " +
                               std::to_string(dt) + " s");
    t.hover = std::max(dt - moving, 0.0);
    return t;
}

double slot_energy(double s_h, double s_v, double vh, double vz, double dt, const RotorParams& params)
{
    const SlotTimes t = slot_times(s_h, s_v, vh, vz, dt);
    double e = hover_power(params) * t.hover;
    if (t.horizontal > 0.0)
        e += rotor_power(std::abs(vh), 0.0, params) * t.horizontal;
    if (t.vertical > 0.0)
        e += rotor_power(0.0, vz, params) * t.vertical;
    return e;
}

BatteryStep battery_step(const Battery& b, double e)
{
    if (e < 0.0)
        throw std::invalid_argument("battery_step: energy must be non-negative");
    BatteryStep out{b, false};
    out.battery.remaining_j = b.remaining_j - e;
    if (out.battery.remaining_j < 0.0) {
        out.battery.remaining_j = 0.0;
        out.depleted = true;
    }
    return out;
}

} // namespace uavmoe::energy
