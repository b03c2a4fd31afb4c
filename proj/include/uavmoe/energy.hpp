#pragma once

// Rotary-wing propulsion power and per-slot energy bookkeeping.

namespace uavmoe::energy {

/// Rotary-wing constants. Defaults are the common literature values for a
/// small quadrotor; the propulsion model itself carries no numbers.
struct RotorParams
{
    double p0_w = 79.86;    ///< blade profile power in hover
    double pi_w = 88.63;    ///< induced power in hover
    double u_tip = 120.0;   ///< blade tip speed [m/s]
    double v0_hover = 4.03; ///< mean rotor induced velocity in hover [m/s]
    double d0 = 0.6;        ///< fuselage drag ratio
    double rho_air = 1.225; ///< [kg/m^3]
    double solidity_s = 0.05;
    double disk_area_a = 0.503; ///< [m^2]

    void validate(const char* prefix = "energy") const;
};

/// Propulsion power at horizontal speed `vh` (>= 0) and vertical speed `vz`.
double rotor_power(double vh, double vz, const RotorParams& params);

inline double hover_power(const RotorParams& params) { return params.p0_w + params.pi_w; }

struct SlotTimes
{
    double horizontal = 0.0;
    double vertical = 0.0;
    double hover = 0.0;
};

/// Splits a slot of length `dt` into horizontal, vertical and hover segments.
/// Throws InfeasibleAction when the motion does not fit into the slot.
SlotTimes slot_times(double s_h, double s_v, double vh, double vz, double dt);

double slot_energy(double s_h, double s_v, double vh, double vz, double dt, const RotorParams& params);

struct Battery
{
    double remaining_j = 0.0;
    double capacity_j = 0.0;

    double fraction() const { return capacity_j > 0.0 ? remaining_j / capacity_j : 0.0; }
};

struct BatteryStep
{
    Battery battery;
    bool depleted = false;
};

/// Draws `e` joules; clamps at zero and flags depletion instead of going negative.
BatteryStep battery_step(const Battery& b, double e);

} // namespace uavmoe::energy
