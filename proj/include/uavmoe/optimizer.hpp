#pragma once

// Adam with decoupled weight decay, per-group learning rates and global-norm clipping.

#include <array>
#include <cstddef>
#include <vector>

#include "uavmoe/params.hpp"
#include "uavmoe/rng.hpp"

namespace uavmoe::train {

struct AdamState
{
    std::vector<double> m;
    std::vector<double> v;
    std::size_t step = 0;

    AdamState() = default;
    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
    void reset();
    bool is_zero() const;
};

struct AdamHyper
{
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-4;
    double max_grad_norm = 0.5; ///< <= 0 disables clipping
};

/// Learning rate per parameter group; a zero rate skips the group entirely.
struct GroupLr
{
    std::array<double, 5> lr{};

    static GroupLr uniform(double value);
    double operator[](nn::ParamGroup g) const { return lr[static_cast<std::size_t>(g)]; }
    double& operator[](nn::ParamGroup g) { return lr[static_cast<std::size_t>(g)]; }
};

/// Scales `grad` in place so its global L2 norm is at most `max_norm`; returns the pre-clip norm.
double clip_grad_norm(nn::ParamStore& grad, double max_norm);

/// One optimizer step. `grad` is clipped in place first.
void adam_step(nn::ParamStore& params, nn::ParamStore& grad, AdamState& state, const GroupLr& lr,
               const AdamHyper& hyper);

/// Adds gamma0 * N(0, 1) to every expert tensor whose expert index is enabled in
/// `mask` (all experts when `mask` is empty). Returns the realized sum of squared deltas.
double inject_expert_noise(nn::ParamStore& params, double gamma0, RandomStream& rng,
                           const std::vector<bool>& mask = {});

} // namespace uavmoe::train
