#pragma once

// Phase controller: the non-gradient interventions applied around regime switches.

#include <cstddef>
#include <optional>
#include <vector>

#include "uavmoe/optimizer.hpp"
#include "uavmoe/params.hpp"
#include "uavmoe/policy.hpp"
#include "uavmoe/rng.hpp"
#include "uavmoe/train_config.hpp"

namespace uavmoe::train {

struct ControllerState
{
    std::size_t noise_left = 0;
    std::size_t freeze_left = 0;
    std::size_t warm_left = 0;
    std::size_t iters_since_switch = 0;
    std::size_t switches = 0;
    double kl_coef = 0.0;
    std::optional<nn::ParamStore> ref_params;
    double entropy_coef = 0.0;
    double lr = 0.0;
    double lr_router = 0.0;
    double tau = 1.0;
    double clip = 0.0;
    double target_kl = 0.0;
    bool router_frozen = false;
    double noise_energy_cum = 0.0;
    std::size_t noise_params_cum = 0; ///< scalars perturbed so far, summed over injections
    std::size_t noise_epochs_done = 0;
};

class PhaseController
{
public:
    /// `enabled` is false for the baselines, which then follow the plain global schedules.
    PhaseController(const TrainConfig& cfg, bool enabled, std::size_t phase_len_iters);

    bool enabled() const { return enabled_; }
    const ControllerState& state() const { return st_; }
    const TrainConfig& config() const { return cfg_; }

    void on_phase_switch(nn::PolicyModel& model, AdamState& actor_opt, AdamState& critic_opt, RandomStream& rng);
    /// Per-iteration schedules, evaluated before the rollout of iteration `iter`.
    void begin_iteration(std::size_t iter);
    /// Injects noise into the experts flagged in `selected` while the window is open.
    /// Returns true when an injection happened.
    bool epoch_noise(nn::PolicyModel& model, const std::vector<bool>& selected, RandomStream& rng);
    void end_iteration();

    GroupLr actor_lr() const;
    GroupLr critic_lr() const;

    /// Router temperature after `delta` iterations in a phase.
    double temperature(std::size_t delta) const;

private:
    bool on(bool feature) const { return enabled_ && feature; }
    void record_noise(double energy, std::size_t count);

    TrainConfig cfg_;
    bool enabled_;
    std::size_t phase_len_iters_;
    ControllerState st_;
};

} // namespace uavmoe::train
