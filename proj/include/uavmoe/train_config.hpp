#pragma once

#include <cstddef>

namespace uavmoe::train {

/// Individually switchable parts of the phase controller. With every flag
/// off the controlled algorithm trains exactly like its uncontrolled twin.
struct ControllerFeatures
{
    bool noise = true;
    bool logstd_reset = true;
    bool entropy_anneal = true;
    bool lr_anneal = true;
    bool temperature = true;
    bool kl_ref = true;
    bool adam_reset = true;
    bool router_freeze = true;
    bool conservative_warm = true;

    bool any() const
    {
        return noise || logstd_reset || entropy_anneal || lr_anneal || temperature || kl_ref || adam_reset ||
               router_freeze || conservative_warm;
    }
    static ControllerFeatures none() { return {false, false, false, false, false, false, false, false, false}; }
};

struct TrainConfig
{
    std::size_t total_steps = 22118400;
    std::size_t rollout_len = 2048;
    std::size_t minibatches = 32;
    std::size_t update_epochs = 8;
    double lr = 3e-4;
    double weight_decay = 1e-4;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double gamma = 0.99;
    double gae_lambda = 0.95;
    double clip = 0.15;
    double vf_coef = 2.0;
    double ent_start = 0.01;
    double ent_end = 0.003;
    double ent_anneal_portion = 0.3;
    double target_kl = 0.1;
    double max_grad_norm = 0.5;
    double kl_ref_init = 0.1;
    double kl_ref_decay = 0.985;
    double kl_ref_release = 1e-3;
    std::size_t k_warm = 80;
    std::size_t k_freeze_router = 30;
    double phase_lr_mult = 0.3;
    std::size_t lr_warmup_iters = 200;
    double logstd_reset = 0.3;
    std::size_t noise_epochs = 30;
    double noise_scale = 0.005;
    double tau_min = 0.7;
    double tau_max = 2.0;
    double tau_kappa = 9.0;
    double tau_beta = -0.05;
    double reward_scale = 1.0;

    std::size_t diag_every = 10;
    std::size_t diag_rows = 512;
    double dnf_delta = 0.025;
    std::size_t checkpoint_every = 100;

    ControllerFeatures features;

    std::size_t iterations() const { return total_steps / rollout_len; }
    void validate() const;
};

} // namespace uavmoe::train
