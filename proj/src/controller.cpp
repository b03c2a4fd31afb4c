#include "uavmoe/controller.hpp"

#include <algorithm>
#include <cmath>

namespace uavmoe::train {

using nn::ParamGroup;

PhaseController::PhaseController(const TrainConfig& cfg, bool enabled, std::size_t phase_len_iters)
    : cfg_(cfg), enabled_(enabled), phase_len_iters_(std::max<std::size_t>(phase_len_iters, 1))
{
    st_.entropy_coef = cfg_.ent_start;
    st_.lr = cfg_.lr;
    st_.lr_router = cfg_.lr;
    st_.clip = cfg_.clip;
    st_.target_kl = cfg_.target_kl;
    st_.tau = on(cfg_.features.temperature) ? temperature(0) : 1.0;
}

double PhaseController::temperature(std::size_t delta) const
{
    const double d = static_cast<double>(delta);
    return cfg_.tau_min + (cfg_.tau_max - cfg_.tau_min) / (1.0 + cfg_.tau_kappa * std::exp(-cfg_.tau_beta * d));
}

void PhaseController::record_noise(double energy, std::size_t count)
{
    st_.noise_energy_cum += energy;
    st_.noise_params_cum += count;
}

void PhaseController::on_phase_switch(nn::PolicyModel& model, AdamState& actor_opt, AdamState& critic_opt,
                                      RandomStream& rng)
{
    if (!enabled_)
        return;
    const auto& f = cfg_.features;
    ++st_.switches;
    st_.iters_since_switch = 0;
    if (f.kl_ref) {
        st_.ref_params = model.actor_params();
        st_.kl_coef = cfg_.kl_ref_init;
    }
    if (f.adam_reset) {
        actor_opt.reset();
        critic_opt.reset();
    }
    if (f.noise) {
        const double e = inject_expert_noise(model.actor_params(), cfg_.noise_scale, rng);
        record_noise(e, cfg_.noise_scale != 0.0 ? model.actor_params().group_size(ParamGroup::expert) : 0);
        st_.noise_left = cfg_.noise_epochs;
    }
    if (f.router_freeze)
        st_.freeze_left = cfg_.k_freeze_router;
    if (f.logstd_reset)
        model.set_log_std(cfg_.logstd_reset);
    if (f.conservative_warm)
        st_.warm_left = cfg_.k_warm;
}

void PhaseController::begin_iteration(std::size_t iter)
{
    const auto& f = cfg_.features;
    const double delta = static_cast<double>(st_.iters_since_switch);

    // Entropy: restarted at each switch when annealing per phase, otherwise one global ramp.
    double clock = static_cast<double>(iter);
    double span = cfg_.ent_anneal_portion * static_cast<double>(cfg_.iterations());
    if (on(f.entropy_anneal)) {
        clock = delta;
        span = cfg_.ent_anneal_portion * static_cast<double>(phase_len_iters_);
    }
    const double frac = span > 0.0 ? std::min(clock / span, 1.0) : 1.0;
    st_.entropy_coef = cfg_.ent_start + (cfg_.ent_end - cfg_.ent_start) * frac;

    st_.lr = cfg_.lr;
    if (on(f.lr_anneal) && st_.switches > 0) {
        const double w = cfg_.lr_warmup_iters > 0
                             ? std::min(delta / static_cast<double>(cfg_.lr_warmup_iters), 1.0)
                             : 1.0;
        st_.lr = cfg_.lr * (cfg_.phase_lr_mult + (1.0 - cfg_.phase_lr_mult) * w);
    }

    st_.router_frozen = on(f.router_freeze) && st_.freeze_left > 0;
    st_.lr_router = st_.router_frozen ? 0.0 : st_.lr;
    if (st_.router_frozen)
        --st_.freeze_left;

    st_.tau = on(f.temperature) ? temperature(st_.iters_since_switch) : 1.0;

    st_.clip = cfg_.clip;
    st_.target_kl = cfg_.target_kl;
    if (on(f.conservative_warm) && st_.warm_left > 0) {
        st_.clip = 0.5 * cfg_.clip;
        st_.target_kl = 0.5 * cfg_.target_kl;
        --st_.warm_left;
    }
}

bool PhaseController::epoch_noise(nn::PolicyModel& model, const std::vector<bool>& selected, RandomStream& rng)
{
    if (!on(cfg_.features.noise) || st_.noise_left == 0)
        return false;
    std::size_t count = 0;
    for (const auto& info : model.actor_params().infos())
        if (info.group == ParamGroup::expert && static_cast<std::size_t>(info.expert) < selected.size() &&
            selected[static_cast<std::size_t>(info.expert)])
            count += info.size();
    const double e = inject_expert_noise(model.actor_params(), cfg_.noise_scale, rng, selected);
    record_noise(e, cfg_.noise_scale != 0.0 ? count : 0);
    --st_.noise_left;
    ++st_.noise_epochs_done;
    return true;
}

void PhaseController::end_iteration()
{
    if (st_.kl_coef > 0.0) {
        st_.kl_coef *= cfg_.kl_ref_decay;
        if (st_.kl_coef < cfg_.kl_ref_release) {
            st_.kl_coef = 0.0;
            st_.ref_params.reset();
        }
    }
    ++st_.iters_since_switch;
}

GroupLr PhaseController::actor_lr() const
{
    GroupLr g = GroupLr::uniform(st_.lr);
    g[ParamGroup::router] = st_.lr_router;
    return g;
}

GroupLr PhaseController::critic_lr() const { return GroupLr::uniform(st_.lr); }

} // namespace uavmoe::train
