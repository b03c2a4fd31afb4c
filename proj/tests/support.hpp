#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "uavmoe/environment.hpp"
#include "uavmoe/params.hpp"
#include "uavmoe/rng.hpp"
#include "uavmoe/train_config.hpp"

namespace testing {

/// Small scenario for fast trainer runs.
inline uavmoe::env::ScenarioConfig toy_scenario()
{
    uavmoe::env::ScenarioConfig s;
    s.n_uavs = 2;
    s.n_users = 4;
    s.episode_len = 8;
    s.mobility.groups = 2;
    return s;
}

inline uavmoe::train::TrainConfig toy_train(std::size_t iterations, std::size_t rollout = 32)
{
    uavmoe::train::TrainConfig t;
    t.rollout_len = rollout;
    t.total_steps = rollout * iterations;
    t.minibatches = 2;
    t.update_epochs = 2;
    t.diag_every = 1;
    t.diag_rows = 64;
    t.reward_scale = 1e-3;
    t.checkpoint_every = 0;
    return t;
}

inline void randomize(uavmoe::nn::ParamStore& p, std::uint64_t seed, double scale = 0.5)
{
    uavmoe::RandomStream rng(seed, "test.randomize");
    for (double& v : p.values())
        v = scale * rng.normal();
}

struct GradCheck
{
    double max_rel = 0.0;
    std::string worst;
    std::size_t checked = 0;
};

/// Central differences over every scalar of `p` against `analytic`. Relative
/// error is taken against max(|analytic|, |numeric|, 1e-6).
inline GradCheck check_gradient(uavmoe::nn::ParamStore& p, const uavmoe::nn::ParamStore& analytic,
                                const std::function<double()>& loss, double h = 1e-5)
{
    GradCheck out;
    for (const auto& info : p.infos()) {
        for (std::size_t k = 0; k < info.size(); ++k) {
            const std::size_t i = info.offset + k;
            const double keep = p.values()[i];
            p.values()[i] = keep + h;
            const double up = loss();
            p.values()[i] = keep - h;
            const double down = loss();
            p.values()[i] = keep;
            const double fd = (up - down) / (2.0 * h);
            const double a = analytic.values()[i];
            const double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-6});
            ++out.checked;
            if (rel > out.max_rel) {
                out.max_rel = rel;
                out.worst = info.name + "[" + std::to_string(k) + "] analytic=" + std::to_string(a) +
                            " fd=" + std::to_string(fd);
            }
        }
    }
    return out;
}

} // namespace testing
