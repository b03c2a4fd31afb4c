#pragma once

// GAE and the MAPPO objective with its exact gradients.

#include <span>
#include <vector>

#include <Eigen/Core>

#include "uavmoe/params.hpp"
#include "uavmoe/policy.hpp"

namespace uavmoe::train {

struct GaeResult
{
    std::vector<double> advantages;
    std::vector<double> returns;
};

/// `values` has one more entry than `rewards` (the bootstrap value). `dones[t]`
/// marks an episode that ended after transition t.
GaeResult gae(std::span<const double> rewards, std::span<const double> values, const std::vector<bool>& dones,
              double gamma, double lambda);

struct ActorBatch
{
    Eigen::MatrixXd obs;
    Eigen::MatrixXd actions;
    Eigen::VectorXd old_log_prob;
    Eigen::VectorXd advantages; ///< raw; normalised inside the loss
    Eigen::MatrixXd xi;         ///< replayed gate noise, empty for noiseless routers
};

struct CriticBatch
{
    Eigen::MatrixXd states;
    Eigen::VectorXd returns;
    Eigen::MatrixXd xi;
};

struct LossCoefs
{
    double clip = 0.15;
    double vf_coef = 2.0;
    double ent_coef = 0.0;
    double kl_coef = 0.0;
};

struct LossStats
{
    double total = 0.0;
    double policy = 0.0;
    double value = 0.0;
    double entropy = 0.0;
    double kl_ref = 0.0;
    double approx_kl = 0.0;
    double clip_frac = 0.0;
};

struct Gradients
{
    nn::ParamStore actor;
    nn::ParamStore critic;
};

Eigen::VectorXd normalize_advantages(const Eigen::VectorXd& adv);

/// Clipped surrogate only. Gradients accumulate into `grad` when non-null.
LossStats ppo_loss(const nn::PolicyModel& model, const nn::ParamStore& actor_params, const ActorBatch& batch,
                   double clip, nn::ParamStore* grad);

/// Surrogate + value + entropy + KL-to-reference. The KL term is dropped when
/// `ref_actor` is null or its coefficient is zero.
LossStats total_loss(const nn::PolicyModel& model, const nn::ParamStore& actor_params,
                     const nn::ParamStore& critic_params, const ActorBatch& actor_batch,
                     const CriticBatch& critic_batch, const LossCoefs& coefs, const nn::ParamStore* ref_actor,
                     Gradients* grads);

} // namespace uavmoe::train
