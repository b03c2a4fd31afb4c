#pragma once

// Actor (MoE trunk + diagonal Gaussian head) and team critic.

#include <cstddef>
#include <string>

#include <Eigen/Core>

#include "uavmoe/moe_net.hpp"
#include "uavmoe/params.hpp"
#include "uavmoe/rng.hpp"

namespace uavmoe::nn {

enum class Algo { mlp, moe, smoe, pemamoe };

const char* algo_name(Algo a);
Algo algo_from_name(const std::string& name);

struct ModelConfig
{
    Eigen::Index obs_dim = 0;
    Eigen::Index state_dim = 0;
    Eigen::Index action_dim = 2;
    int n_experts = 3;
    int top_k = 1;
    Eigen::Index hidden = 32;
    Fusion fusion = Fusion::trunk;
    double logstd_init = 0.3;
};

NetConfig actor_net_config(const ModelConfig& cfg, Algo algo);
NetConfig critic_net_config(const ModelConfig& cfg, Algo algo);

/// Actor parameter count, log-std included.
std::size_t count_params(const ModelConfig& cfg, Algo algo);

class PolicyModel
{
public:
    PolicyModel(ModelConfig cfg, Algo algo);

    void init(RandomStream& rng);

    const ModelConfig& config() const { return cfg_; }
    Algo algo() const { return algo_; }

    ParamStore& actor_params() { return actor_params_; }
    const ParamStore& actor_params() const { return actor_params_; }
    ParamStore& critic_params() { return critic_params_; }
    const ParamStore& critic_params() const { return critic_params_; }

    MoeNet& actor() { return actor_; }
    const MoeNet& actor() const { return actor_; }
    MoeNet& critic() { return critic_; }
    const MoeNet& critic() const { return critic_; }

    std::size_t logstd_index() const { return logstd_; }
    Eigen::RowVectorXd log_std(const ParamStore& actor_params) const;
    Eigen::RowVectorXd log_std() const { return log_std(actor_params_); }
    void set_log_std(double value);

private:
    ModelConfig cfg_;
    Algo algo_;
    ParamStore actor_params_;
    ParamStore critic_params_;
    MoeNet actor_;
    MoeNet critic_;
    std::size_t logstd_ = 0;
};

namespace gaussian {

inline constexpr double kLog2Pi = 1.8378770664093454836;

double log_prob(const Eigen::RowVectorXd& mean, const Eigen::RowVectorXd& log_std, const Eigen::RowVectorXd& action);
double entropy(const Eigen::RowVectorXd& log_std);
/// KL(N(mu_p, sigma_p) || N(mu_q, sigma_q)) for diagonal Gaussians.
double kl(const Eigen::RowVectorXd& mu_p, const Eigen::RowVectorXd& ls_p, const Eigen::RowVectorXd& mu_q,
          const Eigen::RowVectorXd& ls_q);
Eigen::RowVectorXd sample(const Eigen::RowVectorXd& mean, const Eigen::RowVectorXd& log_std, RandomStream& rng);

} // namespace gaussian

} // namespace uavmoe::nn
