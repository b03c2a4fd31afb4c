#include "uavmoe/policy.hpp"

#include <cmath>
#include <stdexcept>

namespace uavmoe::nn {

const char* algo_name(Algo a)
{
    switch (a) {
    case Algo::mlp: return "mlp";
    case Algo::moe: return "moe";
    case Algo::smoe: return "smoe";
    case Algo::pemamoe: return "pemamoe";
    }
    return "?";
}

Algo algo_from_name(const std::string& name)
{
    for (auto a : {Algo::mlp, Algo::moe, Algo::smoe, Algo::pemamoe})
        if (name == algo_name(a))
            return a;
    throw std::invalid_argument("unknown algorithm '" + name + "' (expected mlp, moe, smoe or pemamoe)");
}

static NetConfig net_config(const ModelConfig& cfg, Algo algo, Eigen::Index in, Eigen::Index out, bool critic)
{
    NetConfig n;
    n.in_dim = in;
    n.out_dim = out;
    n.hidden = cfg.hidden;
    n.n_experts = cfg.n_experts;
    n.top_k = cfg.top_k;
    n.fusion = cfg.fusion;
    n.critic = critic;
    switch (algo) {
    case Algo::mlp:
        n.kind = ArchKind::mlp;
        break;
    case Algo::moe:
        n.kind = ArchKind::dense_moe;
        break;
    case Algo::smoe:
    case Algo::pemamoe:
        n.kind = ArchKind::sparse_moe;
        n.gate_noise = true;
        break;
    }
    return n;
}

NetConfig actor_net_config(const ModelConfig& cfg, Algo algo)
{
    return net_config(cfg, algo, cfg.obs_dim, cfg.action_dim, false);
}

NetConfig critic_net_config(const ModelConfig& cfg, Algo algo)
{
    NetConfig n = net_config(cfg, algo, cfg.state_dim, 1, true);
    // The value head is always a shared linear readout.
    n.fusion = Fusion::trunk;
    return n;
}

std::size_t count_params(const ModelConfig& cfg, Algo algo)
{
    return MoeNet::count_params(actor_net_config(cfg, algo)) + static_cast<std::size_t>(cfg.action_dim);
}

PolicyModel::PolicyModel(ModelConfig cfg, Algo algo) : cfg_(cfg), algo_(algo)
{
    actor_ = MoeNet(actor_net_config(cfg_, algo_), actor_params_, "");
    logstd_ = actor_params_.add("logstd", 1, cfg_.action_dim, ParamGroup::logstd);
    critic_ = MoeNet(critic_net_config(cfg_, algo_), critic_params_, "");
}

void PolicyModel::init(RandomStream& rng)
{
    actor_.init(actor_params_, rng, 0.01);
    critic_.init(critic_params_, rng, 1.0);
    set_log_std(cfg_.logstd_init);
}

Eigen::RowVectorXd PolicyModel::log_std(const ParamStore& p) const { return p.mat(logstd_).row(0); }

void PolicyModel::set_log_std(double value) { actor_params_.mat(logstd_).setConstant(value); }

namespace gaussian {

double log_prob(const Eigen::RowVectorXd& mean, const Eigen::RowVectorXd& log_std, const Eigen::RowVectorXd& action)
{
    double lp = 0.0;
    for (Eigen::Index i = 0; i < mean.size(); ++i) {
        const double z = (action(i) - mean(i)) * std::exp(-log_std(i));
        lp += -0.5 * z * z - log_std(i) - 0.5 * kLog2Pi;
    }
    return lp;
}

double entropy(const Eigen::RowVectorXd& log_std)
{
    return log_std.sum() + 0.5 * (kLog2Pi + 1.0) * static_cast<double>(log_std.size());
}

double kl(const Eigen::RowVectorXd& mu_p, const Eigen::RowVectorXd& ls_p, const Eigen::RowVectorXd& mu_q,
          const Eigen::RowVectorXd& ls_q)
{
    double k = 0.0;
    for (Eigen::Index i = 0; i < mu_p.size(); ++i) {
        const double var_p = std::exp(2.0 * ls_p(i));
        const double var_q = std::exp(2.0 * ls_q(i));
        const double dm = mu_p(i) - mu_q(i);
        k += ls_q(i) - ls_p(i) + (var_p + dm * dm) / (2.0 * var_q) - 0.5;
    }
    return k;
}

Eigen::RowVectorXd sample(const Eigen::RowVectorXd& mean, const Eigen::RowVectorXd& log_std, RandomStream& rng)
{
    Eigen::RowVectorXd a(mean.size());
    for (Eigen::Index i = 0; i < mean.size(); ++i)
        a(i) = mean(i) + std::exp(log_std(i)) * rng.normal();
    return a;
}

} // namespace gaussian

} // namespace uavmoe::nn
