#include "uavmoe/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uavmoe::train {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

GaeResult gae(std::span<const double> rewards, std::span<const double> values, const std::vector<bool>& dones,
              double gamma, double lambda)
{
    const std::size_t t_len = rewards.size();
    if (values.size() != t_len + 1 || dones.size() != t_len)
        throw std::invalid_argument("gae: expected values of length T+1 and dones of length T");
    GaeResult out;
    out.advantages.assign(t_len, 0.0);
    out.returns.assign(t_len, 0.0);
    double next_adv = 0.0;
    for (std::size_t k = t_len; k-- > 0;) {
        const double keep = dones[k] ? 0.0 : 1.0;
        const double delta = rewards[k] + gamma * values[k + 1] * keep - values[k];
        next_adv = delta + gamma * lambda * keep * next_adv;
        out.advantages[k] = next_adv;
        out.returns[k] = next_adv + values[k];
    }
    return out;
}

VectorXd normalize_advantages(const VectorXd& adv)
{
    if (adv.size() == 0)
        return adv;
    const double mean = adv.mean();
    const double var = (adv.array() - mean).square().mean();
    return (adv.array() - mean) / (std::sqrt(var) + 1e-8);
}

namespace {

nn::ForwardOptions replay(const MatrixXd& xi)
{
    nn::ForwardOptions o;
    o.training = xi.size() > 0;
    o.xi = xi.size() > 0 ? &xi : nullptr;
    return o;
}

struct ActorTerms
{
    LossStats stats;
    MatrixXd d_mean;
    RowVectorXd d_logstd;
};

// Surrogate, entropy and KL terms; gradients w.r.t. the Gaussian parameters.
ActorTerms actor_terms(const nn::PolicyModel& model, const nn::ParamStore& params, const ActorBatch& b,
                       const LossCoefs& c, const nn::ParamStore* ref, nn::ForwardCache& cache)
{
    const Index n = b.obs.rows();
    if (n == 0)
        throw std::invalid_argument("loss: empty actor batch");
    if (b.actions.rows() != n || b.old_log_prob.size() != n || b.advantages.size() != n)
        throw std::invalid_argument("loss: actor batch fields disagree on the number of rows");

    cache = model.actor().forward(params, b.obs, replay(b.xi));
    const MatrixXd& mu = cache.output;
    const RowVectorXd ls = model.log_std(params);
    const RowVectorXd inv_var = (-2.0 * ls.array()).exp();
    const VectorXd adv = normalize_advantages(b.advantages);
    const double inv_n = 1.0 / static_cast<double>(n);

    ActorTerms t;
    t.d_mean = MatrixXd::Zero(n, mu.cols());
    t.d_logstd = RowVectorXd::Zero(ls.size());

    double clipped = 0.0;
    for (Index i = 0; i < n; ++i) {
        const RowVectorXd diff = b.actions.row(i) - mu.row(i);
        const double logp = nn::gaussian::log_prob(mu.row(i), ls, b.actions.row(i));
        const double log_ratio = logp - b.old_log_prob(i);
        const double ratio = std::exp(log_ratio);
        const double ratio_c = std::clamp(ratio, 1.0 - c.clip, 1.0 + c.clip);
        const double unclipped_obj = ratio * adv(i);
        const double clipped_obj = ratio_c * adv(i);
        t.stats.policy -= std::min(unclipped_obj, clipped_obj) * inv_n;
        t.stats.approx_kl -= log_ratio * inv_n;
        if (std::abs(ratio - 1.0) > c.clip)
            clipped += 1.0;
        // d(-min)/dlogp; zero when the clipped branch is strictly smaller.
        const double d_logp = unclipped_obj <= clipped_obj ? -unclipped_obj * inv_n : 0.0;
        if (d_logp != 0.0) {
            t.d_mean.row(i) += d_logp * diff.cwiseProduct(inv_var);
            t.d_logstd += d_logp * (diff.array().square() * inv_var.array() - 1.0).matrix();
        }
    }
    t.stats.clip_frac = clipped * inv_n;

    t.stats.entropy = nn::gaussian::entropy(ls);
    t.d_logstd.array() -= c.ent_coef;

    if (ref && c.kl_coef != 0.0) {
        const auto ref_cache = model.actor().forward(*ref, b.obs, replay(b.xi));
        const RowVectorXd ls_r = model.log_std(*ref);
        const RowVectorXd inv_var_r = (-2.0 * ls_r.array()).exp();
        const RowVectorXd var_ratio = (2.0 * (ls - ls_r).array()).exp();
        for (Index i = 0; i < n; ++i) {
            const RowVectorXd dm = mu.row(i) - ref_cache.output.row(i);
            t.stats.kl_ref += nn::gaussian::kl(mu.row(i), ls, ref_cache.output.row(i), ls_r) * inv_n;
            t.d_mean.row(i) += c.kl_coef * inv_n * dm.cwiseProduct(inv_var_r);
            t.d_logstd += c.kl_coef * inv_n * (var_ratio.array() - 1.0).matrix();
        }
    }

    t.stats.total = t.stats.policy - c.ent_coef * t.stats.entropy + c.kl_coef * t.stats.kl_ref;
    return t;
}

void push_logstd_grad(const nn::PolicyModel& model, const RowVectorXd& d, nn::ParamStore& grad)
{
    grad.mat(model.logstd_index()).row(0) += d;
}

} // namespace

LossStats ppo_loss(const nn::PolicyModel& model, const nn::ParamStore& actor_params, const ActorBatch& batch,
                   double clip, nn::ParamStore* grad)
{
    LossCoefs c;
    c.clip = clip;
    c.vf_coef = 0.0;
    nn::ForwardCache cache;
    auto t = actor_terms(model, actor_params, batch, c, nullptr, cache);
    if (grad) {
        model.actor().backward(cache, actor_params, t.d_mean, *grad);
        push_logstd_grad(model, t.d_logstd, *grad);
    }
    return t.stats;
}

LossStats total_loss(const nn::PolicyModel& model, const nn::ParamStore& actor_params,
                     const nn::ParamStore& critic_params, const ActorBatch& ab, const CriticBatch& cb,
                     const LossCoefs& coefs, const nn::ParamStore* ref_actor, Gradients* grads)
{
    nn::ForwardCache cache;
    auto t = actor_terms(model, actor_params, ab, coefs, ref_actor, cache);
    if (grads) {
        model.actor().backward(cache, actor_params, t.d_mean, grads->actor);
        push_logstd_grad(model, t.d_logstd, grads->actor);
    }

    const Index m = cb.states.rows();
    if (m == 0 || cb.returns.size() != m)
        throw std::invalid_argument("loss: critic batch is empty or inconsistent");
    auto vcache = model.critic().forward(critic_params, cb.states, replay(cb.xi));
    const VectorXd err = vcache.output.col(0) - cb.returns;
    t.stats.value = err.squaredNorm() / static_cast<double>(m);
    t.stats.total += coefs.vf_coef * t.stats.value;
    if (grads) {
        const MatrixXd d_v = (2.0 * coefs.vf_coef / static_cast<double>(m)) * err;
        model.critic().backward(vcache, critic_params, d_v, grads->critic);
    }
    return t.stats;
}

} // namespace uavmoe::train
