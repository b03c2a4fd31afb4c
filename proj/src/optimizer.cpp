#include "uavmoe/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uavmoe::train {

using nn::ParamGroup;

void AdamState::reset()
{
    std::fill(m.begin(), m.end(), 0.0);
    std::fill(v.begin(), v.end(), 0.0);
    step = 0;
}

bool AdamState::is_zero() const
{
    return step == 0 && std::all_of(m.begin(), m.end(), [](double x) { return x == 0.0; }) &&
           std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

GroupLr GroupLr::uniform(double value)
{
    GroupLr g;
    g.lr.fill(value);
    return g;
}

double clip_grad_norm(nn::ParamStore& grad, double max_norm)
{
    const double norm = std::sqrt(grad.squared_norm());
    if (max_norm > 0.0 && norm > max_norm) {
        const double s = max_norm / (norm + 1e-12);
        for (double& g : grad.values())
            g *= s;
    }
    return norm;
}

void adam_step(nn::ParamStore& params, nn::ParamStore& grad, AdamState& state, const GroupLr& lr,
               const AdamHyper& h)
{
    if (!params.same_layout(grad))
        throw std::invalid_argument("adam_step: gradient layout does not match parameters");
    if (state.m.size() != params.size())
        throw std::invalid_argument("adam_step: optimizer state does not match parameters");

    clip_grad_norm(grad, h.max_grad_norm);
    ++state.step;
    const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.step));

    double* theta = params.data();
    const double* g = grad.data();
    for (const auto& info : params.infos()) {
        const double rate = lr[info.group];
        if (rate == 0.0)
            continue;
        const double decay = info.group == ParamGroup::logstd ? 0.0 : h.weight_decay;
        for (std::size_t i = info.offset; i < info.offset + info.size(); ++i) {
            state.m[i] = h.beta1 * state.m[i] + (1.0 - h.beta1) * g[i];
            state.v[i] = h.beta2 * state.v[i] + (1.0 - h.beta2) * g[i] * g[i];
            const double m_hat = state.m[i] / bc1;
            const double v_hat = state.v[i] / bc2;
            theta[i] -= rate * decay * theta[i];
            theta[i] -= rate * m_hat / (std::sqrt(v_hat) + h.eps);
        }
    }
}

double inject_expert_noise(nn::ParamStore& params, double gamma0, RandomStream& rng, const std::vector<bool>& mask)
{
    if (gamma0 == 0.0)
        return 0.0;
    double energy = 0.0;
    double* theta = params.data();
    for (const auto& info : params.infos()) {
        if (info.group != ParamGroup::expert)
            continue;
        if (!mask.empty()) {
            const auto j = static_cast<std::size_t>(info.expert);
            if (j >= mask.size() || !mask[j])
                continue;
        }
        for (std::size_t i = info.offset; i < info.offset + info.size(); ++i) {
            const double d = gamma0 * rng.normal();
            theta[i] += d;
            energy += d * d;
        }
    }
    return energy;
}

} // namespace uavmoe::train
