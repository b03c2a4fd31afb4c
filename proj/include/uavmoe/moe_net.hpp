#pragma once

// Feed-forward networks with exact reverse-mode gradients: a plain two-layer
// MLP, a dense softmax mixture of experts and a sparse top-k mixture with
// optional softplus-scaled gate noise.

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "uavmoe/params.hpp"
#include "uavmoe/rng.hpp"

namespace uavmoe::nn {

enum class ArchKind { mlp, dense_moe, sparse_moe };
enum class Fusion { trunk, means };

struct NetConfig
{
    Eigen::Index in_dim = 0;
    Eigen::Index out_dim = 2;
    ArchKind kind = ArchKind::sparse_moe;
    int n_experts = 3;
    int top_k = 1;
    Eigen::Index hidden = 32;
    bool gate_noise = false;
    Fusion fusion = Fusion::trunk;
    bool critic = false; ///< tag every tensor with the critic group

    void validate() const;
    /// Experts actually executed per row.
    int active_k() const;
};

struct ForwardOptions
{
    bool training = false;
    /// Replayed gate noise (rows x experts). Sampled from `rng` when null.
    const Eigen::MatrixXd* xi = nullptr;
    RandomStream* rng = nullptr;
    /// Routing override for top-1 networks, one expert index per row.
    const std::vector<int>* force_expert = nullptr;
};

struct ExpertCache
{
    std::vector<Eigen::Index> rows;
    Eigen::MatrixXd x, a1, h1, a2, h2, out;
};

struct ForwardCache
{
    Eigen::MatrixXd x;
    Eigen::MatrixXd noise_pre; ///< W_n x + b_n, empty without gate noise
    Eigen::MatrixXd xi;        ///< gate noise used in this pass, empty without gate noise
    Eigen::MatrixXd logits;    ///< router logits after noise, before temperature
    Eigen::MatrixXd probs;     ///< softmax(logits / tau)
    Eigen::MatrixXd mix;       ///< renormalised weights, zero off the selection
    Eigen::MatrixXi selected;  ///< rows x k, descending probability
    std::vector<ExpertCache> experts;
    Eigen::MatrixXd trunk;
    Eigen::MatrixXd output;
    double tau = 1.0;
    bool noisy = false;
    bool consumed = false;
};

struct ExpertActivations
{
    std::vector<Eigen::MatrixXd> pre1; ///< per expert, first hidden layer pre-activations
    std::vector<Eigen::MatrixXd> pre2; ///< per expert, second hidden layer pre-activations
};

class MoeNet
{
public:
    MoeNet() = default;
    /// Registers this network's tensors in `store` under `prefix`.
    MoeNet(NetConfig cfg, ParamStore& store, const std::string& prefix);

    const NetConfig& config() const { return cfg_; }
    int n_experts() const { return cfg_.kind == ArchKind::mlp ? 1 : cfg_.n_experts; }
    bool has_router() const { return cfg_.kind != ArchKind::mlp; }

    double tau() const { return tau_; }
    void set_tau(double tau);

    void init(ParamStore& p, RandomStream& rng, double head_gain) const;

    ForwardCache forward(const ParamStore& p, const Eigen::MatrixXd& x, const ForwardOptions& opts) const;
    /// Accumulates dL/dtheta into `grad`. A cache can be consumed once.
    void backward(ForwardCache& cache, const ParamStore& p, const Eigen::MatrixXd& d_out, ParamStore& grad) const;

    /// Runs every expert on every row and returns hidden pre-activations.
    ExpertActivations expert_activations(const ParamStore& p, const Eigen::MatrixXd& x) const;

    std::size_t macs() const { return macs_; }
    void reset_macs() const { macs_ = 0; }

    static std::size_t count_params(const NetConfig& cfg);

private:
    struct ExpertIdx
    {
        std::size_t w1, b1, w2, b2, w3 = 0, b3 = 0;
    };

    void run_expert(const ParamStore& p, int j, ExpertCache& ec) const;

    NetConfig cfg_;
    double tau_ = 1.0;
    std::size_t router_w_ = 0, router_b_ = 0, noise_w_ = 0, noise_b_ = 0;
    std::size_t head_w_ = 0, head_b_ = 0;
    std::vector<ExpertIdx> experts_;
    mutable std::size_t macs_ = 0;
};

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& z);
/// Indices of the k largest entries of `v`, largest first, lower index on ties.
std::vector<int> top_k_indices(const Eigen::RowVectorXd& v, int k);
double softplus(double x);

/// Orthogonal-style initialisation of a rows x cols matrix scaled by `gain`.
void orthogonal_init(MatMap m, double gain, RandomStream& rng);

} // namespace uavmoe::nn
