#include "uavmoe/moe_net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/QR>

namespace uavmoe::nn {

using Eigen::Index;
using Eigen::MatrixXd;

void NetConfig::validate() const
{
    if (in_dim <= 0 || out_dim <= 0 || hidden <= 0)
        throw std::invalid_argument("NetConfig: dimensions must be positive");
    if (kind != ArchKind::mlp) {
        if (n_experts < 1)
            throw std::invalid_argument("NetConfig: n_experts must be >= 1");
        if (top_k < 1 || top_k > n_experts)
            throw std::invalid_argument("NetConfig: top_k must lie in [1, n_experts]");
    }
}

int NetConfig::active_k() const
{
    switch (kind) {
    case ArchKind::mlp: return 1;
    case ArchKind::dense_moe: return n_experts;
    case ArchKind::sparse_moe: return top_k;
    }
    return 1;
}

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

static double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

MatrixXd softmax_rows(const MatrixXd& z)
{
    MatrixXd out(z.rows(), z.cols());
    for (Index r = 0; r < z.rows(); ++r) {
        const double m = z.row(r).maxCoeff();
        const Eigen::RowVectorXd e = (z.row(r).array() - m).exp().matrix();
        out.row(r) = e / e.sum();
    }
    return out;
}

std::vector<int> top_k_indices(const Eigen::RowVectorXd& v, int k)
{
    std::vector<int> idx(static_cast<std::size_t>(v.size()));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return v(a) > v(b); });
    idx.resize(static_cast<std::size_t>(k));
    return idx;
}

void orthogonal_init(MatMap m, double gain, RandomStream& rng)
{
    const Index rows = m.rows();
    const Index cols = m.cols();
    const Index big = std::max(rows, cols);
    const Index small = std::min(rows, cols);
    MatrixXd a(big, small);
    for (Index j = 0; j < small; ++j)
        for (Index i = 0; i < big; ++i)
            a(i, j) = rng.normal();
    Eigen::HouseholderQR<MatrixXd> qr(a);
    MatrixXd q = qr.householderQ() * MatrixXd::Identity(big, small);
    // Sign fix so the distribution is uniform over orthogonal matrices.
    const MatrixXd r = qr.matrixQR();
    for (Index j = 0; j < small; ++j)
        if (r(j, j) < 0.0)
            q.col(j) = -q.col(j);
    if (rows >= cols)
        m = gain * q;
    else
        m = gain * q.transpose();
}

MoeNet::MoeNet(NetConfig cfg, ParamStore& store, const std::string& prefix) : cfg_(cfg)
{
    cfg_.validate();
    const auto tag = [&](ParamGroup g) { return cfg_.critic ? ParamGroup::critic : g; };
    const Index in = cfg_.in_dim;
    const Index h = cfg_.hidden;
    const Index out = cfg_.out_dim;

    if (has_router()) {
        const Index e = cfg_.n_experts;
        router_w_ = store.add(prefix + "router.w", e, in, tag(ParamGroup::router));
        router_b_ = store.add(prefix + "router.b", e, 1, tag(ParamGroup::router));
        if (cfg_.gate_noise) {
            noise_w_ = store.add(prefix + "gate_noise.w", e, in, tag(ParamGroup::router));
            noise_b_ = store.add(prefix + "gate_noise.b", e, 1, tag(ParamGroup::router));
        }
    }
    const bool per_expert_out = has_router() && cfg_.fusion == Fusion::means;
    for (int j = 0; j < n_experts(); ++j) {
        const std::string base = prefix + (has_router() ? "expert" + std::to_string(j) + "." : std::string("mlp."));
        ExpertIdx ei;
        ei.w1 = store.add(base + "l1.w", h, in, tag(ParamGroup::expert), j);
        ei.b1 = store.add(base + "l1.b", h, 1, tag(ParamGroup::expert), j);
        ei.w2 = store.add(base + "l2.w", h, h, tag(ParamGroup::expert), j);
        ei.b2 = store.add(base + "l2.b", h, 1, tag(ParamGroup::expert), j);
        if (per_expert_out) {
            ei.w3 = store.add(base + "out.w", out, h, tag(ParamGroup::head), j);
            ei.b3 = store.add(base + "out.b", out, 1, tag(ParamGroup::head), j);
        }
        experts_.push_back(ei);
    }
    if (!per_expert_out) {
        head_w_ = store.add(prefix + "head.w", out, h, tag(ParamGroup::head));
        head_b_ = store.add(prefix + "head.b", out, 1, tag(ParamGroup::head));
    }
}

std::size_t MoeNet::count_params(const NetConfig& cfg)
{
    cfg.validate();
    const auto in = static_cast<std::size_t>(cfg.in_dim);
    const auto h = static_cast<std::size_t>(cfg.hidden);
    const auto out = static_cast<std::size_t>(cfg.out_dim);
    const std::size_t body = in * h + h + h * h + h;
    const std::size_t head = h * out + out;
    if (cfg.kind == ArchKind::mlp)
        return body + head;
    const auto e = static_cast<std::size_t>(cfg.n_experts);
    const std::size_t router = e * in + e;
    std::size_t n = router + (cfg.gate_noise ? router : 0);
    n += cfg.fusion == Fusion::means ? e * (body + head) : e * body + head;
    return n;
}

void MoeNet::set_tau(double tau)
{
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw std::invalid_argument("router temperature must be positive and finite");
    tau_ = tau;
}

void MoeNet::init(ParamStore& p, RandomStream& rng, double head_gain) const
{
    const double relu_gain = std::sqrt(2.0);
    if (has_router()) {
        orthogonal_init(p.mat(router_w_), 0.01, rng);
        p.mat(router_b_).setZero();
        if (cfg_.gate_noise) {
            orthogonal_init(p.mat(noise_w_), 0.01, rng);
            p.mat(noise_b_).setZero();
        }
    }
    for (const auto& ei : experts_) {
        orthogonal_init(p.mat(ei.w1), relu_gain, rng);
        p.mat(ei.b1).setZero();
        orthogonal_init(p.mat(ei.w2), relu_gain, rng);
        p.mat(ei.b2).setZero();
        if (cfg_.fusion == Fusion::means && has_router()) {
            orthogonal_init(p.mat(ei.w3), head_gain, rng);
            p.mat(ei.b3).setZero();
        }
    }
    if (!(cfg_.fusion == Fusion::means && has_router())) {
        orthogonal_init(p.mat(head_w_), head_gain, rng);
        p.mat(head_b_).setZero();
    }
}

static MatrixXd affine(const MatrixXd& x, ConstMatMap w, ConstMatMap b)
{
    MatrixXd a = x * w.transpose();
    a.rowwise() += b.col(0).transpose();
    return a;
}

void MoeNet::run_expert(const ParamStore& p, int j, ExpertCache& ec) const
{
    const auto& ei = experts_[static_cast<std::size_t>(j)];
    ec.a1 = affine(ec.x, p.mat(ei.w1), p.mat(ei.b1));
    ec.h1 = ec.a1.cwiseMax(0.0);
    ec.a2 = affine(ec.h1, p.mat(ei.w2), p.mat(ei.b2));
    ec.h2 = ec.a2.cwiseMax(0.0);
    const auto n = static_cast<std::size_t>(ec.x.rows());
    macs_ += n * static_cast<std::size_t>(cfg_.in_dim * cfg_.hidden + cfg_.hidden * cfg_.hidden);
    if (has_router() && cfg_.fusion == Fusion::means) {
        ec.out = affine(ec.h2, p.mat(ei.w3), p.mat(ei.b3));
        macs_ += n * static_cast<std::size_t>(cfg_.hidden * cfg_.out_dim);
    }
}

ForwardCache MoeNet::forward(const ParamStore& p, const MatrixXd& x, const ForwardOptions& opts) const
{
    if (x.cols() != cfg_.in_dim)
        throw std::invalid_argument("MoeNet::forward: input has " + std::to_string(x.cols()) + " columns, expected " +
                                    std::to_string(cfg_.in_dim));
    const Index rows = x.rows();
    const int e = n_experts();
    const int k = cfg_.active_k();
    const bool means = has_router() && cfg_.fusion == Fusion::means;

    ForwardCache c;
    c.x = x;
    c.tau = tau_;
    c.experts.resize(static_cast<std::size_t>(e));
    c.mix = MatrixXd::Zero(rows, e);
    c.selected.resize(rows, k);

    if (has_router()) {
        c.logits = affine(x, p.mat(router_w_), p.mat(router_b_));
        macs_ += static_cast<std::size_t>(rows * e * cfg_.in_dim);
        c.noisy = opts.training && cfg_.gate_noise;
        if (c.noisy) {
            c.noise_pre = affine(x, p.mat(noise_w_), p.mat(noise_b_));
            macs_ += static_cast<std::size_t>(rows * e * cfg_.in_dim);
            if (opts.xi) {
                if (opts.xi->rows() != rows || opts.xi->cols() != e)
                    throw std::invalid_argument("MoeNet::forward: replayed gate noise has the wrong shape");
                c.xi = *opts.xi;
            } else {
                if (!opts.rng)
                    throw std::invalid_argument("MoeNet::forward: gate noise needs a random stream");
                c.xi.resize(rows, e);
                for (Index r = 0; r < rows; ++r)
                    for (Index j = 0; j < e; ++j)
                        c.xi(r, j) = opts.rng->normal();
            }
            for (Index r = 0; r < rows; ++r)
                for (Index j = 0; j < e; ++j)
                    c.logits(r, j) += softplus(c.noise_pre(r, j)) * c.xi(r, j);
        }
        c.probs = softmax_rows(c.logits / tau_);

        if (opts.force_expert && k != 1)
            throw std::invalid_argument("MoeNet::forward: forced routing requires top-1 selection");
        if (opts.force_expert && static_cast<Index>(opts.force_expert->size()) != rows)
            throw std::invalid_argument("MoeNet::forward: forced routing needs one index per row");
        for (Index r = 0; r < rows; ++r) {
            std::vector<int> sel;
            if (opts.force_expert) {
                const int f = (*opts.force_expert)[static_cast<std::size_t>(r)];
                if (f < 0 || f >= e)
                    throw std::out_of_range("MoeNet::forward: forced expert index out of range");
                sel = {f};
            } else {
                sel = top_k_indices(c.probs.row(r), k);
            }
            double total = 0.0;
            for (int j : sel)
                total += c.probs(r, j);
            for (int i = 0; i < k; ++i) {
                const int j = sel[static_cast<std::size_t>(i)];
                c.selected(r, i) = j;
                c.mix(r, j) = c.probs(r, j) / total;
                c.experts[static_cast<std::size_t>(j)].rows.push_back(r);
            }
        }
    } else {
        c.mix.setOnes();
        c.selected.setZero();
        c.experts[0].rows.resize(static_cast<std::size_t>(rows));
        std::iota(c.experts[0].rows.begin(), c.experts[0].rows.end(), Index{0});
    }

    if (means)
        c.output = MatrixXd::Zero(rows, cfg_.out_dim);
    else
        c.trunk = MatrixXd::Zero(rows, cfg_.hidden);

    for (int j = 0; j < e; ++j) {
        auto& ec = c.experts[static_cast<std::size_t>(j)];
        if (ec.rows.empty())
            continue;
        ec.x.resize(static_cast<Index>(ec.rows.size()), x.cols());
        for (std::size_t i = 0; i < ec.rows.size(); ++i)
            ec.x.row(static_cast<Index>(i)) = x.row(ec.rows[i]);
        run_expert(p, j, ec);
        for (std::size_t i = 0; i < ec.rows.size(); ++i) {
            const Index r = ec.rows[i];
            const double w = c.mix(r, j);
            if (means)
                c.output.row(r) += w * ec.out.row(static_cast<Index>(i));
            else
                c.trunk.row(r) += w * ec.h2.row(static_cast<Index>(i));
        }
    }

    if (!means) {
        c.output = affine(c.trunk, p.mat(head_w_), p.mat(head_b_));
        macs_ += static_cast<std::size_t>(rows * cfg_.hidden * cfg_.out_dim);
    }
    return c;
}

void MoeNet::backward(ForwardCache& c, const ParamStore& p, const MatrixXd& d_out, ParamStore& grad) const
{
    if (c.consumed)
        throw std::logic_error("MoeNet::backward: forward cache already consumed");
    c.consumed = true;
    if (d_out.rows() != c.output.rows() || d_out.cols() != c.output.cols())
        throw std::invalid_argument("MoeNet::backward: output gradient has the wrong shape");

    const Index rows = c.x.rows();
    const int e = n_experts();
    const bool means = has_router() && cfg_.fusion == Fusion::means;

    MatrixXd d_trunk;
    if (!means) {
        grad.mat(head_w_) += d_out.transpose() * c.trunk;
        grad.mat(head_b_) += d_out.colwise().sum().transpose();
        d_trunk = d_out * p.mat(head_w_);
    }

    MatrixXd d_mix = MatrixXd::Zero(rows, e);
    for (int j = 0; j < e; ++j) {
        auto& ec = c.experts[static_cast<std::size_t>(j)];
        if (ec.rows.empty())
            continue;
        const auto& ei = experts_[static_cast<std::size_t>(j)];
        const Index n = static_cast<Index>(ec.rows.size());
        MatrixXd d_h2(n, cfg_.hidden);
        if (means) {
            MatrixXd d_o(n, cfg_.out_dim);
            for (Index i = 0; i < n; ++i) {
                const Index r = ec.rows[static_cast<std::size_t>(i)];
                d_o.row(i) = c.mix(r, j) * d_out.row(r);
                d_mix(r, j) = d_out.row(r).dot(ec.out.row(i));
            }
            grad.mat(ei.w3) += d_o.transpose() * ec.h2;
            grad.mat(ei.b3) += d_o.colwise().sum().transpose();
            d_h2 = d_o * p.mat(ei.w3);
        } else {
            for (Index i = 0; i < n; ++i) {
                const Index r = ec.rows[static_cast<std::size_t>(i)];
                d_h2.row(i) = c.mix(r, j) * d_trunk.row(r);
                d_mix(r, j) = d_trunk.row(r).dot(ec.h2.row(i));
            }
        }
        const MatrixXd d_a2 = d_h2.cwiseProduct((ec.a2.array() > 0.0).cast<double>().matrix());
        grad.mat(ei.w2) += d_a2.transpose() * ec.h1;
        grad.mat(ei.b2) += d_a2.colwise().sum().transpose();
        const MatrixXd d_h1 = d_a2 * p.mat(ei.w2);
        const MatrixXd d_a1 = d_h1.cwiseProduct((ec.a1.array() > 0.0).cast<double>().matrix());
        grad.mat(ei.w1) += d_a1.transpose() * ec.x;
        grad.mat(ei.b1) += d_a1.colwise().sum().transpose();
    }

    if (!has_router())
        return;

    // Renormalised softmax over the selected set: dz_j = w_j (dL/dw_j - sum_i w_i dL/dw_i) / tau.
    MatrixXd d_z = MatrixXd::Zero(rows, e);
    for (Index r = 0; r < rows; ++r) {
        double s = 0.0;
        for (Index i = 0; i < c.selected.cols(); ++i) {
            const int j = c.selected(r, i);
            s += c.mix(r, j) * d_mix(r, j);
        }
        for (Index i = 0; i < c.selected.cols(); ++i) {
            const int j = c.selected(r, i);
            d_z(r, j) = c.mix(r, j) * (d_mix(r, j) - s) / c.tau;
        }
    }
    grad.mat(router_w_) += d_z.transpose() * c.x;
    grad.mat(router_b_) += d_z.colwise().sum().transpose();
    if (c.noisy) {
        MatrixXd d_s(rows, e);
        for (Index r = 0; r < rows; ++r)
            for (Index j = 0; j < e; ++j)
                d_s(r, j) = d_z(r, j) * c.xi(r, j) * sigmoid(c.noise_pre(r, j));
        grad.mat(noise_w_) += d_s.transpose() * c.x;
        grad.mat(noise_b_) += d_s.colwise().sum().transpose();
    }
}

ExpertActivations MoeNet::expert_activations(const ParamStore& p, const MatrixXd& x) const
{
    ExpertActivations out;
    for (const auto& ei : experts_) {
        MatrixXd a1 = affine(x, p.mat(ei.w1), p.mat(ei.b1));
        MatrixXd a2 = affine(a1.cwiseMax(0.0), p.mat(ei.w2), p.mat(ei.b2));
        out.pre1.push_back(std::move(a1));
        out.pre2.push_back(std::move(a2));
    }
    return out;
}

} // namespace uavmoe::nn
