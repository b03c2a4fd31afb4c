#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "support.hpp"
#include "uavmoe/checkpoint.hpp"
#include "uavmoe/moe_net.hpp"
#include "uavmoe/policy.hpp"

using namespace uavmoe;
using namespace uavmoe::nn;
using Eigen::MatrixXd;

namespace {

MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed)
{
    RandomStream rng(seed, "test.matrix");
    MatrixXd m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i)
            m(i, j) = rng.normal();
    return m;
}

// Hand count of actor scalars: two hidden layers per expert plus router,
// optional noise layer, shared head and the log-std vector.
std::size_t oracle_count(std::size_t in, std::size_t e, bool router, bool noise)
{
    const std::size_t h = 32, out = 2;
    const std::size_t expert = (in + 1) * h + (h + 1) * h;
    std::size_t n = e * expert + (h + 1) * out + out;
    if (router)
        n += (in + 1) * e;
    if (noise)
        n += (in + 1) * e;
    return n;
}

struct NetFixture
{
    ParamStore p;
    MoeNet net;
    NetFixture(NetConfig cfg, std::uint64_t seed) : net(cfg, p, "")
    {
        testing::randomize(p, seed);
    }
};

testing::GradCheck net_gradcheck(NetConfig cfg, std::uint64_t seed, double tau = 1.0)
{
    NetFixture f(cfg, seed);
    f.net.set_tau(tau);
    const MatrixXd x = random_matrix(6, cfg.in_dim, seed + 1);
    const MatrixXd r = random_matrix(6, cfg.out_dim, seed + 2);
    MatrixXd xi = random_matrix(6, cfg.kind == ArchKind::mlp ? 1 : cfg.n_experts, seed + 3);
    ForwardOptions opts;
    opts.training = true;
    opts.xi = &xi;

    auto cache = f.net.forward(f.p, x, opts);
    ParamStore g = f.p.zeros_like();
    f.net.backward(cache, f.p, r, g);
    return testing::check_gradient(f.p, g, [&] { return f.net.forward(f.p, x, opts).output.cwiseProduct(r).sum(); });
}

} // namespace

TEST_SUITE("nnet")
{
    TEST_CASE("parameter counts at the full observation size")
    {
        ModelConfig m;
        m.obs_dim = 177;
        const auto mlp = count_params(m, Algo::mlp);
        const auto moe = count_params(m, Algo::moe);
        const auto smoe = count_params(m, Algo::smoe);
        const auto pe = count_params(m, Algo::pemamoe);
        CHECK(mlp == 6820);
        CHECK(moe == 20858);
        CHECK(smoe == 21392);
        CHECK(pe == smoe);
        const double ratio = static_cast<double>(moe) / static_cast<double>(mlp);
        CHECK(ratio >= 2.8);
        CHECK(ratio <= 3.4);
    }

    TEST_CASE("parameter counts match a hand count and the registered stores")
    {
        for (std::size_t in : {5, 24, 92, 177})
            for (int e : {1, 3, 6}) {
                ModelConfig m;
                m.obs_dim = static_cast<Eigen::Index>(in);
                m.state_dim = m.obs_dim;
                m.n_experts = e;
                CHECK(count_params(m, Algo::mlp) == oracle_count(in, 1, false, false));
                CHECK(count_params(m, Algo::moe) == oracle_count(in, e, true, false));
                CHECK(count_params(m, Algo::smoe) == oracle_count(in, e, true, true));
                for (Algo a : {Algo::mlp, Algo::moe, Algo::smoe, Algo::pemamoe}) {
                    PolicyModel model(m, a);
                    CHECK(model.actor_params().size() == count_params(m, a));
                    CHECK(model.critic_params().group_size(ParamGroup::critic) == model.critic_params().size());
                }
            }
    }

    TEST_CASE("doubling the experts grows the count by the expert and router blocks")
    {
        ModelConfig a;
        a.obs_dim = 177;
        ModelConfig b = a;
        b.n_experts = 6;
        const std::size_t expert = 178 * 32 + 33 * 32;
        CHECK(count_params(b, Algo::moe) - count_params(a, Algo::moe) == 3 * expert + 3 * 178);
        CHECK(count_params(b, Algo::smoe) - count_params(a, Algo::smoe) == 3 * expert + 6 * 178);
    }

    TEST_CASE("softmax rows are distributions and shift invariant")
    {
        const MatrixXd z = 20.0 * random_matrix(10, 4, 1);
        const MatrixXd p = softmax_rows(z);
        for (Eigen::Index r = 0; r < p.rows(); ++r) {
            CHECK(p.row(r).sum() == doctest::Approx(1.0).epsilon(1e-14));
            CHECK(p.row(r).minCoeff() >= 0.0);
        }
        const MatrixXd q = softmax_rows((z.array() + 1000.0).matrix());
        CHECK((p - q).cwiseAbs().maxCoeff() < 1e-12);
    }

    TEST_CASE("top-k prefers the lower index on ties")
    {
        Eigen::RowVectorXd v(4);
        v << 0.2, 0.4, 0.4, 0.0;
        CHECK(top_k_indices(v, 1) == std::vector<int>{1});
        CHECK(top_k_indices(v, 3) == std::vector<int>{1, 2, 0});
    }

    TEST_CASE("top-1 mix weights are one-hot")
    {
        NetConfig cfg{8, 2, ArchKind::sparse_moe, 4, 1, 16, true};
        NetFixture f(cfg, 3);
        RandomStream rng(2, "gate");
        ForwardOptions o;
        o.training = true;
        o.rng = &rng;
        const auto c = f.net.forward(f.p, random_matrix(50, 8, 4), o);
        for (Eigen::Index r = 0; r < 50; ++r) {
            CHECK(c.mix.row(r).sum() == 1.0);
            CHECK((c.mix.row(r).array() == 1.0).count() == 1);
            CHECK(c.mix(r, c.selected(r, 0)) == 1.0);
        }
    }

    TEST_CASE("a huge temperature gives uniform gate probabilities")
    {
        NetConfig cfg{8, 2, ArchKind::dense_moe, 3, 3, 16};
        NetFixture f(cfg, 5);
        f.net.set_tau(1e6);
        const auto c = f.net.forward(f.p, random_matrix(20, 8, 6), {});
        CHECK((c.probs.array() - 1.0 / 3.0).abs().maxCoeff() < 1e-6);
    }

    TEST_CASE("selecting every expert gives mix equal to the probabilities")
    {
        NetConfig cfg{8, 2, ArchKind::sparse_moe, 3, 3, 16};
        NetFixture f(cfg, 7);
        const auto c = f.net.forward(f.p, random_matrix(20, 8, 8), {});
        CHECK((c.mix - c.probs).cwiseAbs().maxCoeff() < 1e-15);
    }

    TEST_CASE("gate noise is only applied in training mode")
    {
        NetConfig cfg{8, 2, ArchKind::sparse_moe, 3, 1, 16, true};
        NetFixture f(cfg, 9);
        const MatrixXd x = random_matrix(5, 8, 10);
        const auto eval = f.net.forward(f.p, x, {});
        CHECK_FALSE(eval.noisy);
        CHECK(eval.xi.size() == 0);
        ForwardOptions o;
        o.training = true;
        CHECK_THROWS_AS(f.net.forward(f.p, x, o), std::invalid_argument);
        const MatrixXd xi = MatrixXd::Zero(5, 3);
        o.xi = &xi;
        const auto replay = f.net.forward(f.p, x, o);
        CHECK(replay.noisy);
        CHECK(replay.output == eval.output);
    }

    TEST_CASE("analytic gradients match finite differences")
    {
        struct Case
        {
            const char* name;
            NetConfig cfg;
            double tau;
        };
        const Case cases[] = {
            {"mlp", {7, 3, ArchKind::mlp, 1, 1, 9}, 1.0},
            {"dense", {7, 3, ArchKind::dense_moe, 3, 3, 9}, 1.0},
            {"dense tau", {7, 3, ArchKind::dense_moe, 3, 3, 9}, 1.7},
            {"dense means", {7, 3, ArchKind::dense_moe, 3, 3, 9, false, Fusion::means}, 1.0},
            {"sparse top1 noisy", {7, 3, ArchKind::sparse_moe, 3, 1, 9, true}, 0.8},
            {"sparse top2 noisy", {7, 3, ArchKind::sparse_moe, 4, 2, 9, true}, 1.3},
            {"sparse top2 means", {7, 3, ArchKind::sparse_moe, 4, 2, 9, true, Fusion::means}, 1.0},
            {"critic", {7, 1, ArchKind::sparse_moe, 3, 2, 9, true, Fusion::trunk, true}, 1.0},
        };
        for (const auto& c : cases) {
            CAPTURE(c.name);
            const auto r = net_gradcheck(c.cfg, 40, c.tau);
            CAPTURE(r.worst);
            CHECK(r.checked > 0);
            CHECK(r.max_rel < 1e-4);
        }
    }

    TEST_CASE("unselected experts receive exactly zero gradient")
    {
        NetConfig cfg{6, 2, ArchKind::sparse_moe, 4, 1, 8, true};
        NetFixture f(cfg, 11);
        const MatrixXd x = random_matrix(3, 6, 12);
        const std::vector<int> force{2, 2, 0};
        ForwardOptions o;
        o.force_expert = &force;
        auto c = f.net.forward(f.p, x, o);
        ParamStore g = f.p.zeros_like();
        f.net.backward(c, f.p, random_matrix(3, 2, 13), g);
        for (const auto& info : g.infos()) {
            if (info.expert != 1 && info.expert != 3)
                continue;
            for (std::size_t k = 0; k < info.size(); ++k)
                REQUIRE(g.values()[info.offset + k] == 0.0);
        }
        double used = 0.0;
        for (const auto& info : g.infos())
            if (info.expert == 2)
                used += g.mat(g.find(info.name)).squaredNorm();
        CHECK(used > 0.0);
    }

    TEST_CASE("a forward cache can be consumed only once")
    {
        NetConfig cfg{6, 2, ArchKind::dense_moe, 2, 2, 8};
        NetFixture f(cfg, 14);
        auto c = f.net.forward(f.p, random_matrix(3, 6, 15), {});
        ParamStore g = f.p.zeros_like();
        const MatrixXd d = MatrixXd::Ones(3, 2);
        f.net.backward(c, f.p, d, g);
        CHECK_THROWS_AS(f.net.backward(c, f.p, d, g), std::logic_error);
    }

    TEST_CASE("identical experts make routing irrelevant")
    {
        NetConfig cfg{6, 2, ArchKind::sparse_moe, 3, 1, 8};
        NetFixture f(cfg, 16);
        for (int j = 1; j < 3; ++j)
            for (const char* t : {"l1.w", "l1.b", "l2.w", "l2.b"})
                f.p.mat(f.p.find("expert" + std::to_string(j) + "." + t)) =
                    f.p.mat(f.p.find(std::string("expert0.") + t));
        const MatrixXd x = random_matrix(4, 6, 17);
        std::vector<MatrixXd> outs;
        for (int j = 0; j < 3; ++j) {
            const std::vector<int> force(4, j);
            ForwardOptions o;
            o.force_expert = &force;
            outs.push_back(f.net.forward(f.p, x, o).output);
        }
        CHECK(outs[0] == outs[1]);
        CHECK(outs[0] == outs[2]);
    }

    TEST_CASE("sparse routing executes only the selected experts")
    {
        const Eigen::Index in = 10, h = 8, out = 2, rows = 7;
        NetConfig sparse{in, out, ArchKind::sparse_moe, 4, 1, h};
        NetConfig dense{in, out, ArchKind::dense_moe, 4, 4, h};
        NetFixture fs(sparse, 18), fd(dense, 18);
        const MatrixXd x = random_matrix(rows, in, 19);
        fs.net.forward(fs.p, x, {});
        fd.net.forward(fd.p, x, {});
        const std::size_t router = rows * 4 * in, head = rows * h * out, expert = rows * (in * h + h * h);
        CHECK(fs.net.macs() == router + head + expert);
        CHECK(fd.net.macs() == router + head + 4 * expert);
        fs.net.reset_macs();
        CHECK(fs.net.macs() == 0);
    }

    TEST_CASE("snapshot and restore are exact")
    {
        ModelConfig m;
        m.obs_dim = 12;
        m.state_dim = 12;
        PolicyModel model(m, Algo::pemamoe);
        RandomStream rng(1, "init");
        model.init(rng);
        const auto snap = model.actor_params().snapshot();
        testing::randomize(model.actor_params(), 3);
        CHECK(model.actor_params().values() != snap);
        model.actor_params().restore(snap);
        CHECK(model.actor_params().values() == snap);
    }

    TEST_CASE("initialisation follows the documented gains")
    {
        ModelConfig m;
        m.obs_dim = 40;
        m.state_dim = 40;
        PolicyModel model(m, Algo::smoe);
        RandomStream rng(2, "init");
        model.init(rng);
        const auto& p = model.actor_params();
        for (double v : model.log_std())
            CHECK(v == 0.3);
        // Rows of an orthogonal wide matrix are orthonormal up to the gain.
        const MatrixXd w = p.mat(p.find("expert0.l1.w"));
        const MatrixXd gram = w * w.transpose();
        CHECK((gram - 2.0 * MatrixXd::Identity(32, 32)).cwiseAbs().maxCoeff() < 1e-10);
        const MatrixXd r = p.mat(p.find("router.w"));
        CHECK((r * r.transpose() - 1e-4 * MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-15);
        CHECK(p.mat(p.find("router.b")).isZero(0.0));
        CHECK(p.mat(p.find("head.b")).isZero(0.0));
        const auto& info = p.info(p.find("gate_noise.w"));
        CHECK(info.group == ParamGroup::router);
    }

    TEST_CASE("gaussian log-probability, entropy and KL")
    {
        Eigen::RowVectorXd zero = Eigen::RowVectorXd::Zero(2);
        CHECK(gaussian::entropy(zero) == doctest::Approx(2.8379).epsilon(1e-4));
        CHECK(gaussian::entropy(zero) == doctest::Approx(1.0 + gaussian::kLog2Pi));
        Eigen::RowVectorXd one(1), z1(1), ls(1);
        one << 1.0;
        z1 << 0.0;
        ls << 0.0;
        CHECK(gaussian::kl(z1, ls, one, ls) == doctest::Approx(0.5));
        CHECK(gaussian::kl(one, ls, one, ls) == 0.0);
        Eigen::RowVectorXd mu(2), lsd(2), a(2);
        mu << 0.3, -0.2;
        lsd << -0.5, 0.1;
        a << 0.1, 0.4;
        double ref = 0.0;
        for (int i = 0; i < 2; ++i) {
            const double s = std::exp(lsd(i));
            ref += -0.5 * std::pow((a(i) - mu(i)) / s, 2) - std::log(s) - 0.5 * std::log(2.0 * M_PI);
        }
        CHECK(gaussian::log_prob(mu, lsd, a) == doctest::Approx(ref).epsilon(1e-14));
    }

    TEST_CASE("checkpoints round-trip bitwise and reject mismatches")
    {
        ModelConfig m;
        m.obs_dim = 16;
        m.state_dim = 16;
        PolicyModel a(m, Algo::pemamoe), b(m, Algo::pemamoe);
        RandomStream ra(1, "a"), rb(2, "b");
        a.init(ra);
        b.init(rb);
        const auto dir = std::filesystem::temp_directory_path() / "uavmoe_ckpt_test";
        std::filesystem::create_directories(dir);
        const auto path = dir / "model.bin";
        save_checkpoint(path, a, "{\"iter\":7}");
        CHECK(read_checkpoint_metadata(path) == "{\"iter\":7}");
        CHECK(load_checkpoint(path, b) == "{\"iter\":7}");
        CHECK(b.actor_params().values() == a.actor_params().values());
        CHECK(b.critic_params().values() == a.critic_params().values());

        PolicyModel c(m, Algo::moe);
        CHECK_THROWS_AS(load_checkpoint(path, c), std::runtime_error);
        CHECK_THROWS_AS(load_checkpoint(dir / "missing.bin", c), std::runtime_error);
        std::filesystem::remove_all(dir);
    }

    TEST_CASE("algorithm names round-trip")
    {
        for (Algo a : {Algo::mlp, Algo::moe, Algo::smoe, Algo::pemamoe})
            CHECK(algo_from_name(algo_name(a)) == a);
        CHECK_THROWS_AS(algo_from_name("ppo"), std::invalid_argument);
    }
}
