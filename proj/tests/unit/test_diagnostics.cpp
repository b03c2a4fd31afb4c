#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <Eigen/SVD>

#include "support.hpp"
#include "uavmoe/diagnostics.hpp"

using namespace uavmoe;
using namespace uavmoe::diag;
using Eigen::MatrixXd;

namespace {

MatrixXd noise_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed)
{
    RandomStream rng(seed, "diag");
    MatrixXd m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i)
            m(i, j) = rng.normal();
    return m;
}

} // namespace

TEST_SUITE("diagnostics")
{
    TEST_CASE("dormant fraction edge cases")
    {
        CHECK(dormant_fraction(MatrixXd::Zero(8, 5), 0.01) == 1.0);
        MatrixXd one = MatrixXd::Zero(6, 4);
        one.col(2).setConstant(10.0);
        CHECK(dormant_fraction(one, 0.01) == 0.75);
        CHECK(dormant_fraction(noise_matrix(16, 8, 1), 0.0) == 0.0);
        CHECK_THROWS_AS(dormant_fraction(MatrixXd(0, 3), 0.1), std::invalid_argument);
    }

    TEST_CASE("dormant fraction is monotone in the threshold")
    {
        MatrixXd a = noise_matrix(32, 20, 2);
        for (Eigen::Index j = 0; j < 20; ++j)
            a.col(j) *= 0.1 * static_cast<double>(j);
        double prev = 0.0;
        for (double d = 0.0; d < 3.0; d += 0.05) {
            const double f = dormant_fraction(a, d);
            CHECK(f >= prev);
            prev = f;
        }
        CHECK(prev == 1.0);
    }

    TEST_CASE("normalised dormant fraction is scale free")
    {
        MatrixXd a = noise_matrix(32, 10, 3);
        a.col(0) *= 1e-4;
        const double base = dormant_fraction_normalized(a, 0.025);
        CHECK(base == 0.1);
        CHECK(dormant_fraction_normalized(1e3 * a, 0.025) == base);
    }

    TEST_CASE("stable rank oracles")
    {
        for (int n : {2, 8, 32})
            CHECK(std::abs(stable_rank(MatrixXd::Identity(n, n)) - n) < 1e-9);
        const Eigen::VectorXd u = noise_matrix(9, 1, 4).col(0);
        const Eigen::VectorXd v = noise_matrix(5, 1, 5).col(0);
        CHECK(std::abs(stable_rank(u * v.transpose()) - 1.0) < 1e-9);
        CHECK(stable_rank(MatrixXd::Zero(4, 4)) == 0.0);
        const MatrixXd a = noise_matrix(40, 12, 6);
        CHECK(stable_rank(a) == doctest::Approx(stable_rank(-3.5 * a)).epsilon(1e-8));
    }

    TEST_CASE("stable rank bounds and agreement with the SVD")
    {
        for (std::uint64_t s = 0; s < 10; ++s) {
            const MatrixXd a = noise_matrix(30, 7, 100 + s);
            const double r = stable_rank(a);
            CHECK(r >= 1.0);
            CHECK(r <= 7.0);
            Eigen::JacobiSVD<MatrixXd> svd(a);
            const double smax = svd.singularValues()(0);
            CHECK(r == doctest::Approx(a.squaredNorm() / (smax * smax)).epsilon(1e-8));
        }
    }

    TEST_CASE("interquartile mean")
    {
        const std::vector<double> v{8, 1, 7, 2, 6, 3, 5, 4};
        CHECK(iqm(v) == 4.5);
        const std::vector<double> c(9, 3.25);
        CHECK(iqm(c) == 3.25);
        const std::vector<double> small{1.0, 5.0};
        CHECK(iqm(small) == 3.0);
        CHECK_THROWS(iqm(std::vector<double>{}));

        RandomStream rng(7, "iqm");
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> x(37);
            for (auto& e : x)
                e = rng.normal(0.0, 5.0);
            std::vector<double> s = x;
            std::sort(s.begin(), s.end());
            const double m = iqm(x);
            CHECK(m >= s[9]);
            CHECK(m <= s[27]);
            std::reverse(x.begin(), x.end());
            CHECK(iqm(x) == m);
        }
    }

    TEST_CASE("interquartile mean standard error")
    {
        const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8};
        const auto s = iqm_with_stderr(v);
        CHECK(s.iqm == 4.5);
        const double sd = std::sqrt((2.25 + 0.25 + 0.25 + 2.25) / 3.0);
        CHECK(s.stderr_ == doctest::Approx(sd / 2.0).epsilon(1e-14));
        CHECK(iqm_with_stderr(std::vector<double>(6, 2.0)).stderr_ == 0.0);
        const auto t = iqm_with_stderr(std::vector<double>{1.0, 3.0});
        CHECK(t.stderr_ == doctest::Approx(std::sqrt(2.0) / std::sqrt(2.0)));
    }

    TEST_CASE("min-max normalisation")
    {
        const std::vector<double> v{2, 4, 6};
        CHECK(minmax_normalize(v) == std::vector<double>{0.0, 0.5, 1.0});
        CHECK(minmax_normalize(v, true) == std::vector<double>{1.0, 0.5, 0.0});
        CHECK(minmax_normalize(std::vector<double>{3, 3}) == std::vector<double>{0.5, 0.5});
        const std::vector<double> w{2 * 7.0 - 1, 4 * 7.0 - 1, 6 * 7.0 - 1};
        CHECK(minmax_normalize(w) == minmax_normalize(v));
    }

    TEST_CASE("routing rates")
    {
        CHECK(routing_rates(std::vector<int>(10, 2), 3) == std::vector<double>{0.0, 0.0, 1.0});
        CHECK_THROWS_AS(routing_rates(std::vector<int>{}, 3), std::invalid_argument);
        RandomStream rng(8, "route");
        std::vector<int> sel(30000);
        for (auto& s : sel)
            s = static_cast<int>(rng.uniform() * 3.0);
        const auto r = routing_rates(sel, 3);
        const double sigma = std::sqrt((1.0 / 3.0) * (2.0 / 3.0) / 30000.0);
        double total = 0.0;
        for (double x : r) {
            CHECK(std::abs(x - 1.0 / 3.0) < 3.0 * sigma);
            total += x;
        }
        CHECK(total == doctest::Approx(1.0));
    }

    TEST_CASE("stride subsample keeps evenly spaced rows")
    {
        MatrixXd x(10, 1);
        for (int i = 0; i < 10; ++i)
            x(i, 0) = i;
        const MatrixXd s = stride_subsample(x, 5);
        REQUIRE(s.rows() == 5);
        CHECK(s(1, 0) == 2.0);
        CHECK(s(4, 0) == 8.0);
        CHECK(stride_subsample(x, 20).rows() == 10);
    }

    TEST_CASE("plasticity over a network's experts")
    {
        nn::ParamStore p;
        nn::MoeNet net(nn::NetConfig{6, 2, nn::ArchKind::sparse_moe, 3, 1, 8}, p, "");
        RandomStream rng(9, "init");
        net.init(p, rng, 0.01);
        const auto s = plasticity(net, p, noise_matrix(100, 6, 10), 64, 0.025);
        CHECK(s.expert_rank.size() == 3);
        CHECK(s.dnf >= 0.0);
        CHECK(s.dnf <= 1.0);
        CHECK(s.stable_rank >= 1.0);
        CHECK(s.stable_rank <= 8.0);

        // A dead expert: every pre-activation pushed far below zero.
        p.mat(p.find("expert1.l1.b")).setConstant(-1e3);
        p.mat(p.find("expert1.l2.b")).setConstant(-1e3);
        const auto dead = plasticity(net, p, noise_matrix(100, 6, 10), 64, 0.025);
        CHECK(dead.expert_rank[1] == 0.0);
    }

    TEST_CASE("metric log summaries and comparison tables")
    {
        const auto dir = std::filesystem::temp_directory_path() / "uavmoe_diag_test";
        std::filesystem::create_directories(dir);
        {
            std::ofstream os(dir / "metrics.jsonl");
            for (int i = 1; i <= 12; ++i)
                os << "{\"iter\":" << i << ",\"served\":" << i << ",\"dnf\":null}\n";
        }
        const auto s = summarize_metric_log(dir / "metrics.jsonl", 1.0 / 3.0);
        CHECK(s.at("served") == 10.5);
        CHECK(s.count("dnf") == 0);
        std::filesystem::remove_all(dir);

        const std::vector<std::pair<std::string, std::map<std::string, double>>> runs = {
            {"a", {{"served", 2.0}, {"energy_j", 10.0}}},
            {"b", {{"served", 6.0}, {"energy_j", 30.0}}},
        };
        const auto t = comparison_table(runs, {{"served", false}, {"energy_j", true}});
        CHECK(t.find("a\t2\t0\t10\t1\t0.5") != std::string::npos);
        CHECK(t.find("b\t6\t1\t30\t0\t0.5") != std::string::npos);
    }
}
