#include "uavmoe/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace uavmoe::diag {

using Eigen::Index;
using Eigen::MatrixXd;

double dormant_fraction(const MatrixXd& pre, double delta)
{
    if (pre.cols() == 0 || pre.rows() == 0)
        throw std::invalid_argument("dormant_fraction: empty activation matrix");
    const Eigen::RowVectorXd score = pre.cwiseAbs().colwise().mean();
    return static_cast<double>((score.array() < delta).count()) / static_cast<double>(pre.cols());
}

double dormant_fraction_normalized(const MatrixXd& pre, double delta)
{
    if (pre.cols() == 0 || pre.rows() == 0)
        throw std::invalid_argument("dormant_fraction: empty activation matrix");
    const double mean = pre.mean();
    const double sd = std::sqrt((pre.array() - mean).square().mean());
    if (sd == 0.0)
        return dormant_fraction(pre, delta);
    return dormant_fraction(pre / sd, delta);
}

double stable_rank(const MatrixXd& a, double tol, int max_iter)
{
    const double fro2 = a.squaredNorm();
    if (fro2 == 0.0)
        return 0.0;
    const MatrixXd ata = a.transpose() * a;
    Eigen::VectorXd v(ata.cols());
    for (Index i = 0; i < v.size(); ++i)
        v(i) = 1.0 + static_cast<double>(i + 1) / static_cast<double>(v.size() + 1);
    v.normalize();
    double lambda = v.dot(ata * v);
    for (int it = 0; it < max_iter; ++it) {
        Eigen::VectorXd w = ata * v;
        const double n = w.norm();
        if (n == 0.0)
            break;
        v = w / n;
        const double next = v.dot(ata * v);
        const bool done = std::abs(next - lambda) <= tol * std::abs(next);
        lambda = next;
        if (done)
            break;
    }
    return lambda > 0.0 ? fro2 / lambda : 0.0;
}

namespace {

std::vector<double> middle(std::span<const double> values)
{
    if (values.empty())
        throw std::invalid_argument("iqm: empty input");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    if (v.size() < 4)
        return v;
    const std::size_t cut = v.size() / 4;
    return {v.begin() + static_cast<std::ptrdiff_t>(cut), v.end() - static_cast<std::ptrdiff_t>(cut)};
}

} // namespace

double iqm(std::span<const double> values)
{
    const auto m = middle(values);
    return std::accumulate(m.begin(), m.end(), 0.0) / static_cast<double>(m.size());
}

IqmStat iqm_with_stderr(std::span<const double> values)
{
    const auto m = middle(values);
    const double n = static_cast<double>(m.size());
    IqmStat out;
    out.iqm = std::accumulate(m.begin(), m.end(), 0.0) / n;
    if (m.size() > 1) {
        double ss = 0.0;
        for (double x : m)
            ss += (x - out.iqm) * (x - out.iqm);
        out.stderr_ = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    return out;
}

std::vector<double> minmax_normalize(std::span<const double> values, bool lower_is_better)
{
    if (values.empty())
        return {};
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values) {
        const double s = *hi == *lo ? 0.5 : (v - *lo) / (*hi - *lo);
        out.push_back(lower_is_better ? 1.0 - s : s);
    }
    return out;
}

std::vector<double> routing_rates(std::span<const int> selections, int n_experts)
{
    if (selections.empty())
        throw std::invalid_argument("routing_rates: empty selection window");
    if (n_experts < 1)
        throw std::invalid_argument("routing_rates: n_experts must be positive");
    std::vector<double> rates(static_cast<std::size_t>(n_experts), 0.0);
    for (int s : selections) {
        if (s < 0 || s >= n_experts)
            throw std::out_of_range("routing_rates: expert index out of range");
        rates[static_cast<std::size_t>(s)] += 1.0;
    }
    for (double& r : rates)
        r /= static_cast<double>(selections.size());
    return rates;
}

MatrixXd stride_subsample(const MatrixXd& x, std::size_t max_rows)
{
    const auto n = static_cast<std::size_t>(x.rows());
    if (max_rows == 0 || n <= max_rows)
        return x;
    MatrixXd out(static_cast<Index>(max_rows), x.cols());
    for (std::size_t i = 0; i < max_rows; ++i)
        out.row(static_cast<Index>(i)) = x.row(static_cast<Index>(i * n / max_rows));
    return out;
}

PlasticityStats plasticity(const nn::MoeNet& net, const nn::ParamStore& params, const MatrixXd& obs,
                           std::size_t max_rows, double delta)
{
    const MatrixXd x = stride_subsample(obs, max_rows);
    const auto acts = net.expert_activations(params, x);
    PlasticityStats s;
    double dormant = 0.0;
    double dormant_raw = 0.0;
    double units = 0.0;
    for (std::size_t j = 0; j < acts.pre1.size(); ++j) {
        for (const MatrixXd* layer : {&acts.pre1[j], &acts.pre2[j]}) {
            const double w = static_cast<double>(layer->cols());
            dormant += w * dormant_fraction_normalized(*layer, delta);
            dormant_raw += w * dormant_fraction(*layer, delta);
            units += w;
        }
        s.expert_rank.push_back(stable_rank(acts.pre2[j].cwiseMax(0.0)));
    }
    s.dnf = dormant / units;
    s.dnf_raw = dormant_raw / units;
    s.stable_rank = std::accumulate(s.expert_rank.begin(), s.expert_rank.end(), 0.0) /
                    static_cast<double>(s.expert_rank.size());
    return s;
}

std::map<std::string, double> summarize_metric_log(const std::filesystem::path& path, double fraction)
{
    std::ifstream is(path);
    if (!is)
        throw std::runtime_error("cannot open metric log " + path.string());
    std::vector<nlohmann::json> records;
    std::string line;
    while (std::getline(is, line))
        if (!line.empty())
            records.push_back(nlohmann::json::parse(line));
    if (records.empty())
        throw std::runtime_error("metric log " + path.string() + " is empty");

    const std::size_t keep = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(records.size()))));
    std::map<std::string, std::vector<double>> series;
    for (std::size_t i = records.size() - keep; i < records.size(); ++i)
        for (const auto& [k, v] : records[i].items())
            if (v.is_number())
                series[k].push_back(v.get<double>());
    std::map<std::string, double> out;
    for (const auto& [k, v] : series)
        out[k] = iqm(v);
    return out;
}

const std::vector<MetricSpec>& comparison_metrics()
{
    static const std::vector<MetricSpec> m = {
        {"coverage", false}, {"return_mean", false}, {"served", false}, {"energy_j", true}, {"collisions", true}};
    return m;
}

std::string comparison_table(const std::vector<std::pair<std::string, std::map<std::string, double>>>& runs,
                             const std::vector<MetricSpec>& metrics)
{
    std::ostringstream os;
    os.precision(10);
    os << "run";
    for (const auto& m : metrics)
        os << '\t' << m.name << '\t' << m.name << "_score";
    os << "\tmean_score\n";

    std::vector<std::vector<double>> scores(metrics.size());
    for (std::size_t k = 0; k < metrics.size(); ++k) {
        std::vector<double> vals;
        for (const auto& r : runs) {
            const auto it = r.second.find(metrics[k].name);
            vals.push_back(it == r.second.end() ? 0.0 : it->second);
        }
        scores[k] = minmax_normalize(vals, metrics[k].lower_is_better);
    }
    for (std::size_t i = 0; i < runs.size(); ++i) {
        os << runs[i].first;
        double total = 0.0;
        for (std::size_t k = 0; k < metrics.size(); ++k) {
            const auto it = runs[i].second.find(metrics[k].name);
            os << '\t' << (it == runs[i].second.end() ? 0.0 : it->second) << '\t' << scores[k][i];
            total += scores[k][i];
        }
        os << '\t' << (metrics.empty() ? 0.0 : total / static_cast<double>(metrics.size())) << '\n';
    }
    return os.str();
}

} // namespace uavmoe::diag
