#pragma once

// Plasticity and evaluation metrics.

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "uavmoe/moe_net.hpp"
#include "uavmoe/params.hpp"

namespace uavmoe::diag {

/// Fraction of units (columns) whose mean |pre-activation| over the batch is below `delta`.
double dormant_fraction(const Eigen::MatrixXd& pre, double delta);
/// Same, with each unit's score divided by the standard deviation of the whole layer.
double dormant_fraction_normalized(const Eigen::MatrixXd& pre, double delta);

/// ||A||_F^2 / sigma_max(A)^2 with sigma_max from power iteration on A^T A; 0 for A = 0.
double stable_rank(const Eigen::MatrixXd& a, double tol = 1e-10, int max_iter = 1000);

/// Interquartile mean: drop floor(n/4) values from each end. Plain mean when n < 4.
double iqm(std::span<const double> values);

struct IqmStat
{
    double iqm = 0.0;
    double stderr_ = 0.0;
};

/// IQM and the standard error of the retained middle sample.
IqmStat iqm_with_stderr(std::span<const double> values);

/// Min-max scores in [0, 1]; all 0.5 when every value is equal.
std::vector<double> minmax_normalize(std::span<const double> values, bool lower_is_better = false);

/// Empirical selection frequency of each expert. Throws on an empty log.
std::vector<double> routing_rates(std::span<const int> selections, int n_experts);

/// Evenly strided subset of at most `max_rows` rows.
Eigen::MatrixXd stride_subsample(const Eigen::MatrixXd& x, std::size_t max_rows);

struct PlasticityStats
{
    double dnf = 0.0;     ///< normalised variant, pooled over every expert hidden layer
    double dnf_raw = 0.0; ///< raw threshold variant
    double stable_rank = 0.0;
    std::vector<double> expert_rank;
};

PlasticityStats plasticity(const nn::MoeNet& net, const nn::ParamStore& params, const Eigen::MatrixXd& obs,
                           std::size_t max_rows, double delta);

/// Per-run summary: IQM of each scalar metric over the last `fraction` of a metric log.
std::map<std::string, double> summarize_metric_log(const std::filesystem::path& path, double fraction);

struct MetricSpec
{
    std::string name;
    bool lower_is_better = false;
};

/// Default metrics for cross-run tables.
const std::vector<MetricSpec>& comparison_metrics();

/// Tab-separated table: one row per run with raw IQM and normalised score per metric.
std::string comparison_table(const std::vector<std::pair<std::string, std::map<std::string, double>>>& runs,
                             const std::vector<MetricSpec>& metrics);

} // namespace uavmoe::diag
