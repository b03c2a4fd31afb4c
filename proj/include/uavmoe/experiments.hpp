#pragma once

// Experiment drivers behind the command-line subcommands.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "uavmoe/diagnostics.hpp"
#include "uavmoe/run_config.hpp"
#include "uavmoe/trainer.hpp"

namespace uavmoe::cli {

struct TrainResult
{
    std::filesystem::path out_dir;
    std::vector<train::IterationRecord> records;
};

/// Writes `config.cfg`, trains, and leaves metrics, episodes and checkpoints in `out_dir`.
TrainResult run_training(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream* progress);

struct EvalSummary
{
    std::size_t episodes = 0;
    diag::IqmStat return_;
    diag::IqmStat served;
    diag::IqmStat collisions;
    diag::IqmStat energy_j;
    diag::IqmStat coverage;

    std::string to_json() const;
};

/// Greedy (mean-action) rollouts of a checkpoint. Episodes cycle through the phases.
EvalSummary evaluate(const RunConfig& cfg, const std::filesystem::path& checkpoint, std::size_t episodes,
                     std::uint64_t seed);

/// IQM of a per-iteration metric over the final `fraction` of a run.
double final_iqm(const std::vector<train::IterationRecord>& records, const std::string& metric, double fraction);

inline const std::vector<double> kDefaultNoiseGammas = {0.001, 0.005, 0.010};
inline const std::vector<std::string> kAblationComponents = {"entropy_anneal", "logstd_reset", "lr_anneal", "noise"};

/// One run per noise scale; table of served-user IQM over the final third of training.
std::string sweep_noise(const RunConfig& cfg, const std::vector<double>& gammas, const std::filesystem::path& out_root,
                        std::ostream* progress);

/// Full method versus each minus-one variant; table of return IQMs and relative change.
/// The component name "none" yields the unmodified method.
std::string ablate(const RunConfig& cfg, const std::vector<std::string>& components,
                   const std::filesystem::path& out_root, std::ostream* progress);

/// Applies "minus component" to a config. Throws ConfigError on unknown names.
void disable_component(RunConfig& cfg, const std::string& component);

/// Cross-run comparison table from existing run directories.
std::string diagnose_runs(const std::vector<std::filesystem::path>& run_dirs, double fraction);

} // namespace uavmoe::cli
