#pragma once

// Run configuration: an INI-style key-value tree with strict validation.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "uavmoe/environment.hpp"
#include "uavmoe/policy.hpp"
#include "uavmoe/train_config.hpp"

namespace uavmoe::cli {

struct RunConfig
{
    env::ScenarioConfig scenario;
    train::TrainConfig train;
    nn::ModelConfig model;
    nn::Algo algo = nn::Algo::pemamoe;
    std::size_t seed = 1;
    std::string out_dir = "runs";

    /// Range-checks every field; throws ConfigError naming the offending key.
    void validate() const;
    /// Model sizes with the observation layout filled in from the scenario.
    nn::ModelConfig resolved_model() const;
};

/// Reads `path`; keys absent from the file keep their defaults.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& text, const std::string& origin = "<string>");

/// Applies one `section.key=value` override.
void apply_override(RunConfig& cfg, const std::string& assignment);
void set_value(RunConfig& cfg, const std::string& key, const std::string& value);
std::string get_value(const RunConfig& cfg, const std::string& key);

/// Every recognised key, in snapshot order.
std::vector<std::string> config_keys();

/// Full snapshot; doubles are written with 17 significant digits so the file round-trips exactly.
std::string to_ini(const RunConfig& cfg);

} // namespace uavmoe::cli
