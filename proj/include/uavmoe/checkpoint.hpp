#pragma once

// Binary model checkpoints. The byte layout is documented in docs/checkpoint_format.md.

#include <cstdint>
#include <filesystem>
#include <string>

#include "uavmoe/policy.hpp"

namespace uavmoe::nn {

inline constexpr char kCheckpointMagic[8] = {'U', 'A', 'V', 'M', 'O', 'E', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const PolicyModel& model, const std::string& metadata);

/// Loads parameters by name into `model`; names and shapes must match exactly.
/// Returns the metadata string stored with the checkpoint.
std::string load_checkpoint(const std::filesystem::path& path, PolicyModel& model);

std::string read_checkpoint_metadata(const std::filesystem::path& path);

} // namespace uavmoe::nn
