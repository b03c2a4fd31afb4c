#pragma once

#include <stdexcept>
#include <string>

namespace uavmoe {

/// A configuration value failed validation. `path()` names the offending field
/// (e.g. "train.lr") so callers can report it verbatim.
class ConfigError : public std::runtime_error
{
public:
    ConfigError(std::string path, const std::string& message)
        : std::runtime_error(path + ": " + message), path_(std::move(path))
    {
    }

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// Motion within a slot does not fit in the slot duration.
class InfeasibleAction : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// An agent action is malformed (NaN, wrong count).
class InvalidAction : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// Training hit a non-recoverable numeric state (NaN loss, non-finite params).
class TrainingAbort : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

} // namespace uavmoe
