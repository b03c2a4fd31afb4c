#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace uavmoe {

/// A seedable random stream. The normal distribution object is kept with the
/// engine so that its cached second variate is part of the stream state.
class RandomStream
{
public:
    RandomStream() : RandomStream(0, "default") {}
    RandomStream(std::uint64_t seed, std::string_view name);

    double uniform() { return uniform_(engine_); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform_(engine_); }
    double normal() { return normal_(engine_); }
    double normal(double mean, double stddev) { return mean + stddev * normal_(engine_); }
    bool bernoulli(double p) { return uniform_(engine_) < p; }
    double gamma(double shape, double scale)
    {
        std::gamma_distribution<double> dist(shape, scale);
        return dist(engine_);
    }
    std::uint64_t next_u64() { return engine_(); }

    std::mt19937_64& engine() { return engine_; }

    friend bool operator==(const RandomStream& a, const RandomStream& b)
    {
        return a.engine_ == b.engine_ && a.normal_ == b.normal_;
    }

private:
    std::mt19937_64 engine_;
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// 64-bit FNV-1a; used to derive stream seeds from names.
std::uint64_t fnv1a(std::string_view text);

} // namespace uavmoe
