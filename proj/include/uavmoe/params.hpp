#pragma once

// Flat parameter storage with named, shaped, group-tagged views.

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace uavmoe::nn {

enum class ParamGroup { router, expert, head, logstd, critic };

const char* group_name(ParamGroup g);
ParamGroup group_from_name(const std::string& name);

struct ParamInfo
{
    std::string name;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    ParamGroup group = ParamGroup::head;
    int expert = -1; ///< expert index for expert-owned tensors, -1 otherwise
    std::size_t offset = 0;

    std::size_t size() const { return static_cast<std::size_t>(rows * cols); }
};

using MatMap = Eigen::Map<Eigen::MatrixXd>;
using ConstMatMap = Eigen::Map<const Eigen::MatrixXd>;

/// Column-major tensors laid out back to back in one contiguous buffer.
class ParamStore
{
public:
    std::size_t add(const std::string& name, Eigen::Index rows, Eigen::Index cols, ParamGroup group,
                    int expert = -1);

    std::size_t size() const { return values_.size(); }
    std::size_t tensor_count() const { return infos_.size(); }
    const std::vector<ParamInfo>& infos() const { return infos_; }
    const ParamInfo& info(std::size_t idx) const { return infos_.at(idx); }
    std::size_t find(const std::string& name) const;

    MatMap mat(std::size_t idx);
    ConstMatMap mat(std::size_t idx) const;

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }
    double* data() { return values_.data(); }
    const double* data() const { return values_.data(); }

    ParamStore zeros_like() const;
    void set_zero();
    void axpy(double a, const ParamStore& x);
    double squared_norm() const;
    bool same_layout(const ParamStore& other) const;

    std::vector<double> snapshot() const { return values_; }
    void restore(const std::vector<double>& snap);

    /// Number of scalars carrying the given tag.
    std::size_t group_size(ParamGroup g) const;

private:
    std::vector<ParamInfo> infos_;
    std::vector<double> values_;
};

} // namespace uavmoe::nn
