#include "uavmoe/params.hpp"

#include <stdexcept>

namespace uavmoe::nn {

const char* group_name(ParamGroup g)
{
    switch (g) {
    case ParamGroup::router: return "router";
    case ParamGroup::expert: return "expert";
    case ParamGroup::head: return "head";
    case ParamGroup::logstd: return "logstd";
    case ParamGroup::critic: return "critic";
    }
    return "?";
}

ParamGroup group_from_name(const std::string& name)
{
    for (auto g : {ParamGroup::router, ParamGroup::expert, ParamGroup::head, ParamGroup::logstd, ParamGroup::critic})
        if (name == group_name(g))
            return g;
    throw std::invalid_argument("unknown parameter group '" + name + "'");
}

std::size_t ParamStore::add(const std::string& name, Eigen::Index rows, Eigen::Index cols, ParamGroup group,
                            int expert)
{
    if (rows <= 0 || cols <= 0)
        throw std::invalid_argument("ParamStore::add: empty tensor '" + name + "'");
    for (const auto& i : infos_)
        if (i.name == name)
            throw std::invalid_argument("ParamStore::add: duplicate tensor '" + name + "'");
    ParamInfo info{name, rows, cols, group, expert, values_.size()};
    values_.resize(values_.size() + info.size(), 0.0);
    infos_.push_back(std::move(info));
    return infos_.size() - 1;
}

std::size_t ParamStore::find(const std::string& name) const
{
    for (std::size_t i = 0; i < infos_.size(); ++i)
        if (infos_[i].name == name)
            return i;
    throw std::out_of_range("ParamStore: no tensor named '" + name + "'");
}

MatMap ParamStore::mat(std::size_t idx)
{
    const auto& i = infos_.at(idx);
    return MatMap(values_.data() + i.offset, i.rows, i.cols);
}

ConstMatMap ParamStore::mat(std::size_t idx) const
{
    const auto& i = infos_.at(idx);
    return ConstMatMap(values_.data() + i.offset, i.rows, i.cols);
}

ParamStore ParamStore::zeros_like() const
{
    ParamStore out;
    out.infos_ = infos_;
    out.values_.assign(values_.size(), 0.0);
    return out;
}

void ParamStore::set_zero() { std::fill(values_.begin(), values_.end(), 0.0); }

void ParamStore::axpy(double a, const ParamStore& x)
{
    if (!same_layout(x))
        throw std::invalid_argument("ParamStore::axpy: layout mismatch");
    for (std::size_t i = 0; i < values_.size(); ++i)
        values_[i] += a * x.values_[i];
}

double ParamStore::squared_norm() const
{
    double s = 0.0;
    for (double v : values_)
        s += v * v;
    return s;
}

bool ParamStore::same_layout(const ParamStore& other) const
{
    if (infos_.size() != other.infos_.size() || values_.size() != other.values_.size())
        return false;
    for (std::size_t i = 0; i < infos_.size(); ++i) {
        const auto& a = infos_[i];
        const auto& b = other.infos_[i];
        if (a.name != b.name || a.rows != b.rows || a.cols != b.cols || a.offset != b.offset)
            return false;
    }
    return true;
}

void ParamStore::restore(const std::vector<double>& snap)
{
    if (snap.size() != values_.size())
        throw std::invalid_argument("ParamStore::restore: size mismatch");
    values_ = snap;
}

std::size_t ParamStore::group_size(ParamGroup g) const
{
    std::size_t n = 0;
    for (const auto& i : infos_)
        if (i.group == g)
            n += i.size();
    return n;
}

} // namespace uavmoe::nn
