#include "uavmoe/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace uavmoe::nn {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

template <class T> void put(std::ostream& os, T v) { os.write(reinterpret_cast<const char*>(&v), sizeof(T)); }

template <class T> T get(std::istream& is)
{
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is)
        throw std::runtime_error("checkpoint: unexpected end of file");
    return v;
}

std::string get_string(std::istream& is, std::uint32_t len)
{
    std::string s(len, '\0');
    is.read(s.data(), len);
    if (!is)
        throw std::runtime_error("checkpoint: unexpected end of file");
    return s;
}

struct Entry
{
    const ParamStore* store;
    std::size_t idx;
    std::string name;
};

std::vector<Entry> entries(const PolicyModel& m)
{
    std::vector<Entry> out;
    for (std::size_t i = 0; i < m.actor_params().tensor_count(); ++i)
        out.push_back({&m.actor_params(), i, "actor/" + m.actor_params().info(i).name});
    for (std::size_t i = 0; i < m.critic_params().tensor_count(); ++i)
        out.push_back({&m.critic_params(), i, "critic/" + m.critic_params().info(i).name});
    return out;
}

struct Header
{
    std::string metadata;
    struct Row
    {
        std::string name;
        std::uint8_t group;
        std::int32_t expert;
        std::uint64_t rows, cols;
    };
    std::vector<Row> table;
};

Header read_header(std::istream& is, const std::filesystem::path& path)
{
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kCheckpointMagic, 8) != 0)
        throw std::runtime_error("checkpoint: " + path.string() + " is not a model checkpoint");
    const auto version = get<std::uint32_t>(is);
    if (version != kCheckpointVersion)
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
    Header h;
    h.metadata = get_string(is, get<std::uint32_t>(is));
    const auto count = get<std::uint32_t>(is);
    for (std::uint32_t i = 0; i < count; ++i) {
        Header::Row r;
        r.name = get_string(is, get<std::uint32_t>(is));
        r.group = get<std::uint8_t>(is);
        r.expert = get<std::int32_t>(is);
        r.rows = get<std::uint64_t>(is);
        r.cols = get<std::uint64_t>(is);
        h.table.push_back(std::move(r));
    }
    return h;
}

} // namespace

void save_checkpoint(const std::filesystem::path& path, const PolicyModel& model, const std::string& metadata)
{
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os)
            throw std::runtime_error("checkpoint: cannot open " + tmp.string() + " for writing");
        os.write(kCheckpointMagic, 8);
        put<std::uint32_t>(os, kCheckpointVersion);
        put<std::uint32_t>(os, static_cast<std::uint32_t>(metadata.size()));
        os.write(metadata.data(), static_cast<std::streamsize>(metadata.size()));
        const auto es = entries(model);
        put<std::uint32_t>(os, static_cast<std::uint32_t>(es.size()));
        for (const auto& e : es) {
            const auto& info = e.store->info(e.idx);
            put<std::uint32_t>(os, static_cast<std::uint32_t>(e.name.size()));
            os.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
            put<std::uint8_t>(os, static_cast<std::uint8_t>(info.group));
            put<std::int32_t>(os, info.expert);
            put<std::uint64_t>(os, static_cast<std::uint64_t>(info.rows));
            put<std::uint64_t>(os, static_cast<std::uint64_t>(info.cols));
        }
        for (const auto& e : es) {
            const auto& info = e.store->info(e.idx);
            os.write(reinterpret_cast<const char*>(e.store->data() + info.offset),
                     static_cast<std::streamsize>(info.size() * sizeof(double)));
        }
        if (!os)
            throw std::runtime_error("checkpoint: write to " + tmp.string() + " failed");
    }
    std::filesystem::rename(tmp, path);
}

std::string load_checkpoint(const std::filesystem::path& path, PolicyModel& model)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("checkpoint: cannot open " + path.string());
    const Header h = read_header(is, path);
    const auto es = entries(model);
    if (h.table.size() != es.size())
        throw std::runtime_error("checkpoint: tensor count " + std::to_string(h.table.size()) +
                                 " does not match the model (" + std::to_string(es.size()) + ")");
    for (std::size_t i = 0; i < es.size(); ++i) {
        const auto& info = es[i].store->info(es[i].idx);
        const auto& row = h.table[i];
        if (row.name != es[i].name || row.rows != static_cast<std::uint64_t>(info.rows) ||
            row.cols != static_cast<std::uint64_t>(info.cols))
            throw std::runtime_error("checkpoint: tensor '" + row.name + "' does not match model tensor '" +
                                     es[i].name + "'");
    }
    for (const auto& e : es) {
        auto* store = const_cast<ParamStore*>(e.store);
        const auto& info = store->info(e.idx);
        is.read(reinterpret_cast<char*>(store->data() + info.offset),
                static_cast<std::streamsize>(info.size() * sizeof(double)));
        if (!is)
            throw std::runtime_error("checkpoint: truncated data section in " + path.string());
    }
    return h.metadata;
}

std::string read_checkpoint_metadata(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("checkpoint: cannot open " + path.string());
    return read_header(is, path).metadata;
}

} // namespace uavmoe::nn
