#include "okflow/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace okflow {

namespace {

constexpr char kMagic[4] = {'O', 'K', 'F', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& buf, double d) {
    const auto bits = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}

double get_f64(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

}  // namespace

void write_snapshot(const Field& field, double time, const std::string& path) {
    const GridSpec& g = field.grid();
    std::string buf;
    buf.reserve(24 + 8 * field.size());
    buf.append(kMagic, 4);
    put_u32(buf, kVersion);
    put_u32(buf, static_cast<std::uint32_t>(g.dims()));
    for (int a = 0; a < g.dims(); ++a) put_u32(buf, static_cast<std::uint32_t>(g.nodes(a)));
    put_f64(buf, time);
    for (std::size_t i = 0; i < field.size(); ++i) put_f64(buf, field[i]);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("snapshot: cannot open '" + path + "' for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw std::runtime_error("snapshot: write failed for '" + path + "'");
}

Snapshot read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("snapshot: cannot open '" + path + "'");
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
    const std::size_t size = buf.size();

    if (size < 12 || std::memcmp(buf.data(), kMagic, 4) != 0)
        throw std::runtime_error("snapshot: bad magic in '" + path + "'");
    if (get_u32(p + 4) != kVersion)
        throw std::runtime_error("snapshot: unsupported version in '" + path + "'");
    const std::uint32_t dims = get_u32(p + 8);
    if (dims < 2 || dims > 3)
        throw std::runtime_error("snapshot: bad dimension count in '" + path + "'");

    const std::size_t header = 12 + 4 * dims + 8;
    if (size < header)
        throw std::runtime_error("snapshot: truncated header in '" + path + "'");

    Snapshot snap;
    std::size_t count = 1;
    for (std::uint32_t a = 0; a < dims; ++a) {
        const std::uint32_t nc = get_u32(p + 12 + 4 * a);
        snap.nodes.push_back(static_cast<int>(nc));
        count *= nc;
    }
    snap.time = get_f64(p + 12 + 4 * dims);

    if (size != header + 8 * count)
        throw std::runtime_error("snapshot: size mismatch in '" + path + "'");
    snap.values.resize(count);
    for (std::size_t i = 0; i < count; ++i)
        snap.values[i] = get_f64(p + header + 8 * i);
    return snap;
}

Field snapshot_to_field(const Snapshot& snap, GridPtr grid) {
    if (static_cast<int>(snap.nodes.size()) != grid->dims())
        throw std::runtime_error("snapshot: grid dimension mismatch");
    for (int a = 0; a < grid->dims(); ++a)
        if (snap.nodes[a] != grid->nodes(a))
            throw std::runtime_error("snapshot: node count mismatch");
    return Field(std::move(grid), snap.values);
}

}  // namespace okflow
