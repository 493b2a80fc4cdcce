#include "dreach/field_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "dreach/errors.hpp"

namespace dreach {

namespace {

constexpr std::array<char, 4> kMagic{'D', 'R', 'F', 'D'};

template <typename T>
void put_le(std::ostream& os, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::array<unsigned char, sizeof(T)> raw{};
    std::memcpy(raw.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
    os.write(reinterpret_cast<const char*>(raw.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
    std::array<unsigned char, sizeof(T)> raw{};
    if (!is.read(reinterpret_cast<char*>(raw.data()), sizeof(T))) {
        throw DomainError("field file truncated");
    }
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
    T value;
    std::memcpy(&value, raw.data(), sizeof(T));
    return value;
}

}  // namespace

void write_field(std::ostream& os, const ScalarField& field) {
    const Grid& g = field.grid();
    os.write(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(os, kFieldFormatVersion);
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.dims()));
    for (const auto& a : g.axes()) put_le<std::uint64_t>(os, a.count);
    for (const auto& a : g.axes()) {
        put_le<double>(os, a.lower);
        put_le<double>(os, a.upper);
    }
    for (const auto& a : g.axes()) put_le<std::uint8_t>(os, a.periodic ? 1 : 0);
    for (double v : field.values()) put_le<double>(os, v);
}

ScalarField read_field(std::istream& is) {
    std::array<char, 4> magic{};
    if (!is.read(magic.data(), magic.size()) || magic != kMagic) {
        throw DomainError("not a field file (bad magic)");
    }
    const auto version = get_le<std::uint32_t>(is);
    if (version != kFieldFormatVersion) {
        throw DomainError("unsupported field format version " + std::to_string(version));
    }
    const auto nd = get_le<std::uint32_t>(is);
    if (nd == 0 || nd > 16) throw DomainError("implausible dimension count in field file");
    std::vector<std::size_t> counts(nd);
    for (auto& c : counts) c = static_cast<std::size_t>(get_le<std::uint64_t>(is));
    std::vector<std::pair<double, double>> bounds(nd);
    for (auto& b : bounds) {
        b.first = get_le<double>(is);
        b.second = get_le<double>(is);
    }
    std::vector<bool> periodic(nd);
    for (std::size_t d = 0; d < nd; ++d) periodic[d] = get_le<std::uint8_t>(is) != 0;
    Grid grid = build_grid(bounds, counts, periodic);
    std::vector<double> values(grid.size());
    for (auto& v : values) v = get_le<double>(is);
    return ScalarField(std::move(grid), std::move(values));
}

void save_field(const std::filesystem::path& path, const ScalarField& field) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw DomainError("cannot open " + path.string() + " for writing");
    write_field(os, field);
}

ScalarField load_field(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw MissingArtifact("cannot open field file " + path.string());
    return read_field(is);
}

void write_field_csv(std::ostream& os, const ScalarField& field) {
    const Grid& g = field.grid();
    std::vector<double> x(g.dims());
    os << std::setprecision(17);
    for (std::size_t node = 0; node < g.size(); ++node) {
        g.point(node, x);
        for (double xi : x) os << xi << ',';
        os << field[node] << '\n';
    }
}

}  // namespace dreach
