#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "dreach/grid.hpp"

namespace dreach {

// Binary field layout, little-endian:
//   "DRFD" | version u32 | n_dims u32 | count u64 x n_dims |
//   (lower f64, upper f64) x n_dims | periodic u8 x n_dims | values f64 x nodes
inline constexpr std::uint32_t kFieldFormatVersion = 1;

void write_field(std::ostream& os, const ScalarField& field);
ScalarField read_field(std::istream& is);

void save_field(const std::filesystem::path& path, const ScalarField& field);
ScalarField load_field(const std::filesystem::path& path);

/// One line per node: coordinates then value, comma separated, no header.
void write_field_csv(std::ostream& os, const ScalarField& field);

}  // namespace dreach
