#pragma once

#include "wstokes/field.hpp"

#include <filesystem>
#include <iosfwd>

namespace wstokes {

// Binary layout, all little-endian:
//   int32 n, int32 N, float64 L, int32 components,
//   then N^n * components float64 samples, row-major over (i_0, ..., i_{n-1}, component).

void write_field(std::ostream& os, const Field& f);
Field read_field(std::istream& is);

void write_field(const std::filesystem::path& path, const Field& f);
Field read_field(const std::filesystem::path& path);

}  // namespace wstokes
