#include "wstokes/field_io.hpp"

#include "wstokes/errors.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace wstokes {

namespace {

template <typename T>
void put(std::ostream& os, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(bytes, sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  char bytes[sizeof(T)];
  if (!is.read(bytes, sizeof(T))) throw std::runtime_error("truncated field stream");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_field(std::ostream& os, const Field& f) {
  const Grid& g = f.grid();
  put<std::int32_t>(os, g.dim());
  put<std::int32_t>(os, g.points_per_axis());
  put<double>(os, g.half_extent());
  put<std::int32_t>(os, f.components());
  for (Eigen::Index p = 0; p < f.size(); ++p)
    for (int c = 0; c < f.components(); ++c) put<double>(os, f.values()(p, c));
  if (!os) throw std::runtime_error("failed writing field stream");
}

Field read_field(std::istream& is) {
  const int n = get<std::int32_t>(is);
  const int N = get<std::int32_t>(is);
  const double L = get<double>(is);
  const int comps = get<std::int32_t>(is);
  require(comps >= 1 && comps <= 1024, "invalid component count in field stream");
  Grid g(n, N, L);
  Field f(g, comps);
  for (Eigen::Index p = 0; p < f.size(); ++p)
    for (int c = 0; c < comps; ++c) f.values()(p, c) = get<double>(is);
  return f;
}

void write_field(const std::filesystem::path& path, const Field& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_field(os, f);
}

Field read_field(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return read_field(is);
}

}  // namespace wstokes
