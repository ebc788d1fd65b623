#include "csnt/snapshot_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "csnt/errors.hpp"

namespace csnt {

namespace {

constexpr std::array<char, 6> kMagic{'C', 'S', 'N', 'T', '1', '\0'};

template <typename T>
void put_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  os.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(const unsigned char* p) {
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

void write_planes(const std::filesystem::path& path, const Grid& grid, double time,
                  const std::vector<std::span<const double>>& planes) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open snapshot for writing: " + path.string());
  os.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(grid.dim()));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(grid.n()));
  put_le<double>(os, time);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    for (const auto& plane : planes) put_le<double>(os, plane[p]);
  }
  if (!os) throw DataError("failed writing snapshot: " + path.string());
}

}  // namespace

void write_snapshot(const std::filesystem::path& path, const ScalarField& f, double time) {
  write_planes(path, f.grid(), time, {f.values()});
}

void write_snapshot(const std::filesystem::path& path, const VectorField& u, double time) {
  std::vector<std::span<const double>> planes;
  for (int c = 0; c < u.components(); ++c) planes.push_back(u.component(c));
  write_planes(path, u.grid(), time, planes);
}

void write_snapshot(const std::filesystem::path& path, const TensorField& t, double time) {
  std::vector<std::span<const double>> planes;
  for (int i = 0; i < t.dim(); ++i)
    for (int j = 0; j < t.dim(); ++j) planes.push_back(t.entry(i, j));
  write_planes(path, t.grid(), time, planes);
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open snapshot: " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)),
                                   std::istreambuf_iterator<char>());
  constexpr std::size_t header = 6 + 4 + 4 + 8;
  if (bytes.size() < header || std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    throw DataError("bad snapshot magic: " + path.string());
  }
  Snapshot s;
  s.dim = static_cast<int>(get_le<std::uint32_t>(bytes.data() + 6));
  s.n = static_cast<int>(get_le<std::uint32_t>(bytes.data() + 10));
  s.time = get_le<double>(bytes.data() + 14);
  Grid grid = [&] {
    try {
      return Grid(s.dim, s.n);
    } catch (const ConfigError& e) {
      throw DataError("snapshot header invalid (" + std::string(e.what()) + "): " + path.string());
    }
  }();
  const std::size_t payload = bytes.size() - header;
  const std::size_t per_point = 8 * grid.size();
  if (payload % per_point != 0) throw DataError("truncated snapshot payload: " + path.string());
  s.components = static_cast<int>(payload / per_point);
  if (s.components != 1 && s.components != s.dim && s.components != s.dim * s.dim) {
    throw DataError("snapshot component count " + std::to_string(s.components) +
                    " is not 1, d or d*d: " + path.string());
  }
  s.data.resize(payload / 8);
  for (std::size_t i = 0; i < s.data.size(); ++i) s.data[i] = get_le<double>(bytes.data() + header + 8 * i);
  return s;
}

ScalarField to_scalar_field(const Snapshot& s) {
  if (s.components != 1) throw DataError("snapshot is not a scalar field");
  return ScalarField(Grid(s.dim, s.n), s.data);
}

VectorField to_vector_field(const Snapshot& s) {
  if (s.components != s.dim) throw DataError("snapshot is not a vector field");
  Grid grid(s.dim, s.n);
  VectorField u(grid);
  for (std::size_t p = 0; p < grid.size(); ++p)
    for (int c = 0; c < s.dim; ++c) u.component(c)[p] = s.data[p * s.dim + c];
  return u;
}

void write_series_csv(const std::filesystem::path& path, const std::vector<double>& t,
                      const std::vector<double>& values) {
  write_table_csv(path, {"t", "value"}, {t, values});
}

void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& names,
                     const std::vector<std::vector<double>>& columns) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open csv for writing: " + path.string());
  for (std::size_t c = 0; c < names.size(); ++c) os << (c ? "," : "") << names[c];
  os << '\n';
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  os << std::setprecision(17);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c][r];
    os << '\n';
  }
}

}  // namespace csnt
