#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "csnt/field.hpp"

namespace csnt {

/// Raw content of a snapshot file: "CSNT1\0", u32 dim, u32 n, f64 time, then
/// row-major f64 samples with the components of a point interleaved.
struct Snapshot {
  int dim = 0;
  int n = 0;
  double time = 0.0;
  int components = 0;
  std::vector<double> data;  // point-major, components interleaved
};

void write_snapshot(const std::filesystem::path& path, const ScalarField& f, double time);
void write_snapshot(const std::filesystem::path& path, const VectorField& u, double time);
void write_snapshot(const std::filesystem::path& path, const TensorField& t, double time);

/// Throws DataError on a bad magic, truncated payload or a payload whose size
/// is not 1, d or d*d samples per point.
Snapshot read_snapshot(const std::filesystem::path& path);

ScalarField to_scalar_field(const Snapshot& s);
VectorField to_vector_field(const Snapshot& s);

/// `t,value` rows with 17 significant digits.
void write_series_csv(const std::filesystem::path& path, const std::vector<double>& t,
                      const std::vector<double>& values);
/// `t,<name>,...` rows with 17 significant digits.
void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& names,
                     const std::vector<std::vector<double>>& columns);

}  // namespace csnt
