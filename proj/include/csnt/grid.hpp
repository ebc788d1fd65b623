#pragma once

#include <array>
#include <cstddef>
#include <numbers>

namespace csnt {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Uniform periodic grid on the d-torus of side 2*pi.
///
/// Samples sit at x_j = j * spacing, j = 0..n-1 along every axis. Storage is
/// row-major with the last axis fastest.
class Grid {
 public:
  Grid(int dim, int n);

  int dim() const { return dim_; }
  int n() const { return n_; }
  double spacing() const { return kTwoPi / n_; }
  std::size_t size() const { return size_; }
  double cell_volume() const;
  /// |T^d| = (2 pi)^d
  double volume() const;

  /// Largest retained wavenumber under the 2/3 rule.
  int dealias_cutoff() const { return n_ / 3; }

  /// Multi-index of a flat point index (unused trailing entries are zero).
  std::array<int, 3> index(std::size_t flat) const;
  /// Physical coordinate of a flat point index.
  std::array<double, 3> coords(std::size_t flat) const;

  bool operator==(const Grid& other) const = default;

 private:
  int dim_;
  int n_;
  std::size_t size_;
};

}  // namespace csnt
