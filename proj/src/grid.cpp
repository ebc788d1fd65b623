#include "csnt/grid.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "csnt/errors.hpp"

namespace csnt {

Grid::Grid(int dim, int n) : dim_(dim), n_(n), size_(1) {
  if (dim < 1 || dim > 3) {
    throw ConfigError("grid dimension must be 1, 2 or 3, got " + std::to_string(dim));
  }
  if (n < 8 || (n & (n - 1)) != 0) {
    throw ConfigError("points per axis must be a power of two >= 8, got " + std::to_string(n));
  }
  for (int i = 0; i < dim; ++i) {
    if (size_ > std::numeric_limits<std::size_t>::max() / static_cast<std::size_t>(n)) {
      throw ConfigError("grid point count overflows the index range");
    }
    size_ *= static_cast<std::size_t>(n);
  }
}

double Grid::cell_volume() const { return std::pow(spacing(), dim_); }

double Grid::volume() const { return std::pow(kTwoPi, dim_); }

std::array<int, 3> Grid::index(std::size_t flat) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int a = dim_ - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % static_cast<std::size_t>(n_));
    flat /= static_cast<std::size_t>(n_);
  }
  return idx;
}

std::array<double, 3> Grid::coords(std::size_t flat) const {
  const auto idx = index(flat);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) x[a] = idx[a] * spacing();
  return x;
}

}  // namespace csnt
