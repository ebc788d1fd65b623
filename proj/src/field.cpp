#include "csnt/field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "csnt/errors.hpp"

namespace csnt {

ScalarField::ScalarField(const Grid& grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

ScalarField::ScalarField(const Grid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw DataError("scalar field has " + std::to_string(values_.size()) + " samples, grid has " +
                    std::to_string(grid_.size()));
  }
}

ScalarField ScalarField::sample(const Grid& grid,
                                const std::function<double(const std::array<double, 3>&)>& f) {
  ScalarField out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) out.values_[i] = f(grid.coords(i));
  return out;
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  require_same_grid(grid_, other.grid_, "scalar +=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  require_same_grid(grid_, other.grid_, "scalar -=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (auto& v : values_) v *= s;
  return *this;
}

VectorField::VectorField(const Grid& grid, double fill)
    : grid_(grid), comps_(grid.dim(), std::vector<double>(grid.size(), fill)) {}

VectorField VectorField::sample(
    const Grid& grid,
    const std::function<std::array<double, 3>(const std::array<double, 3>&)>& f) {
  VectorField out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto v = f(grid.coords(i));
    for (int c = 0; c < grid.dim(); ++c) out.comps_[c][i] = v[c];
  }
  return out;
}

ScalarField VectorField::component_field(int i) const { return ScalarField(grid_, comps_[i]); }

void VectorField::set_component(int i, const ScalarField& f) {
  require_same_grid(grid_, f.grid(), "set_component");
  std::copy(f.values().begin(), f.values().end(), comps_[i].begin());
}

VectorField& VectorField::operator+=(const VectorField& other) {
  require_same_grid(grid_, other.grid_, "vector +=");
  for (std::size_t c = 0; c < comps_.size(); ++c)
    for (std::size_t i = 0; i < comps_[c].size(); ++i) comps_[c][i] += other.comps_[c][i];
  return *this;
}

VectorField& VectorField::operator-=(const VectorField& other) {
  require_same_grid(grid_, other.grid_, "vector -=");
  for (std::size_t c = 0; c < comps_.size(); ++c)
    for (std::size_t i = 0; i < comps_[c].size(); ++i) comps_[c][i] -= other.comps_[c][i];
  return *this;
}

VectorField& VectorField::operator*=(double s) {
  for (auto& c : comps_)
    for (auto& v : c) v *= s;
  return *this;
}

TensorField::TensorField(const Grid& grid, double fill)
    : grid_(grid), comps_(grid.dim() * grid.dim(), std::vector<double>(grid.size(), fill)) {}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }
VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
VectorField operator*(double s, VectorField a) { return a *= s; }

namespace {

void check_span(std::span<const double> v, std::string_view context) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw NonFiniteError(std::string(context) + ": non-finite sample at index " +
                           std::to_string(i));
    }
  }
}

}  // namespace

void require_finite(const ScalarField& f, std::string_view context) { check_span(f.values(), context); }

void require_finite(const VectorField& u, std::string_view context) {
  for (int c = 0; c < u.components(); ++c) check_span(u.component(c), context);
}

void require_finite(const TensorField& t, std::string_view context) {
  for (int i = 0; i < t.dim(); ++i)
    for (int j = 0; j < t.dim(); ++j) check_span(t.entry(i, j), context);
}

void require_same_grid(const Grid& a, const Grid& b, std::string_view context) {
  if (!(a == b)) {
    throw DataError(std::string(context) + ": fields live on different grids");
  }
}

double max_abs(const ScalarField& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs(const VectorField& u) {
  double m = 0.0;
  for (std::size_t i = 0; i < u.grid().size(); ++i) {
    double s = 0.0;
    for (int c = 0; c < u.components(); ++c) s += u.component(c)[i] * u.component(c)[i];
    m = std::max(m, std::sqrt(s));
  }
  return m;
}

double min_value(const ScalarField& f) { return *std::min_element(f.values().begin(), f.values().end()); }

double max_value(const ScalarField& f) { return *std::max_element(f.values().begin(), f.values().end()); }

}  // namespace csnt
