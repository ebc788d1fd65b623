#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "csnt/grid.hpp"

namespace csnt {

/// Real samples of a scalar quantity on a Grid (rho, rho^gamma, div u, ...).
class ScalarField {
 public:
  explicit ScalarField(const Grid& grid, double fill = 0.0);
  ScalarField(const Grid& grid, std::vector<double> values);

  /// Samples f(x) at every grid point; x has dim() valid entries.
  static ScalarField sample(const Grid& grid,
                            const std::function<double(const std::array<double, 3>&)>& f);

  const Grid& grid() const { return grid_; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(double s);

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// d-component field; components are stored as separate planes.
class VectorField {
 public:
  explicit VectorField(const Grid& grid, double fill = 0.0);

  static VectorField sample(
      const Grid& grid,
      const std::function<std::array<double, 3>(const std::array<double, 3>&)>& f);

  const Grid& grid() const { return grid_; }
  int components() const { return grid_.dim(); }
  std::span<double> component(int i) { return comps_[i]; }
  std::span<const double> component(int i) const { return comps_[i]; }
  ScalarField component_field(int i) const;
  void set_component(int i, const ScalarField& f);

  VectorField& operator+=(const VectorField& other);
  VectorField& operator-=(const VectorField& other);
  VectorField& operator*=(double s);

 private:
  Grid grid_;
  std::vector<std::vector<double>> comps_;
};

/// d x d field stored as d*d planes, entry (i, j) at plane i*d + j.
class TensorField {
 public:
  explicit TensorField(const Grid& grid, double fill = 0.0);

  const Grid& grid() const { return grid_; }
  int dim() const { return grid_.dim(); }
  std::span<double> entry(int i, int j) { return comps_[i * grid_.dim() + j]; }
  std::span<const double> entry(int i, int j) const { return comps_[i * grid_.dim() + j]; }

 private:
  Grid grid_;
  std::vector<std::vector<double>> comps_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);
VectorField operator+(VectorField a, const VectorField& b);
VectorField operator-(VectorField a, const VectorField& b);
VectorField operator*(double s, VectorField a);

/// Throws NonFiniteError naming `context` when any sample is NaN or Inf.
void require_finite(const ScalarField& f, std::string_view context);
void require_finite(const VectorField& u, std::string_view context);
void require_finite(const TensorField& t, std::string_view context);
void require_same_grid(const Grid& a, const Grid& b, std::string_view context);

double max_abs(const ScalarField& f);
double max_abs(const VectorField& u);
double min_value(const ScalarField& f);
double max_value(const ScalarField& f);

}  // namespace csnt
