#include "csnt/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "csnt/errors.hpp"

namespace csnt {

namespace {

constexpr Complex kI{0.0, 1.0};

Spectrum derivative(const Spectral& sp, const Spectrum& f, int axis) {
  Spectrum out(sp.modes());
  const auto k = sp.odd_wavenumber(axis);
  for (std::size_t m = 0; m < sp.modes(); ++m) out[m] = kI * k[m] * f[m];
  return out;
}

}  // namespace

VectorField gradient(const ScalarField& f) {
  require_finite(f, "gradient");
  const auto sp = spectral_for(f.grid());
  const auto fh = sp->forward(f.values());
  VectorField out(f.grid());
  for (int a = 0; a < f.grid().dim(); ++a) sp->inverse(derivative(*sp, fh, a), out.component(a));
  return out;
}

TensorField jacobian(const VectorField& u) {
  require_finite(u, "jacobian");
  const auto sp = spectral_for(u.grid());
  const int d = u.grid().dim();
  TensorField out(u.grid());
  for (int i = 0; i < d; ++i) {
    const auto uh = sp->forward(u.component(i));
    for (int j = 0; j < d; ++j) sp->inverse(derivative(*sp, uh, j), out.entry(i, j));
  }
  return out;
}

TensorField symmetric_gradient(const VectorField& u) {
  const TensorField jac = jacobian(u);
  const int d = u.grid().dim();
  TensorField out(u.grid());
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      auto a = jac.entry(i, j);
      auto b = jac.entry(j, i);
      auto oij = out.entry(i, j);
      auto oji = out.entry(j, i);
      for (std::size_t p = 0; p < a.size(); ++p) {
        const double s = 0.5 * (a[p] + b[p]);
        oij[p] = s;
        oji[p] = s;
      }
    }
  }
  return out;
}

ScalarField divergence(const VectorField& u) {
  require_finite(u, "divergence");
  const auto sp = spectral_for(u.grid());
  Spectrum acc(sp->modes(), Complex{});
  for (int a = 0; a < u.grid().dim(); ++a) {
    const auto uh = sp->forward(u.component(a));
    const auto k = sp->odd_wavenumber(a);
    for (std::size_t m = 0; m < sp->modes(); ++m) acc[m] += kI * k[m] * uh[m];
  }
  return ScalarField(u.grid(), sp->inverse(acc));
}

VectorField divergence_tensor(const TensorField& s) {
  require_finite(s, "divergence_tensor");
  const auto sp = spectral_for(s.grid());
  const int d = s.grid().dim();
  VectorField out(s.grid());
  for (int i = 0; i < d; ++i) {
    Spectrum acc(sp->modes(), Complex{});
    for (int j = 0; j < d; ++j) {
      const auto sh = sp->forward(s.entry(i, j));
      const auto k = sp->odd_wavenumber(j);
      for (std::size_t m = 0; m < sp->modes(); ++m) acc[m] += kI * k[m] * sh[m];
    }
    sp->inverse(acc, out.component(i));
  }
  return out;
}

ScalarField laplacian_power(const ScalarField& f, int k) {
  if (k < 1) throw ConfigError("laplacian_power: exponent must be >= 1");
  require_finite(f, "laplacian_power");
  const auto sp = spectral_for(f.grid());
  auto fh = sp->forward(f.values());
  const auto k2 = sp->k2();
  for (std::size_t m = 0; m < sp->modes(); ++m) fh[m] *= std::pow(-k2[m], k);
  return ScalarField(f.grid(), sp->inverse(fh));
}

VectorField laplacian_power(const VectorField& u, int k) {
  VectorField out(u.grid());
  for (int c = 0; c < u.components(); ++c) {
    out.set_component(c, laplacian_power(u.component_field(c), k));
  }
  return out;
}

ScalarField inverse_laplacian_zero_mean(const ScalarField& f) {
  require_finite(f, "inverse_laplacian_zero_mean");
  const auto sp = spectral_for(f.grid());
  auto fh = sp->forward(f.values());
  const auto k2 = sp->k2();
  for (std::size_t m = 0; m < sp->modes(); ++m) fh[m] = (k2[m] == 0.0) ? Complex{} : -fh[m] / k2[m];
  return ScalarField(f.grid(), sp->inverse(fh));
}

double mean(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s / static_cast<double>(f.size());
}

ScalarField subtract_mean(const ScalarField& f) {
  ScalarField out = f;
  const double m = mean(f);
  for (auto& v : out.values()) v -= m;
  return out;
}

VectorField project_zero_mean(const VectorField& u) {
  VectorField out = u;
  for (int c = 0; c < u.components(); ++c) {
    double s = 0.0;
    for (double v : u.component(c)) s += v;
    s /= static_cast<double>(u.grid().size());
    for (auto& v : out.component(c)) v -= s;
  }
  return out;
}

ScalarField dealias(const ScalarField& f) {
  const auto sp = spectral_for(f.grid());
  auto fh = sp->forward(f.values());
  const auto band = sp->band();
  for (std::size_t m = 0; m < sp->modes(); ++m)
    if (!band[m]) fh[m] = Complex{};
  return ScalarField(f.grid(), sp->inverse(fh));
}

VectorField dealias(const VectorField& u) {
  VectorField out(u.grid());
  for (int c = 0; c < u.components(); ++c) out.set_component(c, dealias(u.component_field(c)));
  return out;
}

namespace {

double lp_of_pointwise(const Grid& grid, double p, const std::vector<double>& mag) {
  if (!(p >= 1.0)) throw ConfigError("lp_norm: p must be >= 1");
  if (std::isinf(p)) return mag.empty() ? 0.0 : *std::max_element(mag.begin(), mag.end());
  // Scale by the maximum so large p does not overflow.
  const double scale = *std::max_element(mag.begin(), mag.end());
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (double v : mag) s += std::pow(v / scale, p);
  return scale * std::pow(s * grid.cell_volume(), 1.0 / p);
}

}  // namespace

double lp_norm(const ScalarField& f, double p) {
  std::vector<double> mag(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) mag[i] = std::abs(f[i]);
  return lp_of_pointwise(f.grid(), p, mag);
}

double lp_norm(const VectorField& u, double p) {
  std::vector<double> mag(u.grid().size(), 0.0);
  for (int c = 0; c < u.components(); ++c)
    for (std::size_t i = 0; i < mag.size(); ++i) mag[i] += u.component(c)[i] * u.component(c)[i];
  for (auto& v : mag) v = std::sqrt(v);
  return lp_of_pointwise(u.grid(), p, mag);
}

double lp_norm(const TensorField& t, double p) {
  std::vector<double> mag(t.grid().size(), 0.0);
  for (int i = 0; i < t.dim(); ++i)
    for (int j = 0; j < t.dim(); ++j)
      for (std::size_t q = 0; q < mag.size(); ++q) mag[q] += t.entry(i, j)[q] * t.entry(i, j)[q];
  for (auto& v : mag) v = std::sqrt(v);
  return lp_of_pointwise(t.grid(), p, mag);
}

double integrate(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * f.grid().cell_volume();
}

double inner(const ScalarField& f, const ScalarField& g) {
  require_same_grid(f.grid(), g.grid(), "inner");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i];
  return s * f.grid().cell_volume();
}

double inner(const VectorField& u, const VectorField& v) {
  require_same_grid(u.grid(), v.grid(), "inner");
  double s = 0.0;
  for (int c = 0; c < u.components(); ++c)
    for (std::size_t i = 0; i < u.grid().size(); ++i) s += u.component(c)[i] * v.component(c)[i];
  return s * u.grid().cell_volume();
}

double w1inf_norm(const VectorField& u) {
  const TensorField jac = jacobian(u);
  double grad_max = 0.0;
  for (std::size_t p = 0; p < u.grid().size(); ++p) {
    double s = 0.0;
    for (int i = 0; i < u.components(); ++i)
      for (int j = 0; j < u.components(); ++j) s += std::abs(jac.entry(i, j)[p]);
    grad_max = std::max(grad_max, s);
  }
  return max_abs(u) + grad_max;
}

ScalarField trace(const TensorField& t) {
  ScalarField out(t.grid());
  for (int i = 0; i < t.dim(); ++i) {
    auto e = t.entry(i, i);
    for (std::size_t p = 0; p < e.size(); ++p) out[p] += e[p];
  }
  return out;
}

}  // namespace csnt
