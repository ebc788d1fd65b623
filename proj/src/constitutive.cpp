#include "csnt/constitutive.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "csnt/errors.hpp"

namespace csnt {

namespace {

void require_gamma(double gamma) {
  if (!(gamma >= 1.0) || !std::isfinite(gamma)) {
    throw ConfigError("gamma must be a finite real >= 1");
  }
}

void require_nonnegative(double z, const char* what) {
  if (!(z >= 0.0)) {
    std::ostringstream os;
    os << what << ": argument must be >= 0, got " << z;
    throw ConfigError(os.str());
  }
}

}  // namespace

ConstitutiveModel ConstitutiveModel::rational(double tau, double a, double gamma) {
  require_gamma(gamma);
  if (!(tau > 0.0)) throw ConfigError("rational model: tau must be > 0");
  if (!(a > 0.0)) throw ConfigError("rational model: a must be > 0 (singular models are not supported)");
  ConstitutiveModel m;
  m.kind_ = Kind::Rational;
  m.tau_ = tau;
  m.a_ = a;
  m.gamma_ = gamma;
  m.bound_ = tau;
  return m;
}

ConstitutiveModel ConstitutiveModel::herschel_bulkley(double tau, double threshold, double gamma,
                                                      double flow_index) {
  require_gamma(gamma);
  if (!(tau > 0.0)) throw ConfigError("herschel_bulkley model: tau must be > 0");
  if (!(threshold > 0.0)) throw ConfigError("herschel_bulkley model: hb_threshold must be > 0");
  if (flow_index != 1.0) {
    throw ConfigError("herschel_bulkley model: only flow index n = 1 satisfies mu0(z) <= C/z");
  }
  ConstitutiveModel m;
  m.kind_ = Kind::HerschelBulkley;
  m.tau_ = tau;
  m.threshold_ = threshold;
  m.gamma_ = gamma;
  m.bound_ = tau;
  return m;
}

ConstitutiveModel ConstitutiveModel::custom(std::function<double(double)> mu0,
                                            std::function<double(double)> lambda, double bound,
                                            double gamma) {
  require_gamma(gamma);
  if (!(bound > 0.0)) throw ConfigError("custom model: bound constant must be > 0");
  ConstitutiveModel m;
  m.kind_ = Kind::Custom;
  m.gamma_ = gamma;
  m.bound_ = bound;
  m.mu0_custom_ = std::move(mu0);
  m.lambda_custom_ = std::move(lambda);
  // Certify the envelope and the scalar monotonicity on a log grid.
  double prev_mu = 0.0, prev_la = 0.0;
  for (int i = 0; i <= 240; ++i) {
    const double z = std::pow(10.0, -6.0 + 12.0 * i / 240.0);
    const double mz = m.mu0_custom_(z), lz = m.lambda_custom_(z);
    if (!(mz >= 0.0) || !(lz >= 0.0) || z * mz > bound * (1 + 1e-12) || z * lz > bound * (1 + 1e-12)) {
      throw ConfigError("custom model violates 0 <= mu0, lambda <= C/z");
    }
    if (z * mz < prev_mu * (1 - 1e-12) || z * lz < prev_la * (1 - 1e-12)) {
      throw ConfigError("custom model: z*mu0(z) and z*lambda(z) must be nondecreasing");
    }
    prev_mu = z * mz;
    prev_la = z * lz;
  }
  return m;
}

std::string ConstitutiveModel::name() const {
  switch (kind_) {
    case Kind::Rational: return "rational";
    case Kind::HerschelBulkley: return "herschel_bulkley";
    case Kind::Custom: return "custom";
  }
  return "unknown";
}

double ConstitutiveModel::mu0(double z) const {
  require_nonnegative(z, "mu0");
  switch (kind_) {
    case Kind::Rational: return tau_ / (a_ + z);
    case Kind::HerschelBulkley: return tau_ / std::max(z, threshold_);
    case Kind::Custom: return mu0_custom_(z);
  }
  return 0.0;
}

double ConstitutiveModel::lambda(double z) const {
  require_nonnegative(z, "lambda");
  switch (kind_) {
    case Kind::Rational: return tau_ / (a_ + z);
    case Kind::HerschelBulkley: return tau_ / std::max(z, threshold_);
    case Kind::Custom: return lambda_custom_(z);
  }
  return 0.0;
}

double ConstitutiveModel::shear_potential(const std::function<double(double)>& visc,
                                          double r) const {
  switch (kind_) {
    case Kind::Rational:
      // int_0^r tau s / (a + s) ds
      return tau_ * (r - a_ * std::log1p(r / a_));
    case Kind::HerschelBulkley:
      if (r <= threshold_) return 0.5 * tau_ * r * r / threshold_;
      return 0.5 * tau_ * threshold_ + tau_ * (r - threshold_);
    case Kind::Custom:
      break;
  }
  if (r == 0.0) return 0.0;
  auto integrand = [&](double s) { return visc(s) * s; };
  double err = 0.0;
  const double val =
      boost::math::quadrature::gauss_kronrod<double, 21>::integrate(integrand, 0.0, r, 30, 1e-13, &err);
  if (err > 1e-10) throw SolverError("potential quadrature did not reach 1e-10 absolute tolerance");
  return val;
}

double ConstitutiveModel::potential_F(double r) const {
  require_nonnegative(r, "potential_F");
  return shear_potential(mu0_custom_, r);
}

double ConstitutiveModel::potential_Lambda(double s) const {
  const double r = std::abs(s);
  return 0.5 * s * s + shear_potential(lambda_custom_, r);
}

double ConstitutiveModel::pressure(double rho) const {
  require_nonnegative(rho, "pressure");
  if (gamma_ == 1.0) return rho;
  if (gamma_ == 2.0) return rho * rho;
  return std::pow(rho, gamma_);
}

double SmallMatrix::frobenius() const {
  double s = 0.0;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) s += a[i][j] * a[i][j];
  return std::sqrt(s);
}

double mu0_eval(const ConstitutiveModel& model, double z) { return model.mu0(z); }

double lambda_eval(const ConstitutiveModel& model, double z) { return model.lambda(z); }

TensorField stress(const ConstitutiveModel& model, const TensorField& d) {
  require_finite(d, "stress");
  const int dim = d.dim();
  TensorField out(d.grid());
  for (std::size_t p = 0; p < d.grid().size(); ++p) {
    double norm2 = 0.0;
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) norm2 += d.entry(i, j)[p] * d.entry(i, j)[p];
    const double mu = model.mu0(std::sqrt(norm2));
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) out.entry(i, j)[p] = mu * d.entry(i, j)[p];
  }
  return out;
}

SmallMatrix stress(const ConstitutiveModel& model, const SmallMatrix& b) {
  SmallMatrix out;
  out.dim = b.dim;
  const double mu = model.mu0(b.frobenius());
  for (int i = 0; i < b.dim; ++i)
    for (int j = 0; j < b.dim; ++j) out.a[i][j] = mu * b.a[i][j];
  return out;
}

double potential_F(const ConstitutiveModel& model, const SmallMatrix& b) {
  return model.potential_F(b.frobenius());
}

ScalarField pressure(const ConstitutiveModel& model, const ScalarField& rho) {
  require_finite(rho, "pressure");
  const auto it = std::min_element(rho.values().begin(), rho.values().end());
  if (*it < 0.0) {
    const std::size_t idx = static_cast<std::size_t>(it - rho.values().begin());
    const auto x = rho.grid().coords(idx);
    std::ostringstream os;
    os << "pressure: negative density " << *it << " at point " << idx << " (x = " << x[0];
    for (int a = 1; a < rho.grid().dim(); ++a) os << ", " << x[a];
    os << ")";
    throw NegativeDensity(os.str());
  }
  ScalarField out(rho.grid());
  for (std::size_t p = 0; p < rho.size(); ++p) out[p] = model.pressure(rho[p]);
  return out;
}

double monotonicity_gap(const ConstitutiveModel& model, const SmallMatrix& b1,
                        const SmallMatrix& b2) {
  if (b1.dim != b2.dim) throw DataError("monotonicity_gap: dimension mismatch");
  const SmallMatrix s1 = stress(model, b1);
  const SmallMatrix s2 = stress(model, b2);
  double g = 0.0;
  for (int i = 0; i < b1.dim; ++i)
    for (int j = 0; j < b1.dim; ++j) g += (s1.a[i][j] - s2.a[i][j]) * (b1.a[i][j] - b2.a[i][j]);
  return g;
}

int RegularizationParams::minimal_beta(double gamma) {
  int b = static_cast<int>(std::ceil(std::max(gamma + 1.0, 4.0)));
  if (b % 2 != 0) ++b;
  return b;
}

void RegularizationParams::validate(double gamma, int dim) const {
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw ConfigError("delta must be a finite real >= 0");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be a finite real >= 0");
  if (m < 1) throw ConfigError("m must be a positive integer");
  if (beta % 2 != 0 || beta < std::max(gamma + 1.0, 4.0)) {
    throw ConfigError("beta must be an even integer >= max(gamma + 1, 4)");
  }
  if (epsilon > 0.0 && !(2.0 * m - 1.0 > dim / 2.0)) {
    throw ConfigError("m too small: need 2m - 1 > d/2 when epsilon > 0");
  }
}

}  // namespace csnt
