#pragma once

#include <functional>
#include <string>

#include "csnt/field.hpp"

namespace csnt {

/// Viscosity laws mu0, lambda with their convex potentials and the pressure
/// law p(rho) = rho^gamma. The Newtonian coefficient mu1 is fixed to 1.
///
/// Built-in families:
///  - rational:          mu0(z) = lambda(z) = tau / (a + z), a > 0
///  - herschel_bulkley:  mu0(z) = lambda(z) = tau / max(z, threshold), i.e. the
///                       yield part of the n = 1 law continued by its value at
///                       the threshold; the constant k part is carried by mu1.
///  - custom:            user functions, potentials by adaptive quadrature.
class ConstitutiveModel {
 public:
  enum class Kind { Rational, HerschelBulkley, Custom };

  static ConstitutiveModel rational(double tau, double a, double gamma);
  /// Only the flow index n = 1 is admissible: for n > 1 the k|Du|^(n-1) part
  /// breaks mu0(z) <= C/z.
  static ConstitutiveModel herschel_bulkley(double tau, double threshold, double gamma,
                                            double flow_index = 1.0);
  /// `bound` is the constant C with mu0(z), lambda(z) <= C / z.
  static ConstitutiveModel custom(std::function<double(double)> mu0,
                                  std::function<double(double)> lambda, double bound,
                                  double gamma);
  /// Default model used throughout: rational with tau = a = 1.
  static ConstitutiveModel default_model(double gamma) { return rational(1.0, 1.0, gamma); }

  Kind kind() const { return kind_; }
  std::string name() const;
  double tau() const { return tau_; }
  double a() const { return a_; }
  double threshold() const { return threshold_; }
  double gamma() const { return gamma_; }
  double bound_constant() const { return bound_; }
  static constexpr double mu1 = 1.0;

  /// z >= 0, throws ConfigError for negative z.
  double mu0(double z) const;
  double lambda(double z) const;
  /// Phi(r) = int_0^r mu0(s) s ds, so F(B) = Phi(|B|).
  double potential_F(double r) const;
  /// Lambda(s) = s^2/2 + int_0^|s| lambda(t) t dt.
  double potential_Lambda(double s) const;
  /// rho^gamma for rho >= 0.
  double pressure(double rho) const;

 private:
  ConstitutiveModel() = default;
  double shear_potential(const std::function<double(double)>& visc, double r) const;

  Kind kind_ = Kind::Rational;
  double tau_ = 1.0;
  double a_ = 1.0;
  double threshold_ = 0.0;
  double gamma_ = 1.0;
  double bound_ = 1.0;
  std::function<double(double)> mu0_custom_;
  std::function<double(double)> lambda_custom_;
};

/// A small dense symmetric matrix for pointwise constitutive checks.
struct SmallMatrix {
  int dim = 0;
  double a[3][3] = {};

  double frobenius() const;
};

double mu0_eval(const ConstitutiveModel& model, double z);
double lambda_eval(const ConstitutiveModel& model, double z);

/// Pointwise mu0(|D|) D with |D| the Frobenius norm.
TensorField stress(const ConstitutiveModel& model, const TensorField& d);
SmallMatrix stress(const ConstitutiveModel& model, const SmallMatrix& b);

/// F(B) for a matrix argument.
double potential_F(const ConstitutiveModel& model, const SmallMatrix& b);

/// Pointwise rho^gamma; throws NegativeDensity naming the minimum location.
ScalarField pressure(const ConstitutiveModel& model, const ScalarField& rho);

/// (mu0(|B1|)B1 - mu0(|B2|)B2) : (B1 - B2)
double monotonicity_gap(const ConstitutiveModel& model, const SmallMatrix& b1,
                        const SmallMatrix& b2);

/// Regularization parameters of the approximate system.
struct RegularizationParams {
  double delta = 1e-3;
  double epsilon = 1e-4;
  int m = 2;
  int beta = 4;

  /// Checks beta >= max(gamma + 1, 4) and even, m >= 1, and 2m - 1 > d/2
  /// whenever epsilon > 0. delta = 0 and epsilon = 0 are accepted as the
  /// formal limits.
  void validate(double gamma, int dim) const;
  /// Smallest admissible even beta for a given gamma.
  static int minimal_beta(double gamma);
};

}  // namespace csnt
