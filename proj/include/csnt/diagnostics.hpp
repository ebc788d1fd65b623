#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "csnt/constitutive.hpp"
#include "csnt/coupling.hpp"
#include "csnt/field.hpp"

namespace csnt {

// ---------------------------------------------------------------------------
// Energy balance

/// Per-step trapezoid residual of
///   dE/dt + D(u) + delta gamma/(gamma-1) int rho^(gamma+beta-1)
///         + delta gamma int rho^(gamma-2) |grad rho|^2 = 0
/// (for gamma = 1 the delta terms are delta int (ln rho + 1) rho^beta and
/// delta int |grad rho|^2 / rho), together with the magnitude of the
/// dissipative terms used to normalize it.
struct BalanceSeries {
  std::vector<double> t;         // midpoints of the steps
  std::vector<double> residual;  // absolute residual per step
  std::vector<double> scale;     // |dE/dt| + dissipation terms at the step
  double max_relative() const;
};

/// Dissipation rate Q(rho, u) appearing in the balance above.
double energy_dissipation_rate(const ConstitutiveModel& model, const RegularizationParams& params,
                               const ScalarField& rho, const VectorField& u);

BalanceSeries energy_balance(const TrajectoryState& traj, const ConstitutiveModel& model,
                             const RegularizationParams& params);

// ---------------------------------------------------------------------------
// Effective viscous flux

/// G = (2 + lambda(|div u|)) div u - rho^gamma, pointwise.
ScalarField effective_viscous_flux(const VectorField& u, const ScalarField& rho,
                                   const ConstitutiveModel& model);

/// Zero-mean G from the stress alone: the multiplier -xi_i xi_j / |xi|^2
/// applied to the dealiased mu0(|Du|)Du, plus eps Lap^(2m-1) div u when the
/// biharmonic regularization is active (eps = 0 drops the term).
ScalarField cz_flux(const VectorField& u, const ConstitutiveModel& model,
                    const RegularizationParams& params = {0.0, 0.0, 2, 4});

// ---------------------------------------------------------------------------
// BMO

/// Shifted dyadic cube families on the torus. Cubes have side n / 2^j grid
/// cells for j = 0..max_depth and every side keeps at least 4 points.
class DyadicCubeSet {
 public:
  /// `shift_count` lattices are used, offset by 0, n/3, 2n/3, n/5 cells
  /// along every axis (at most 4).
  DyadicCubeSet(const Grid& grid, int max_depth, int shift_count);
  /// max_depth = log2(n) - 2, 2 shifts.
  static DyadicCubeSet standard(const Grid& grid, int shift_count = 2);

  const Grid& grid() const { return grid_; }
  int max_depth() const { return max_depth_; }
  int shift_count() const { return static_cast<int>(shifts_.size()); }
  const std::vector<int>& shifts() const { return shifts_; }
  std::size_t cube_count() const;

 private:
  Grid grid_;
  int max_depth_;
  std::vector<int> shifts_;
};

struct CubeOscillation {
  int depth;
  int shift;
  std::array<int, 3> corner;  // grid index of the lower corner (wraps around)
  int side;                   // in grid cells
  double oscillation;
};

/// Dyadic-BMO lower bound: max over the cube set of the mean oscillation
/// (1/|Q|) int_Q |f - {f}_Q|. Optionally returns every cube's value.
double bmo_norm(const ScalarField& f, const DyadicCubeSet& cubes,
                std::vector<CubeOscillation>* dump = nullptr);

void write_cube_dump_csv(const std::filesystem::path& path, const std::vector<CubeOscillation>& dump);

// ---------------------------------------------------------------------------
// Logarithmic inequality

struct LogInequalityTerms {
  double lhs = 0.0;     // |int f g|
  double bmo = 0.0;
  double g_l1 = 0.0;
  double g_lq = 0.0;
  double bracket = 0.0; // |ln|g|_1| + ln(e + |g|_q) + (1 + |ln|g|_1|)|g|_q^((q-2)/2)
  double ratio = 0.0;   // lhs / (bmo |g|_1 bracket), 0 when |g|_1 = 0
};

LogInequalityTerms log_inequality_terms(const ScalarField& f, const ScalarField& g, double q,
                                        const DyadicCubeSet& cubes);
double log_inequality_ratio(const ScalarField& f, const ScalarField& g, double q,
                            const DyadicCubeSet& cubes);

/// The three standard families on grid `grid` (f mean-zero against constant
/// g; f = cos x1 against (1 + cos x1)^s; a shrinking family with
/// |g_k|_1 = 2^-k, k = 0..20) and their ratios.
struct LogFamilyResult {
  std::string family;
  double parameter;
  LogInequalityTerms terms;
};
std::vector<LogFamilyResult> log_inequality_families(const Grid& grid, double q = 4.0);

// ---------------------------------------------------------------------------
// Truncations

/// T_k(z) = z for z <= k, k + 1 for z >= k + 2 (k >= 2) joined by a C^2
/// quintic with 0 <= T_k' <= 1. For 1 <= k < 2 the profile is min(z, k + 1).
class TruncationOperator {
 public:
  explicit TruncationOperator(double k);

  double k() const { return k_; }
  double value(double z) const;
  double derivative(double z) const;
  /// P_k(rho) = rho int_0^rho T_k(z)^p / z^2 dz
  double pk(double rho, double p) const;
  /// P_k'(rho) = int_0^rho T_k^p / z^2 + T_k(rho)^p / rho
  double pk_derivative(double rho, double p) const;

 private:
  // int_0^r T_k(z)^p / z^2 dz
  double integral(double r, double p) const;
  double k_;
  double top_;  // start of the constant part
};

ScalarField truncation_apply(const TruncationOperator& op, const ScalarField& rho);
ScalarField pk_apply(const TruncationOperator& op, double p, const ScalarField& rho);

/// Per-step residual of
///   d/dt int P_k(rho) + delta int (rho^beta P_k'(rho) + P_k''(rho) |grad rho|^2)
///     + int T_k(rho)^p div u = 0.
BalanceSeries renormalized_identity_residual(const TrajectoryState& traj,
                                             const TruncationOperator& op, double p,
                                             const RegularizationParams& params);

// ---------------------------------------------------------------------------
// Pressure estimate

struct BogovskiiReport {
  double theta = 0.0;
  double div_psi_residual = 0.0;  // max over levels, max-norm
  double lhs = 0.0;               // int_0^T int rho^(gamma+theta)
  double bound = 0.0;             // time integral of the absolute right-hand terms
  double identity_residual = 0.0; // max over levels, relative
  double constant() const { return bound > 0.0 ? lhs / bound : 0.0; }
};

/// psi = grad Lap^-1 (rho^theta - {rho^theta}), so div psi = rho^theta - {rho^theta}.
VectorField bogovskii_field(const ScalarField& rho, double theta);

BogovskiiReport bogovskii_pressure_test(const TrajectoryState& traj, const ConstitutiveModel& model,
                                        const RegularizationParams& params, double theta);

// ---------------------------------------------------------------------------
// Gronwall comparison

struct GronwallResult {
  bool pass = false;
  double max_excess = 0.0;  // max_t (y - z_eta) at the smallest eta
  std::vector<double> etas;
  std::vector<double> envelope_at_T;
};

/// z(t) from z' = C z (|ln z| + 1), z(0) = eta, at the given times.
std::vector<double> gronwall_envelope(const std::vector<double>& t, double C, double eta);

/// Compares y against the envelopes for eta = 10^-2, 10^-4, ..., 10^-16 and
/// the zero solution; PASS when y <= z_eta + tol for every eta on the ladder.
GronwallResult gronwall_compare(const std::vector<double>& t, const std::vector<double>& y,
                                double C, double tol = 1e-8);

}  // namespace csnt
