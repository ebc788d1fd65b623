#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "csnt/constitutive.hpp"
#include "csnt/field.hpp"

namespace csnt {

/// Datum and coefficients of the regularized elliptic momentum equation
///
///   -div(mu0(|Du|)Du) - Lap u - grad((1 + lambda(|div u|)) div u)
///       + eps Lap^{2m} u + grad rho^gamma = f,   {u} = 0.
///
/// `forcing` is an optional body force used for manufactured solutions; the
/// coupled system always has f = 0.
struct MomentumProblem {
  ConstitutiveModel model;
  RegularizationParams params;
  ScalarField rho_gamma;
  std::optional<VectorField> forcing;
};

struct MomentumOptions {
  double tol = 1e-9;
  int max_iter = 500;
};

enum class SolveStatus { Converged, MaxIterExceeded, LineSearchStalled };

const char* to_string(SolveStatus s);

/// Norms reported with every solve so the a priori bounds can be tracked.
struct MomentumCertificate {
  double grad_l2 = 0.0;          // ||grad u||_{L2}
  double eps_lap_m_l2 = 0.0;     // sqrt(eps) ||Lap^m u||_{L2}
  double w1inf = 0.0;            // ||u||_{W1,inf}; NaN when eps = 0
  double datum_l2 = 0.0;         // ||rho^gamma||_{L2}
};

struct MomentumIterate {
  int iter;
  double energy;
  double residual;
};

struct MomentumSolution {
  VectorField u;
  double residual_norm = 0.0;
  double energy_value = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::Converged;
  MomentumCertificate certificate;
  std::vector<MomentumIterate> history;

  bool converged() const { return status == SolveStatus::Converged; }
};

/// I[v] = int F(Dv) + |grad v|^2/2 + Lambda(div v) + eps/2 |Lap^m v|^2
///            - rho^gamma div v - f.v dx
double energy(const MomentumProblem& problem, const VectorField& v);

/// Euler-Lagrange residual G(v) restricted to the mean-free modes of the 2/3
/// band, the space the solver works in. For band-limited v and w,
/// d/dh I[v + h w] at h = 0 equals inner(G(v), w).
VectorField energy_gradient(const MomentumProblem& problem, const VectorField& v);

/// Minimizes I by preconditioned nonlinear conjugate gradients (Polak-Ribiere+,
/// strong Wolfe line search). The preconditioner is the Fourier multiplier
/// 1/(|xi|^2 + eps |xi|^{4m}); residual_norm is the dual norm
/// sqrt(<G, P G>), which bounds the L2 distance to the minimizer.
///
/// Throws NonFiniteError when the energy or residual stops being finite.
MomentumSolution solve_momentum(const MomentumProblem& problem, const MomentumOptions& options = {},
                                const VectorField* initial_guess = nullptr);

/// int mu0(|Du|)|Du|^2 + |grad u|^2 + (1 + lambda(|div u|))(div u)^2 + eps |Lap^m u|^2 dx
double dissipation(const ConstitutiveModel& model, const RegularizationParams& params,
                   const VectorField& u);

/// Component-wise projection onto mean-free modes of the 2/3 band.
VectorField project_solver_space(const VectorField& u);

/// `iter,energy,residual` rows, 17 significant digits.
void write_history_csv(const std::filesystem::path& path, const MomentumSolution& solution);

}  // namespace csnt
