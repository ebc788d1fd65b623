#pragma once

#include <functional>
#include <vector>

#include "csnt/constitutive.hpp"
#include "csnt/field.hpp"

namespace csnt {

/// Time integrator for rho_t + div(rho u) + delta rho^beta = delta Lap rho.
///
/// `Imex` is a second-order Crank-Nicolson/Heun splitting: diffusion is
/// implicit through the Fourier multiplier, advection and the penalty are
/// explicit with a Heun corrector. `Explicit` is forward Euler on all terms
/// and needs dt delta |xi|_max^2 <= 2 in addition to the advective limit.
struct ContinuityStepper {
  enum class Scheme { Imex, Explicit };

  RegularizationParams params;
  double dt = 1e-3;
  Scheme scheme = Scheme::Imex;
  double cfl = 0.5;

  /// Checks dt > 0 and 0 < cfl <= 0.5.
  void validate() const;
  /// Throws CflViolation unless dt <= cfl h / max(1, ||u||_inf).
  void check_cfl(const VectorField& u) const;
};

struct DensityState {
  ScalarField rho;
  double t = 0.0;
};

/// Counts states whose round-off negativity was clamped to zero.
struct ClampAudit {
  int events = 0;
  int points = 0;
  double most_negative = 0.0;
};

/// One step with the velocity frozen over [t, t + dt].
DensityState step(const DensityState& state, const VectorField& u, const ContinuityStepper& stepper,
                  ClampAudit* audit = nullptr);

/// One step with u_now at t and u_next at t + dt (second-order coupling).
DensityState step(const DensityState& state, const VectorField& u_now, const VectorField& u_next,
                  const ContinuityStepper& stepper, ClampAudit* audit = nullptr);

/// Predictor of the Imex scheme, only depends on data at t.
ScalarField imex_predictor(const ScalarField& rho, const VectorField& u,
                           const ContinuityStepper& stepper);
/// Corrector of the Imex scheme given the predictor and the velocity at t + dt.
ScalarField imex_corrector(const ScalarField& rho, const VectorField& u_now,
                           const ScalarField& predictor, const VectorField& u_next,
                           const ContinuityStepper& stepper);

/// Applies the nonnegativity policy in place: entries >= -1e-12 max rho are
/// clamped to zero and audited, anything below throws NegativeDensity.
void enforce_nonnegative(ScalarField& rho, ClampAudit* audit);

/// -div(rho u) - delta rho^beta, dealiased, as a physical field.
ScalarField explicit_rhs(const ScalarField& rho, const VectorField& u,
                         const RegularizationParams& params);

/// Smooth positive initial density: keeps the modes with |k_a| <= n/4 and
/// shifts the result up so that min >= floor.
ScalarField mollify_initial_density(const ScalarField& rho0, double floor);

using VelocityProvider = std::function<VectorField(double t)>;

/// ||rho(t)||_{L^p} against ||rho0||_{L^p} exp((p-1)/p int_0^t ||u||_{W1,inf}).
struct LpGrowthCertificate {
  double p = 4.0;
  std::vector<double> times;
  std::vector<double> measured;
  std::vector<double> bound;

  bool holds(double rel_slack = 1e-12) const;
};

struct ContinuityTrajectory {
  std::vector<DensityState> states;
  ClampAudit audit;
  LpGrowthCertificate growth;
};

/// Marches from rho0 to T on the stepper's grid t_k = k dt (the last step is
/// shortened to land on T). The velocity is sampled at every time level.
ContinuityTrajectory solve_continuity(const ScalarField& rho0, const VelocityProvider& velocity,
                                      double T, const ContinuityStepper& stepper,
                                      double growth_p = 4.0);

/// Exact solution of rho' = -delta rho^beta from a constant state.
double constant_state_decay(double rho0, double delta, int beta, double t);

}  // namespace csnt
