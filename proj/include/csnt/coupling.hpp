#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "csnt/constitutive.hpp"
#include "csnt/continuity.hpp"
#include "csnt/field.hpp"
#include "csnt/momentum.hpp"

namespace csnt {

struct FixedPointOptions {
  enum class Mode { PerStep, Global };

  Mode mode = Mode::PerStep;
  double tol = 1e-8;
  int max_iter = 50;
  /// Initial relaxation theta in (0, 1]; halved once when the residual grows.
  double relaxation = 1.0;

  void validate() const;
};

const char* to_string(FixedPointOptions::Mode mode);

struct CoupledConfig {
  ConstitutiveModel model = ConstitutiveModel::default_model(2.0);
  RegularizationParams params;
  Grid grid{2, 64};
  double dt = 1e-3;
  double T = 0.25;
  double cfl = 0.5;
  FixedPointOptions fixed_point;
  /// Momentum tolerance inside the coupled solve; well below fixed_point.tol
  /// so the fixed-point metric is not polluted by the inner solves.
  MomentumOptions momentum{1e-11, 500};
  /// Replace rho0 by its smoothed, floored version before marching.
  bool mollify_initial = false;

  void validate() const;
  ContinuityStepper stepper() const;
  /// t_k = k dt for k < K, with the last level exactly T.
  std::vector<double> time_grid() const;
};

/// Density and velocity at every time level plus scalar series.
struct TrajectoryState {
  std::vector<double> times;
  std::vector<ScalarField> rho;
  std::vector<VectorField> u;

  std::vector<double> energy;       // 1/(gamma-1) int rho^gamma, or int rho ln rho
  std::vector<double> mass;         // int rho
  std::vector<double> rho_min;
  std::vector<double> rho_max;
  std::vector<double> dissipation;  // see momentum dissipation()
  std::vector<double> grad_u_l2;
  std::vector<double> lap_m_u_l2;   // ||Lap^m u||_{L2}
  std::vector<double> rho_l2gamma;  // ||rho||_{L^{2 gamma}}

  std::size_t levels() const { return times.size(); }
  /// Checks strictly increasing times and matching snapshot counts.
  void validate() const;
};

/// 1/(gamma-1) int rho^gamma for gamma > 1, int rho ln rho for gamma = 1.
double internal_energy(const ScalarField& rho, double gamma);

/// Fills the scalar series of `traj` from its snapshots.
void compute_series(const CoupledConfig& config, TrajectoryState& traj);

/// max_k ||a_k - b_k||_{L^p}, the discrete C([0,T]; L^p) distance.
double trajectory_distance(const std::vector<ScalarField>& a, const std::vector<ScalarField>& b,
                           double p);
/// ||a - b||_{L^2((0,T) x T^d)} by the trapezoid rule in time.
double space_time_l2(const std::vector<double>& times, const std::vector<ScalarField>& a,
                     const std::vector<ScalarField>& b);

/// Velocity slaved to rho: minimizer of the momentum energy with datum rho^gamma.
/// Throws SolverError when the solve does not converge.
VectorField velocity_for(const CoupledConfig& config, const ScalarField& rho,
                         const VectorField* guess = nullptr, double t = 0.0);

/// Phi(rho_tilde): velocities from rho_tilde at every level, then the
/// continuity equation from rho0 driven by them. Output has the same levels.
std::vector<ScalarField> phi_map(const CoupledConfig& config, const ScalarField& rho0,
                                 const std::vector<ScalarField>& rho_tilde,
                                 std::vector<VectorField>* velocities = nullptr,
                                 const std::vector<VectorField>* guesses = nullptr);

struct FixedPointReport {
  TrajectoryState trajectory;
  std::vector<double> residuals;  // global: per Picard sweep; per-step: per time step
  int iterations = 0;
  bool converged = false;
  /// Set when the relaxation had to fall back to 1/2 or a residual increased.
  bool flagged = false;
  double relaxation_used = 1.0;
  ClampAudit audit;
};

/// Fixed point of Phi in the selected mode. Throws SolverError only for
/// failures inside a single solve; non-convergence is reported.
FixedPointReport solve_fixed_point(const CoupledConfig& config, const ScalarField& rho0);

/// Residuals of the discrete momentum and continuity equations at (rho, u),
/// each the max over levels of an L2 norm.
struct CoupledResiduals {
  double momentum = 0.0;
  double continuity = 0.0;
};
CoupledResiduals coupled_residuals(const CoupledConfig& config, const TrajectoryState& traj);

struct HomotopyPoint {
  double s = 0.0;
  double rho_norm = 0.0;     // max_t ||rho||_{L^{2 gamma}}
  double grad_u_norm = 0.0;  // max_t ||grad u||_{L2}
  double residual = 0.0;
  int iterations = 0;
};
/// Picard iteration of rho = s Phi(rho) for each s.
std::vector<HomotopyPoint> homotopy_probe(const CoupledConfig& config, const ScalarField& rho0,
                                          const std::vector<double>& s_values);

struct LipschitzProbe {
  double input_distance = 0.0;
  double output_distance = 0.0;
  double ratio = 0.0;
};
LipschitzProbe lipschitz_probe(const CoupledConfig& config, const ScalarField& rho0,
                               const std::vector<ScalarField>& rho_tilde1,
                               const std::vector<ScalarField>& rho_tilde2);

struct LadderRung {
  double delta = 0.0;
  double epsilon = 0.0;
  bool ok = false;
  std::string error;
  int iterations = 0;
  double eps_lap_m_u = 0.0;   // eps^{1/2} max_t ||Lap^m u||_{L2}
  double delta_grad_rho = 0.0;  // delta^{1/2} ||grad rho||_{L2((0,T) x T^d)}
  double rho_distance_next = std::numeric_limits<double>::quiet_NaN();
  double grad_u_distance_next = std::numeric_limits<double>::quiet_NaN();
};

struct LadderReport {
  std::vector<LadderRung> rungs;
  std::vector<TrajectoryState> trajectories;  // empty entries for failed rungs
};

/// One fixed-point solve per (delta_i, epsilon_i); distances are between
/// consecutive rungs in L2((0,T) x T^d).
LadderReport regularization_ladder(const CoupledConfig& base, const ScalarField& rho0,
                                   const std::vector<double>& deltas,
                                   const std::vector<double>& epsilons);

void write_series_csv(const std::filesystem::path& path, const TrajectoryState& traj);
void write_ladder_csv(const std::filesystem::path& path, const LadderReport& report);

}  // namespace csnt
