#include "csnt/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "csnt/errors.hpp"
#include "csnt/fields.hpp"
#include "csnt/parallel.hpp"

namespace csnt {

namespace {

ScalarField datum(const ConstitutiveModel& model, const ScalarField& rho) {
  return pressure(model, rho);
}

double gamma_norm_exponent(const CoupledConfig& c) { return 2.0 * c.model.gamma(); }

}  // namespace

const char* to_string(FixedPointOptions::Mode mode) {
  return mode == FixedPointOptions::Mode::Global ? "global" : "per_step";
}

void FixedPointOptions::validate() const {
  if (!(tol > 0.0)) throw ConfigError("fixed_point.tol must be > 0");
  if (max_iter < 1) throw ConfigError("fixed_point.max_iter must be >= 1");
  if (!(relaxation > 0.0 && relaxation <= 1.0)) {
    throw ConfigError("fixed_point.relaxation must lie in (0, 1]");
  }
}

void CoupledConfig::validate() const {
  params.validate(model.gamma(), grid.dim());
  fixed_point.validate();
  stepper().validate();
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("T must be a finite real > 0");
  if (!(momentum.tol > 0.0)) throw ConfigError("momentum.tol must be > 0");
  if (momentum.max_iter < 1) throw ConfigError("momentum.max_iter must be >= 1");
}

ContinuityStepper CoupledConfig::stepper() const {
  ContinuityStepper s;
  s.params = params;
  s.dt = dt;
  s.cfl = cfl;
  return s;
}

std::vector<double> CoupledConfig::time_grid() const {
  const long steps = static_cast<long>(std::ceil(T / dt - 1e-9));
  std::vector<double> t(steps + 1);
  for (long k = 0; k < steps; ++k) t[k] = k * dt;
  t[steps] = T;
  return t;
}

void TrajectoryState::validate() const {
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) throw DataError("trajectory times are not strictly increasing");
  }
  if (rho.size() != times.size() || (!u.empty() && u.size() != times.size())) {
    throw DataError("trajectory snapshot counts do not match its time grid");
  }
}

double internal_energy(const ScalarField& rho, double gamma) {
  double s = 0.0;
  if (gamma == 1.0) {
    for (double r : rho.values()) s += r > 0.0 ? r * std::log(r) : 0.0;
  } else {
    for (double r : rho.values()) s += std::pow(r, gamma);
    s /= gamma - 1.0;
  }
  return s * rho.grid().cell_volume();
}

void compute_series(const CoupledConfig& config, TrajectoryState& traj) {
  traj.validate();
  const std::size_t n = traj.levels();
  traj.energy.assign(n, 0.0);
  traj.mass.assign(n, 0.0);
  traj.rho_min.assign(n, 0.0);
  traj.rho_max.assign(n, 0.0);
  traj.rho_l2gamma.assign(n, 0.0);
  traj.dissipation.assign(n, 0.0);
  traj.grad_u_l2.assign(n, 0.0);
  traj.lap_m_u_l2.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& r = traj.rho[k];
    traj.energy[k] = internal_energy(r, config.model.gamma());
    traj.mass[k] = integrate(r);
    traj.rho_min[k] = min_value(r);
    traj.rho_max[k] = max_value(r);
    traj.rho_l2gamma[k] = lp_norm(r, gamma_norm_exponent(config));
    if (!traj.u.empty()) {
      const auto& u = traj.u[k];
      traj.dissipation[k] = dissipation(config.model, config.params, u);
      traj.grad_u_l2[k] = lp_norm(jacobian(u), 2.0);
      traj.lap_m_u_l2[k] = lp_norm(laplacian_power(u, config.params.m), 2.0);
    }
  }
}

double trajectory_distance(const std::vector<ScalarField>& a, const std::vector<ScalarField>& b,
                           double p) {
  if (a.size() != b.size()) throw DataError("trajectory_distance: level counts differ");
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, lp_norm(a[k] - b[k], p));
  return d;
}

double space_time_l2(const std::vector<double>& times, const std::vector<ScalarField>& a,
                     const std::vector<ScalarField>& b) {
  if (a.size() != b.size() || a.size() != times.size()) {
    throw DataError("space_time_l2: level counts differ");
  }
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    const double n0 = lp_norm(a[k] - b[k], 2.0), n1 = lp_norm(a[k + 1] - b[k + 1], 2.0);
    s += 0.5 * (times[k + 1] - times[k]) * (n0 * n0 + n1 * n1);
  }
  return std::sqrt(s);
}

VectorField velocity_for(const CoupledConfig& config, const ScalarField& rho,
                         const VectorField* guess, double t) {
  MomentumProblem pb{config.model, config.params, datum(config.model, rho), std::nullopt};
  const MomentumSolution sol = solve_momentum(pb, config.momentum, guess);
  // A stalled line search at round-off level is accepted.
  const bool ok = sol.converged() || (sol.status == SolveStatus::LineSearchStalled &&
                                      sol.residual_norm <= 100.0 * config.momentum.tol);
  if (!ok) {
    std::ostringstream os;
    os << "momentum solve at t = " << t << " ended with " << to_string(sol.status)
       << " (residual " << sol.residual_norm << ")";
    throw SolverError(os.str());
  }
  return sol.u;
}

std::vector<ScalarField> phi_map(const CoupledConfig& config, const ScalarField& rho0,
                                 const std::vector<ScalarField>& rho_tilde,
                                 std::vector<VectorField>* velocities,
                                 const std::vector<VectorField>* guesses) {
  const auto times = config.time_grid();
  if (rho_tilde.size() != times.size()) throw DataError("phi_map: rho_tilde has the wrong level count");
  for (std::size_t k = 0; k < rho_tilde.size(); ++k) {
    if (min_value(rho_tilde[k]) < 0.0) {
      throw NegativeDensity("phi_map: rho_tilde is negative at t = " + std::to_string(times[k]));
    }
  }
  auto guess = [&](std::size_t k) -> const VectorField* {
    return guesses && k < guesses->size() ? &(*guesses)[k] : nullptr;
  };
  std::vector<ScalarField> out;
  out.reserve(times.size());
  std::vector<VectorField> us;
  us.reserve(times.size());
  if (guesses && guesses->size() == times.size()) {
    // levels are independent once every level has its own warm start
    std::vector<std::optional<VectorField>> solved(times.size());
    parallel_for(times.size(), [&](std::size_t k) {
      solved[k] = velocity_for(config, rho_tilde[k], &(*guesses)[k], times[k]);
    });
    for (auto& v : solved) us.push_back(std::move(*v));
  } else {
    us.push_back(velocity_for(config, rho_tilde[0], guess(0), times[0]));
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
      const VectorField* g = guess(k + 1) ? guess(k + 1) : &us.back();
      us.push_back(velocity_for(config, rho_tilde[k + 1], g, times[k + 1]));
    }
  }
  DensityState state{rho0, 0.0};
  out.push_back(rho0);
  ContinuityStepper st = config.stepper();
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    st.dt = times[k + 1] - times[k];
    try {
      state = step(state, us[k], us[k + 1], st);
    } catch (const SolverError& e) {
      throw SolverError(std::string(e.what()) + " [t = " + std::to_string(times[k + 1]) + "]");
    }
    out.push_back(state.rho);
  }
  if (velocities) *velocities = std::move(us);
  return out;
}

namespace {

FixedPointReport solve_per_step(const CoupledConfig& config, const ScalarField& rho0) {
  FixedPointReport rep;
  const auto times = config.time_grid();
  const double p = gamma_norm_exponent(config);
  const double inner_tol = 1e-3 * config.fixed_point.tol;
  auto& traj = rep.trajectory;
  traj.times = times;
  traj.rho.push_back(rho0);
  traj.u.push_back(velocity_for(config, rho0, nullptr, 0.0));
  ContinuityStepper st = config.stepper();
  rep.converged = true;
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    st.dt = times[k + 1] - times[k];
    const ScalarField& rho_n = traj.rho[k];
    const VectorField& u_n = traj.u[k];
    st.check_cfl(u_n);
    ScalarField pred = imex_predictor(rho_n, u_n, st);
    enforce_nonnegative(pred, nullptr);
    ScalarField rho_next = pred;
    VectorField u_next = u_n;
    double diff = 0.0;
    bool inner_ok = false;
    int it = 0;
    for (; it < config.fixed_point.max_iter; ++it) {
      u_next = velocity_for(config, rho_next, &u_next, times[k + 1]);
      st.check_cfl(u_next);
      ScalarField cand = imex_corrector(rho_n, u_n, pred, u_next, st);
      enforce_nonnegative(cand, &rep.audit);
      diff = lp_norm(cand - rho_next, p);
      rho_next = std::move(cand);
      if (diff < inner_tol) {
        inner_ok = true;
        ++it;
        break;
      }
    }
    u_next = velocity_for(config, rho_next, &u_next, times[k + 1]);
    rep.iterations = std::max(rep.iterations, it);
    rep.residuals.push_back(diff);
    rep.converged = rep.converged && inner_ok;
    traj.rho.push_back(std::move(rho_next));
    traj.u.push_back(std::move(u_next));
  }
  rep.relaxation_used = 1.0;
  return rep;
}

FixedPointReport solve_global(const CoupledConfig& config, const ScalarField& rho0) {
  FixedPointReport rep;
  const auto times = config.time_grid();
  const double p = gamma_norm_exponent(config);
  std::vector<ScalarField> rho(times.size(), rho0);
  std::vector<VectorField> us;
  double theta = config.fixed_point.relaxation;
  for (int k = 0; k < config.fixed_point.max_iter; ++k) {
    std::vector<VectorField> new_us;
    const auto phi = phi_map(config, rho0, rho, &new_us, us.empty() ? nullptr : &us);
    us = std::move(new_us);
    double r = 0.0;
    for (std::size_t l = 0; l < rho.size(); ++l) {
      ScalarField next = rho[l];
      if (theta == 1.0) {
        next = phi[l];
      } else {
        for (std::size_t q = 0; q < next.size(); ++q)
          next[q] = (1.0 - theta) * rho[l][q] + theta * phi[l][q];
      }
      r = std::max(r, lp_norm(next - rho[l], p));
      rho[l] = std::move(next);
    }
    rep.residuals.push_back(r);
    rep.iterations = k + 1;
    if (rep.residuals.size() >= 2 && r > rep.residuals[rep.residuals.size() - 2]) {
      rep.flagged = true;
      if (theta > 0.5) theta = 0.5;
    }
    if (r < config.fixed_point.tol) {
      rep.converged = true;
      break;
    }
  }
  rep.relaxation_used = theta;
  auto& traj = rep.trajectory;
  traj.times = times;
  for (std::size_t l = 0; l < rho.size(); ++l) {
    traj.u.push_back(velocity_for(config, rho[l], &us[l], times[l]));
  }
  traj.rho = std::move(rho);
  return rep;
}

}  // namespace

FixedPointReport solve_fixed_point(const CoupledConfig& config, const ScalarField& rho0) {
  config.validate();
  require_same_grid(config.grid, rho0.grid(), "solve_fixed_point");
  require_finite(rho0, "initial density");
  if (min_value(rho0) < 0.0) throw NegativeDensity("initial density must be nonnegative");
  const ScalarField start =
      config.mollify_initial ? mollify_initial_density(rho0, config.params.delta) : rho0;
  FixedPointReport rep = config.fixed_point.mode == FixedPointOptions::Mode::Global
                             ? solve_global(config, start)
                             : solve_per_step(config, start);
  compute_series(config, rep.trajectory);
  return rep;
}

CoupledResiduals coupled_residuals(const CoupledConfig& config, const TrajectoryState& traj) {
  traj.validate();
  CoupledResiduals res;
  ContinuityStepper st = config.stepper();
  for (std::size_t k = 0; k < traj.levels(); ++k) {
    MomentumProblem pb{config.model, config.params, datum(config.model, traj.rho[k]), std::nullopt};
    res.momentum = std::max(res.momentum, lp_norm(energy_gradient(pb, traj.u[k]), 2.0));
    if (k + 1 < traj.levels()) {
      st.dt = traj.times[k + 1] - traj.times[k];
      const DensityState next = step({traj.rho[k], traj.times[k]}, traj.u[k], traj.u[k + 1], st);
      res.continuity = std::max(res.continuity, lp_norm(next.rho - traj.rho[k + 1], 2.0));
    }
  }
  return res;
}

std::vector<HomotopyPoint> homotopy_probe(const CoupledConfig& config, const ScalarField& rho0,
                                          const std::vector<double>& s_values) {
  config.validate();
  const auto times = config.time_grid();
  const double p = gamma_norm_exponent(config);
  std::vector<HomotopyPoint> out;
  for (double s : s_values) {
    if (!(s >= 0.0 && s <= 1.0)) throw ConfigError("homotopy parameter must lie in [0, 1]");
    HomotopyPoint pt;
    pt.s = s;
    std::vector<ScalarField> rho(times.size(), rho0);
    std::vector<VectorField> us;
    for (int k = 0; k < config.fixed_point.max_iter; ++k) {
      std::vector<VectorField> new_us;
      auto phi = phi_map(config, rho0, rho, &new_us, us.empty() ? nullptr : &us);
      us = std::move(new_us);
      for (auto& f : phi) f *= s;
      pt.residual = trajectory_distance(phi, rho, p);
      rho = std::move(phi);
      pt.iterations = k + 1;
      if (pt.residual < config.fixed_point.tol) break;
    }
    for (std::size_t l = 0; l < rho.size(); ++l) {
      pt.rho_norm = std::max(pt.rho_norm, lp_norm(rho[l], p));
      pt.grad_u_norm = std::max(pt.grad_u_norm, lp_norm(jacobian(us[l]), 2.0));
    }
    out.push_back(pt);
  }
  return out;
}

LipschitzProbe lipschitz_probe(const CoupledConfig& config, const ScalarField& rho0,
                               const std::vector<ScalarField>& rho_tilde1,
                               const std::vector<ScalarField>& rho_tilde2) {
  config.validate();
  const double p = gamma_norm_exponent(config);
  LipschitzProbe probe;
  probe.input_distance = trajectory_distance(rho_tilde1, rho_tilde2, p);
  const auto phi1 = phi_map(config, rho0, rho_tilde1);
  const auto phi2 = phi_map(config, rho0, rho_tilde2);
  probe.output_distance = trajectory_distance(phi1, phi2, p);
  probe.ratio = probe.input_distance > 0.0 ? probe.output_distance / probe.input_distance : 0.0;
  return probe;
}

LadderReport regularization_ladder(const CoupledConfig& base, const ScalarField& rho0,
                                   const std::vector<double>& deltas,
                                   const std::vector<double>& epsilons) {
  if (deltas.size() != epsilons.size() || deltas.empty()) {
    throw ConfigError("ladder: delta and epsilon lists must be nonempty and of equal length");
  }
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 0.0) || !(epsilons[i] > 0.0)) throw ConfigError("ladder rungs must be positive");
    if (i > 0 && (deltas[i] > deltas[i - 1] || epsilons[i] > epsilons[i - 1])) {
      throw ConfigError("ladder rungs must be descending");
    }
  }
  LadderReport rep;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    CoupledConfig cfg = base;
    cfg.params.delta = deltas[i];
    cfg.params.epsilon = epsilons[i];
    LadderRung rung;
    rung.delta = deltas[i];
    rung.epsilon = epsilons[i];
    TrajectoryState traj;
    try {
      FixedPointReport fp = solve_fixed_point(cfg, rho0);
      rung.ok = fp.converged;
      rung.iterations = fp.iterations;
      if (!fp.converged) rung.error = "fixed point did not converge";
      traj = std::move(fp.trajectory);
      double lap = 0.0, grad2 = 0.0;
      for (std::size_t k = 0; k < traj.levels(); ++k) lap = std::max(lap, traj.lap_m_u_l2[k]);
      for (std::size_t k = 0; k + 1 < traj.levels(); ++k) {
        const double g0 = lp_norm(gradient(traj.rho[k]), 2.0);
        const double g1 = lp_norm(gradient(traj.rho[k + 1]), 2.0);
        grad2 += 0.5 * (traj.times[k + 1] - traj.times[k]) * (g0 * g0 + g1 * g1);
      }
      rung.eps_lap_m_u = std::sqrt(cfg.params.epsilon) * lap;
      rung.delta_grad_rho = std::sqrt(cfg.params.delta * grad2);
    } catch (const Error& e) {
      rung.ok = false;
      rung.error = e.what();
    }
    rep.rungs.push_back(rung);
    rep.trajectories.push_back(std::move(traj));
  }
  for (std::size_t i = 0; i + 1 < rep.rungs.size(); ++i) {
    const auto& a = rep.trajectories[i];
    const auto& b = rep.trajectories[i + 1];
    if (a.levels() == 0 || b.levels() == 0) continue;
    rep.rungs[i].rho_distance_next = space_time_l2(a.times, a.rho, b.rho);
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < a.levels(); ++k) {
      auto gd = [&](std::size_t l) {
        const double v = lp_norm(jacobian(a.u[l] - b.u[l]), 2.0);
        return v * v;
      };
      s += 0.5 * (a.times[k + 1] - a.times[k]) * (gd(k) + gd(k + 1));
    }
    rep.rungs[i].grad_u_distance_next = std::sqrt(s);
  }
  return rep;
}

void write_series_csv(const std::filesystem::path& path, const TrajectoryState& traj) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open csv for writing: " + path.string());
  os << "t,energy,mass,rho_min,rho_max,rho_l2gamma,dissipation,grad_u_l2,lap_m_u_l2\n"
     << std::setprecision(17);
  for (std::size_t k = 0; k < traj.levels(); ++k) {
    os << traj.times[k] << ',' << traj.energy[k] << ',' << traj.mass[k] << ',' << traj.rho_min[k]
       << ',' << traj.rho_max[k] << ',' << traj.rho_l2gamma[k] << ',' << traj.dissipation[k] << ','
       << traj.grad_u_l2[k] << ',' << traj.lap_m_u_l2[k] << '\n';
  }
}

void write_ladder_csv(const std::filesystem::path& path, const LadderReport& report) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open csv for writing: " + path.string());
  os << "rung,delta,epsilon,ok,iterations,eps_lap_m_u,delta_grad_rho,rho_distance_next,"
        "grad_u_distance_next,error\n"
     << std::setprecision(17);
  for (std::size_t i = 0; i < report.rungs.size(); ++i) {
    const auto& r = report.rungs[i];
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    os << i << ',' << r.delta << ',' << r.epsilon << ',' << (r.ok ? 1 : 0) << ',' << r.iterations
       << ',' << r.eps_lap_m_u << ',' << r.delta_grad_rho << ',' << r.rho_distance_next << ','
       << r.grad_u_distance_next << ',' << err << '\n';
  }
}

}  // namespace csnt
