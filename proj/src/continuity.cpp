#include "csnt/continuity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "csnt/errors.hpp"
#include "csnt/fields.hpp"
#include "csnt/spectral.hpp"

namespace csnt {

namespace {

constexpr Complex kI{0.0, 1.0};

double int_power(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

// Fourier coefficients of -div(rho u) - delta rho^beta restricted to the band.
Spectrum rhs_hat(const Spectral& sp, const ScalarField& rho, const VectorField& u,
                 const RegularizationParams& params) {
  const std::size_t npts = rho.size();
  const int d = rho.grid().dim();
  Spectrum out(sp.modes(), Complex{});
  std::vector<double> work(npts);
  Spectrum tmp(sp.modes());
  const auto band = sp.band();
  for (int j = 0; j < d; ++j) {
    const auto uj = u.component(j);
    bool zero = true;
    for (std::size_t p = 0; p < npts; ++p) {
      work[p] = rho[p] * uj[p];
      zero = zero && work[p] == 0.0;
    }
    if (zero) continue;
    sp.forward(work, tmp);
    const auto k = sp.odd_wavenumber(j);
    for (std::size_t m = 0; m < sp.modes(); ++m) out[m] -= kI * k[m] * tmp[m];
  }
  if (params.delta > 0.0) {
    for (std::size_t p = 0; p < npts; ++p) work[p] = params.delta * int_power(rho[p], params.beta);
    sp.forward(work, tmp);
    for (std::size_t m = 0; m < sp.modes(); ++m) out[m] -= tmp[m];
  }
  for (std::size_t m = 0; m < sp.modes(); ++m)
    if (!band[m]) out[m] = Complex{};
  return out;
}

bool all_zero(const Spectrum& s) {
  return std::all_of(s.begin(), s.end(), [](const Complex& z) { return z == Complex{}; });
}

// rho + inverse(increment); exact copy when the increment vanishes.
ScalarField add_increment(const Spectral& sp, const ScalarField& rho, const Spectrum& inc) {
  ScalarField out = rho;
  if (all_zero(inc)) return out;
  const auto delta = sp.inverse(inc);
  for (std::size_t p = 0; p < out.size(); ++p) out[p] += delta[p];
  return out;
}

void require_state(const ScalarField& rho, const VectorField& u) {
  require_same_grid(rho.grid(), u.grid(), "continuity step");
  require_finite(rho, "continuity density");
  require_finite(u, "continuity velocity");
}

}  // namespace

void ContinuityStepper::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be a finite real > 0");
  if (!(cfl > 0.0 && cfl <= 0.5)) throw ConfigError("cfl must lie in (0, 0.5]");
  if (!(params.delta >= 0.0)) throw ConfigError("delta must be >= 0");
  if (params.beta < 0) throw ConfigError("beta must be >= 0");
}

void ContinuityStepper::check_cfl(const VectorField& u) const {
  const double umax = max_abs(u);
  const double limit = cfl * u.grid().spacing() / std::max(1.0, umax);
  if (dt > limit * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "CFLViolation: dt = " << dt << " exceeds cfl*h/max(1,|u|) = " << limit
       << " (|u|_inf = " << umax << ")";
    throw CflViolation(os.str());
  }
  if (scheme == Scheme::Explicit) {
    const double kmax = u.grid().n() / 2.0;
    const double k2max = u.grid().dim() * kmax * kmax;
    if (dt * params.delta * k2max > 2.0) {
      throw CflViolation("CFLViolation: explicit diffusion needs dt * delta * |xi|_max^2 <= 2");
    }
  }
}

void enforce_nonnegative(ScalarField& rho, ClampAudit* audit) {
  require_finite(rho, "density");
  const auto vals = rho.values();
  const auto [mn, mx] = std::minmax_element(vals.begin(), vals.end());
  if (*mn >= 0.0) return;
  const double slack = 1e-12 * std::max(*mx, 0.0);
  if (*mn < -slack) {
    const std::size_t idx = static_cast<std::size_t>(mn - vals.begin());
    const auto x = rho.grid().coords(idx);
    std::ostringstream os;
    os << "NegativeDensity: rho = " << *mn << " at point " << idx << " (x = " << x[0];
    for (int a = 1; a < rho.grid().dim(); ++a) os << ", " << x[a];
    os << ")";
    throw NegativeDensity(os.str());
  }
  int clamped = 0;
  const double most = *mn;
  for (auto& v : vals) {
    if (v < 0.0) {
      v = 0.0;
      ++clamped;
    }
  }
  if (audit) {
    ++audit->events;
    audit->points += clamped;
    audit->most_negative = std::min(audit->most_negative, most);
  }
}

ScalarField explicit_rhs(const ScalarField& rho, const VectorField& u,
                         const RegularizationParams& params) {
  require_state(rho, u);
  const auto sp = spectral_for(rho.grid());
  return ScalarField(rho.grid(), sp->inverse(rhs_hat(*sp, rho, u, params)));
}

ScalarField imex_predictor(const ScalarField& rho, const VectorField& u,
                           const ContinuityStepper& stepper) {
  require_state(rho, u);
  const auto sp = spectral_for(rho.grid());
  const double dt = stepper.dt, delta = stepper.params.delta;
  const Spectrum n_hat = rhs_hat(*sp, rho, u, stepper.params);
  Spectrum inc = n_hat;
  if (delta > 0.0) {
    const Spectrum r_hat = sp->forward(rho.values());
    const auto k2 = sp->k2();
    for (std::size_t m = 0; m < sp->modes(); ++m) {
      const double a = dt * delta * k2[m];
      inc[m] = (dt * n_hat[m] - a * r_hat[m]) / (1.0 + a);
    }
  } else {
    for (auto& z : inc) z *= dt;
  }
  return add_increment(*sp, rho, inc);
}

ScalarField imex_corrector(const ScalarField& rho, const VectorField& u_now,
                           const ScalarField& predictor, const VectorField& u_next,
                           const ContinuityStepper& stepper) {
  require_state(rho, u_now);
  require_state(predictor, u_next);
  const auto sp = spectral_for(rho.grid());
  const double dt = stepper.dt, delta = stepper.params.delta;
  const Spectrum n0 = rhs_hat(*sp, rho, u_now, stepper.params);
  const Spectrum n1 = rhs_hat(*sp, predictor, u_next, stepper.params);
  Spectrum inc(sp->modes());
  if (delta > 0.0) {
    const Spectrum r_hat = sp->forward(rho.values());
    const auto k2 = sp->k2();
    for (std::size_t m = 0; m < sp->modes(); ++m) {
      const double a = 0.5 * dt * delta * k2[m];
      inc[m] = (0.5 * dt * (n0[m] + n1[m]) - 2.0 * a * r_hat[m]) / (1.0 + a);
    }
  } else {
    for (std::size_t m = 0; m < sp->modes(); ++m) inc[m] = 0.5 * dt * (n0[m] + n1[m]);
  }
  return add_increment(*sp, rho, inc);
}

DensityState step(const DensityState& state, const VectorField& u_now, const VectorField& u_next,
                  const ContinuityStepper& stepper, ClampAudit* audit) {
  stepper.validate();
  require_state(state.rho, u_now);
  require_state(state.rho, u_next);
  stepper.check_cfl(u_now);
  stepper.check_cfl(u_next);
  DensityState next{state.rho, state.t + stepper.dt};
  if (stepper.scheme == ContinuityStepper::Scheme::Explicit) {
    const auto sp = spectral_for(state.rho.grid());
    Spectrum inc = rhs_hat(*sp, state.rho, u_now, stepper.params);
    if (stepper.params.delta > 0.0) {
      const Spectrum r_hat = sp->forward(state.rho.values());
      const auto k2 = sp->k2();
      for (std::size_t m = 0; m < sp->modes(); ++m)
        inc[m] -= stepper.params.delta * k2[m] * r_hat[m];
    }
    for (auto& z : inc) z *= stepper.dt;
    next.rho = add_increment(*sp, state.rho, inc);
  } else {
    ScalarField pred = imex_predictor(state.rho, u_now, stepper);
    enforce_nonnegative(pred, nullptr);
    next.rho = imex_corrector(state.rho, u_now, pred, u_next, stepper);
  }
  enforce_nonnegative(next.rho, audit);
  return next;
}

DensityState step(const DensityState& state, const VectorField& u, const ContinuityStepper& stepper,
                  ClampAudit* audit) {
  return step(state, u, u, stepper, audit);
}

ScalarField mollify_initial_density(const ScalarField& rho0, double floor) {
  require_finite(rho0, "initial density");
  const auto sp = spectral_for(rho0.grid());
  Spectrum r = sp->forward(rho0.values());
  const int cut = rho0.grid().n() / 4;
  for (int a = 0; a < rho0.grid().dim(); ++a) {
    const auto k = sp->wavenumber(a);
    for (std::size_t m = 0; m < sp->modes(); ++m)
      if (std::abs(k[m]) > cut) r[m] = Complex{};
  }
  ScalarField out(rho0.grid(), sp->inverse(r));
  const double mn = min_value(out);
  if (mn < floor) {
    for (auto& v : out.values()) v += floor - mn;
  }
  return out;
}

bool LpGrowthCertificate::holds(double rel_slack) const {
  for (std::size_t i = 0; i < measured.size(); ++i)
    if (measured[i] > bound[i] * (1.0 + rel_slack)) return false;
  return true;
}

ContinuityTrajectory solve_continuity(const ScalarField& rho0, const VelocityProvider& velocity,
                                      double T, const ContinuityStepper& stepper, double growth_p) {
  stepper.validate();
  if (!(T > 0.0)) throw ConfigError("T must be > 0");
  if (!(growth_p >= 1.0)) throw ConfigError("growth certificate exponent must be >= 1");
  require_finite(rho0, "initial density");
  if (min_value(rho0) < 0.0) throw NegativeDensity("initial density must be nonnegative");

  ContinuityTrajectory traj;
  traj.growth.p = growth_p;
  const double lp0 = lp_norm(rho0, growth_p);
  const double expo = (growth_p - 1.0) / growth_p;
  double w_int = 0.0;

  DensityState state{rho0, 0.0};
  VectorField u_now = velocity(0.0);
  double w_now = w1inf_norm(u_now);
  traj.states.push_back(state);
  traj.growth.times.push_back(0.0);
  traj.growth.measured.push_back(lp0);
  traj.growth.bound.push_back(lp0);

  const long steps = static_cast<long>(std::ceil(T / stepper.dt - 1e-9));
  for (long k = 0; k < steps; ++k) {
    ContinuityStepper st = stepper;
    st.dt = std::min(stepper.dt, T - state.t);
    if (k == steps - 1) st.dt = T - state.t;
    VectorField u_next = velocity(state.t + st.dt);
    state = step(state, u_now, u_next, st, &traj.audit);
    if (k == steps - 1) state.t = T;
    const double w_next = w1inf_norm(u_next);
    w_int += st.dt * std::max(w_now, w_next);
    traj.states.push_back(state);
    traj.growth.times.push_back(state.t);
    traj.growth.measured.push_back(lp_norm(state.rho, growth_p));
    traj.growth.bound.push_back(lp0 * std::exp(expo * w_int));
    u_now = std::move(u_next);
    w_now = w_next;
  }
  return traj;
}

double constant_state_decay(double rho0, double delta, int beta, double t) {
  if (delta == 0.0 || rho0 == 0.0) return rho0;
  const double e = 1.0 - beta;
  return std::pow(std::pow(rho0, e) + delta * (beta - 1) * t, 1.0 / e);
}

}  // namespace csnt
