#include "csnt/diagnostics.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>

#include "csnt/errors.hpp"
#include "csnt/fields.hpp"
#include "csnt/spectral.hpp"

namespace csnt {

namespace {

double int_power(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

ScalarField pointwise(const ScalarField& f, const std::function<double(double)>& g) {
  ScalarField out(f.grid());
  for (std::size_t p = 0; p < f.size(); ++p) out[p] = g(f[p]);
  return out;
}

double grad_sq_weighted(const ScalarField& rho, const std::function<double(double)>& w) {
  const VectorField g = gradient(rho);
  double s = 0.0;
  for (std::size_t p = 0; p < rho.size(); ++p) {
    double g2 = 0.0;
    for (int c = 0; c < g.components(); ++c) g2 += g.component(c)[p] * g.component(c)[p];
    s += w(rho[p]) * g2;
  }
  return s * rho.grid().cell_volume();
}

BalanceSeries trapezoid_balance(const std::vector<double>& t, const std::vector<double>& e,
                                const std::vector<double>& q) {
  BalanceSeries out;
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    const double dt = t[k + 1] - t[k];
    const double dedt = (e[k + 1] - e[k]) / dt;
    const double qbar = 0.5 * (q[k] + q[k + 1]);
    out.t.push_back(0.5 * (t[k] + t[k + 1]));
    out.residual.push_back(std::abs(dedt + qbar));
    out.scale.push_back(std::abs(dedt) + 0.5 * (std::abs(q[k]) + std::abs(q[k + 1])));
  }
  return out;
}

void require_trajectory(const TrajectoryState& traj) {
  traj.validate();
  if (traj.u.size() != traj.levels()) throw DataError("diagnostic needs velocity snapshots at every level");
}

}  // namespace

double BalanceSeries::max_relative() const {
  double r = 0.0, s = 0.0;
  for (std::size_t k = 0; k < residual.size(); ++k) {
    r = std::max(r, residual[k]);
    s = std::max(s, scale[k]);
  }
  return s > 0.0 ? r / s : r;
}

double energy_dissipation_rate(const ConstitutiveModel& model, const RegularizationParams& params,
                               const ScalarField& rho, const VectorField& u) {
  const double g = model.gamma();
  double q = dissipation(model, params, u);
  if (params.delta == 0.0) return q;
  const double dv = rho.grid().cell_volume();
  double penalty = 0.0;
  if (g == 1.0) {
    for (double r : rho.values())
      penalty += r > 0.0 ? (std::log(r) + 1.0) * int_power(r, params.beta) : 0.0;
    q += params.delta * penalty * dv;
    q += params.delta * grad_sq_weighted(rho, [](double r) { return r > 0.0 ? 1.0 / r : 0.0; });
  } else {
    for (double r : rho.values()) penalty += std::pow(r, g + params.beta - 1.0);
    q += params.delta * g / (g - 1.0) * penalty * dv;
    q += params.delta * g *
         grad_sq_weighted(rho, [g](double r) { return r > 0.0 ? std::pow(r, g - 2.0) : 0.0; });
  }
  return q;
}

BalanceSeries energy_balance(const TrajectoryState& traj, const ConstitutiveModel& model,
                             const RegularizationParams& params) {
  require_trajectory(traj);
  std::vector<double> e(traj.levels()), q(traj.levels());
  for (std::size_t k = 0; k < traj.levels(); ++k) {
    e[k] = internal_energy(traj.rho[k], model.gamma());
    q[k] = energy_dissipation_rate(model, params, traj.rho[k], traj.u[k]);
  }
  return trapezoid_balance(traj.times, e, q);
}

ScalarField effective_viscous_flux(const VectorField& u, const ScalarField& rho,
                                   const ConstitutiveModel& model) {
  require_same_grid(u.grid(), rho.grid(), "effective_viscous_flux");
  const ScalarField div = divergence(u);
  const ScalarField p = pressure(model, rho);
  ScalarField g(u.grid());
  for (std::size_t i = 0; i < g.size(); ++i)
    g[i] = (2.0 + model.lambda(std::abs(div[i]))) * div[i] - p[i];
  return g;
}

ScalarField cz_flux(const VectorField& u, const ConstitutiveModel& model,
                    const RegularizationParams& params) {
  require_finite(u, "cz_flux");
  const Grid& grid = u.grid();
  const int d = grid.dim();
  const auto sp = spectral_for(grid);
  const TensorField s = stress(model, symmetric_gradient(u));
  const auto k2 = sp->k2();
  const auto band = sp->band();
  Spectrum g(sp->modes(), Complex{});
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const Spectrum sh = sp->forward(s.entry(i, j));
      const auto ki = sp->odd_wavenumber(i);
      const auto kj = sp->odd_wavenumber(j);
      for (std::size_t m = 0; m < sp->modes(); ++m)
        if (band[m] && k2[m] > 0.0) g[m] -= ki[m] * kj[m] / k2[m] * sh[m];
    }
  }
  if (params.epsilon > 0.0) {
    const Spectrum dh = sp->forward(divergence(u).values());
    const int e = 2 * params.m - 1;
    for (std::size_t m = 0; m < sp->modes(); ++m)
      if (band[m] && k2[m] > 0.0) g[m] += params.epsilon * std::pow(-k2[m], e) * dh[m];
  }
  return ScalarField(grid, sp->inverse(g));
}

// ---------------------------------------------------------------------------

DyadicCubeSet::DyadicCubeSet(const Grid& grid, int max_depth, int shift_count)
    : grid_(grid), max_depth_(max_depth) {
  const int limit = static_cast<int>(std::log2(grid.n())) - 2;
  if (max_depth < 0 || max_depth > limit) {
    throw ConfigError("dyadic cube depth must lie in [0, log2(n) - 2] so cubes keep >= 4 points per side");
  }
  if (shift_count < 1 || shift_count > 4) throw ConfigError("dyadic shift count must lie in [1, 4]");
  const int n = grid.n();
  const int all[4] = {0, n / 3, (2 * n) / 3, n / 5};
  shifts_.assign(all, all + shift_count);
}

DyadicCubeSet DyadicCubeSet::standard(const Grid& grid, int shift_count) {
  return DyadicCubeSet(grid, static_cast<int>(std::log2(grid.n())) - 2, shift_count);
}

std::size_t DyadicCubeSet::cube_count() const {
  std::size_t c = 0;
  for (int j = 0; j <= max_depth_; ++j) {
    std::size_t per = 1;
    for (int a = 0; a < grid_.dim(); ++a) per *= std::size_t{1} << j;
    c += per;
  }
  return c * shifts_.size();
}

double bmo_norm(const ScalarField& f, const DyadicCubeSet& cubes, std::vector<CubeOscillation>* dump) {
  require_finite(f, "bmo_norm");
  require_same_grid(f.grid(), cubes.grid(), "bmo_norm");
  const Grid& grid = f.grid();
  const int d = grid.dim(), n = grid.n();
  std::vector<double> vals;
  double best = 0.0;
  for (int si = 0; si < cubes.shift_count(); ++si) {
    const int shift = cubes.shifts()[si];
    for (int depth = 0; depth <= cubes.max_depth(); ++depth) {
      const int side = n >> depth;
      const int per_axis = 1 << depth;
      std::array<int, 3> cube{0, 0, 0};
      const int total = static_cast<int>(std::pow(per_axis, d));
      for (int c = 0; c < total; ++c) {
        int rem = c;
        for (int a = d - 1; a >= 0; --a) {
          cube[a] = rem % per_axis;
          rem /= per_axis;
        }
        std::array<int, 3> corner{0, 0, 0};
        for (int a = 0; a < d; ++a) corner[a] = (shift + cube[a] * side) % n;
        // Gather the cube's samples with periodic wrap.
        const int count = static_cast<int>(std::pow(side, d));
        vals.resize(count);
        for (int q = 0; q < count; ++q) {
          int r = q;
          std::size_t flat = 0;
          std::array<int, 3> off{0, 0, 0};
          for (int a = d - 1; a >= 0; --a) {
            off[a] = r % side;
            r /= side;
          }
          for (int a = 0; a < d; ++a) flat = flat * n + static_cast<std::size_t>((corner[a] + off[a]) % n);
          vals[q] = f[flat];
        }
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean /= count;
        double osc = 0.0;
        for (double v : vals) osc += std::abs(v - mean);
        osc /= count;
        best = std::max(best, osc);
        if (dump) dump->push_back({depth, shift, corner, side, osc});
      }
    }
  }
  return best;
}

void write_cube_dump_csv(const std::filesystem::path& path, const std::vector<CubeOscillation>& dump) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open csv for writing: " + path.string());
  os << "depth,shift,i0,i1,i2,side,oscillation\n" << std::setprecision(17);
  for (const auto& c : dump) {
    os << c.depth << ',' << c.shift << ',' << c.corner[0] << ',' << c.corner[1] << ',' << c.corner[2]
       << ',' << c.side << ',' << c.oscillation << '\n';
  }
}

// ---------------------------------------------------------------------------

LogInequalityTerms log_inequality_terms(const ScalarField& f, const ScalarField& g, double q,
                                        const DyadicCubeSet& cubes) {
  if (!(q > 2.0)) throw ConfigError("log inequality exponent q must be > 2");
  require_same_grid(f.grid(), g.grid(), "log_inequality_ratio");
  LogInequalityTerms t;
  t.lhs = std::abs(inner(f, g));
  t.g_l1 = lp_norm(g, 1.0);
  if (t.g_l1 == 0.0) return t;
  t.g_lq = lp_norm(g, q);
  t.bmo = bmo_norm(f, cubes);
  const double l = std::abs(std::log(t.g_l1));
  t.bracket = l + std::log(std::numbers::e + t.g_lq) + (1.0 + l) * std::pow(t.g_lq, (q - 2.0) / 2.0);
  const double rhs = t.bmo * t.g_l1 * t.bracket;
  t.ratio = rhs > 0.0 ? t.lhs / rhs : (t.lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  return t;
}

double log_inequality_ratio(const ScalarField& f, const ScalarField& g, double q,
                            const DyadicCubeSet& cubes) {
  return log_inequality_terms(f, g, q, cubes).ratio;
}

std::vector<LogFamilyResult> log_inequality_families(const Grid& grid, double q) {
  const auto cubes = DyadicCubeSet::standard(grid);
  const ScalarField f = ScalarField::sample(grid, [](const auto& x) { return std::cos(x[0]); });
  std::vector<LogFamilyResult> out;
  out.push_back({"mean_zero_constant_g", 1.0,
                 log_inequality_terms(f, ScalarField(grid, 1.0), q, cubes)});
  for (int s : {1, 2, 4}) {
    const ScalarField g = ScalarField::sample(grid, [s](const auto& x) { return std::pow(1.0 + std::cos(x[0]), s); });
    out.push_back({"power_profile", static_cast<double>(s), log_inequality_terms(f, g, q, cubes)});
  }
  for (int k = 0; k <= 20; ++k) {
    ScalarField g = ScalarField::sample(grid, [k](const auto& x) { return std::pow(1.0 + std::cos(x[0]), k); });
    g *= std::ldexp(1.0, -k) / lp_norm(g, 1.0);
    out.push_back({"shrinking_l1", static_cast<double>(k), log_inequality_terms(f, g, q, cubes)});
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// Quintic on [base, base + 2] from slope 1 at the left to the flat level base + 1.
double blend_value(double base, double z) {
  const double s = (z - base) / 2.0;
  const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
  return base + (10 * s3 - 15 * s4 + 6 * s5) + 2.0 * (s - 6 * s3 + 8 * s4 - 3 * s5);
}

double blend_derivative(double base, double z) {
  const double s = (z - base) / 2.0;
  return (1.0 - s) * (1.0 - s) * (1.0 + 2.0 * s);
}

}  // namespace

TruncationOperator::TruncationOperator(double k) : k_(k) {
  if (!(k >= 1.0) || !std::isfinite(k)) throw ConfigError("truncation level k must be a finite real >= 1");
  if (k >= 2.0) {
    top_ = k + 2.0;
  } else {
    // Point where the k = 2 profile reaches k + 1.
    double lo = 2.0, hi = 4.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
      const double mid = 0.5 * (lo + hi);
      (blend_value(2.0, mid) < k + 1.0 ? lo : hi) = mid;
    }
    top_ = 0.5 * (lo + hi);
  }
}

double TruncationOperator::value(double z) const {
  if (!(z >= 0.0)) throw ConfigError("truncation argument must be >= 0");
  const double base = k_ < 2.0 ? 2.0 : k_;
  if (z <= base) return std::min(z, k_ + 1.0);
  if (z >= top_) return k_ + 1.0;
  return std::min(blend_value(base, z), k_ + 1.0);
}

double TruncationOperator::derivative(double z) const {
  const double base = k_ < 2.0 ? 2.0 : k_;
  if (z < base) return z < k_ + 1.0 ? 1.0 : 0.0;
  if (z >= top_) return 0.0;
  return blend_derivative(base, z);
}

double TruncationOperator::integral(double r, double p) const {
  const double base = k_ < 2.0 ? 2.0 : k_;
  const double lin_end = std::min(r, base);
  double s = std::pow(lin_end, p - 1.0) / (p - 1.0);
  if (r <= lin_end) return s;
  const double bend = std::min(r, top_);
  if (bend > lin_end) {
    auto integrand = [&](double z) { return std::pow(value(z), p) / (z * z); };
    s += boost::math::quadrature::gauss<double, 30>::integrate(integrand, lin_end, bend);
  }
  if (r > top_) s += std::pow(k_ + 1.0, p) * (1.0 / top_ - 1.0 / r);
  return s;
}

double TruncationOperator::pk(double rho, double p) const {
  if (!(p > 1.0)) throw ConfigError("P_k exponent p must be > 1");
  if (!(rho >= 0.0)) throw ConfigError("P_k argument must be >= 0");
  if (rho == 0.0) return 0.0;
  return rho * integral(rho, p);
}

double TruncationOperator::pk_derivative(double rho, double p) const {
  if (rho == 0.0) return 0.0;
  return integral(rho, p) + std::pow(value(rho), p) / rho;
}

ScalarField truncation_apply(const TruncationOperator& op, const ScalarField& rho) {
  return pointwise(rho, [&](double r) { return op.value(r); });
}

ScalarField pk_apply(const TruncationOperator& op, double p, const ScalarField& rho) {
  return pointwise(rho, [&](double r) { return op.pk(r, p); });
}

BalanceSeries renormalized_identity_residual(const TrajectoryState& traj,
                                             const TruncationOperator& op, double p,
                                             const RegularizationParams& params) {
  require_trajectory(traj);
  std::vector<double> e(traj.levels()), q(traj.levels());
  for (std::size_t k = 0; k < traj.levels(); ++k) {
    const ScalarField& rho = traj.rho[k];
    const double dv = rho.grid().cell_volume();
    e[k] = integrate(pk_apply(op, p, rho));
    const ScalarField div = divergence(traj.u[k]);
    double s = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) s += std::pow(op.value(rho[i]), p) * div[i];
    s *= dv;
    if (params.delta > 0.0) {
      double pen = 0.0;
      for (double r : rho.values()) pen += int_power(r, params.beta) * op.pk_derivative(r, p);
      s += params.delta * pen * dv;
      s += params.delta * grad_sq_weighted(rho, [&](double r) {
             return r > 0.0 ? p * std::pow(op.value(r), p - 1.0) * op.derivative(r) / r : 0.0;
           });
    }
    q[k] = s;
  }
  return trapezoid_balance(traj.times, e, q);
}

// ---------------------------------------------------------------------------

VectorField bogovskii_field(const ScalarField& rho, double theta) {
  const ScalarField h = pointwise(rho, [theta](double r) { return std::pow(r, theta); });
  return gradient(inverse_laplacian_zero_mean(h));
}

BogovskiiReport bogovskii_pressure_test(const TrajectoryState& traj, const ConstitutiveModel& model,
                                        const RegularizationParams& params, double theta) {
  require_trajectory(traj);
  if (!(theta > 1.0)) throw ConfigError("Bogovskii exponent theta must be > 1");
  BogovskiiReport rep;
  rep.theta = theta;
  const double g = model.gamma();
  std::vector<double> lhs(traj.levels()), bound(traj.levels());
  for (std::size_t k = 0; k < traj.levels(); ++k) {
    const ScalarField& rho = traj.rho[k];
    const VectorField& u = traj.u[k];
    const ScalarField h = pointwise(rho, [theta](double r) { return std::pow(r, theta); });
    const double hbar = mean(h);
    const VectorField psi = bogovskii_field(rho, theta);
    const ScalarField div_psi = divergence(psi);
    double res = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) res = std::max(res, std::abs(div_psi[i] - (h[i] - hbar)));
    rep.div_psi_residual = std::max(rep.div_psi_residual, res);

    const ScalarField div = divergence(u);
    const TensorField s = stress(model, symmetric_gradient(u));
    const TensorField gpsi = jacobian(psi);
    const double dv = rho.grid().cell_volume();
    double t_stress = 0.0, t_div = 0.0, t_lam = 0.0, t_lam_mean = 0.0, t_press = 0.0, l = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      for (int a = 0; a < rho.grid().dim(); ++a)
        for (int b = 0; b < rho.grid().dim(); ++b) t_stress += s.entry(a, b)[i] * gpsi.entry(a, b)[i];
      const double lam = model.lambda(std::abs(div[i])) * div[i];
      t_div += 2.0 * div[i] * h[i];
      t_lam += lam * h[i];
      t_lam_mean += lam;
      t_press += std::pow(rho[i], g);
      l += std::pow(rho[i], g + theta);
    }
    t_stress *= dv;
    t_div *= dv;
    t_lam *= dv;
    t_lam_mean *= hbar * dv;
    t_press *= hbar * dv;
    l *= dv;
    double t_eps = 0.0;
    if (params.epsilon > 0.0) {
      t_eps = params.epsilon * inner(laplacian_power(u, params.m), laplacian_power(psi, params.m));
    }
    const double rhs = t_stress + t_div + t_lam - t_lam_mean + t_press + t_eps;
    const double abs_sum = std::abs(t_stress) + std::abs(t_div) + std::abs(t_lam) +
                           std::abs(t_lam_mean) + std::abs(t_press) + std::abs(t_eps);
    rep.identity_residual =
        std::max(rep.identity_residual, std::abs(l - rhs) / std::max({std::abs(l), abs_sum, 1e-300}));
    lhs[k] = l;
    bound[k] = abs_sum;
  }
  for (std::size_t k = 0; k + 1 < traj.levels(); ++k) {
    const double dt = traj.times[k + 1] - traj.times[k];
    rep.lhs += 0.5 * dt * (lhs[k] + lhs[k + 1]);
    rep.bound += 0.5 * dt * (bound[k] + bound[k + 1]);
  }
  if (traj.levels() == 1) {
    rep.lhs = lhs[0];
    rep.bound = bound[0];
  }
  return rep;
}

// ---------------------------------------------------------------------------

std::vector<double> gronwall_envelope(const std::vector<double>& t, double C, double eta) {
  namespace ode = boost::numeric::odeint;
  if (!(eta > 0.0)) throw ConfigError("Gronwall envelope start eta must be > 0");
  if (t.empty()) return {};
  // w = ln z solves w' = C (|w| + 1).
  std::vector<double> out;
  out.reserve(t.size());
  double w = std::log(eta);
  auto rhs = [C](const double& x, double& dxdt, double) { dxdt = C * (std::abs(x) + 1.0); };
  auto stepper = ode::make_controlled(1e-13, 1e-13, ode::runge_kutta_dopri5<double>());
  double t0 = t.front();
  out.push_back(std::exp(w));
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double dt0 = std::max((t[i] - t0) / 16.0, 1e-12);
    if (t[i] > t0) ode::integrate_adaptive(stepper, rhs, w, t0, t[i], dt0);
    t0 = t[i];
    out.push_back(std::exp(w));
  }
  return out;
}

GronwallResult gronwall_compare(const std::vector<double>& t, const std::vector<double>& y, double C,
                                double tol) {
  if (t.size() != y.size() || t.empty()) throw DataError("gronwall_compare: series lengths differ");
  if (!(C >= 0.0)) throw ConfigError("gronwall_compare: C must be >= 0");
  for (double v : y)
    if (!(v >= -tol)) throw DataError("gronwall_compare: y must be nonnegative");
  GronwallResult res;
  res.pass = true;
  res.max_excess = -std::numeric_limits<double>::infinity();
  for (int e = 2; e <= 16; e += 2) {
    const double eta = std::pow(10.0, -e);
    const auto z = gronwall_envelope(t, C, eta);
    double excess = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < t.size(); ++i) excess = std::max(excess, y[i] - z[i]);
    res.etas.push_back(eta);
    res.envelope_at_T.push_back(z.back());
    res.max_excess = std::max(res.max_excess, excess);
    if (excess > tol) res.pass = false;
  }
  // The zero solution from z(0) = 0.
  for (double v : y)
    if (v > tol) res.pass = false;
  return res;
}

}  // namespace csnt
