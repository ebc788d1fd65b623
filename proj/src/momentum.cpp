#include "csnt/momentum.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "csnt/errors.hpp"
#include "csnt/fields.hpp"
#include "csnt/spectral.hpp"

namespace csnt {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterExceeded: return "max_iter_exceeded";
    case SolveStatus::LineSearchStalled: return "line_search_stalled";
  }
  return "unknown";
}

namespace {

constexpr Complex kI{0.0, 1.0};
using SVec = std::vector<Spectrum>;

// Energy functional and its gradient in Fourier coefficients of the unknown.
// Unknowns live on the mean-free modes of the 2/3 band.
class Operator {
 public:
  explicit Operator(const MomentumProblem& pb)
      : sp_(spectral_for(pb.rho_gamma.grid())),
        model_(pb.model),
        params_(pb.params),
        grid_(pb.rho_gamma.grid()),
        d_(grid_.dim()),
        mask_(sp_->modes()),
        lap_m_(sp_->modes()),
        prec_(sp_->modes()) {
    require_finite(pb.rho_gamma, "momentum datum");
    const auto k2 = sp_->k2();
    const auto band = sp_->band();
    for (std::size_t m = 0; m < sp_->modes(); ++m) {
      mask_[m] = (band[m] && k2[m] > 0.0) ? 1.0 : 0.0;
      lap_m_[m] = std::pow(k2[m], params_.m);
      const double q = k2[m] + params_.epsilon * lap_m_[m] * lap_m_[m];
      prec_[m] = mask_[m] > 0.0 ? 1.0 / q : 0.0;
    }
    p_hat_ = sp_->forward(pb.rho_gamma.values());
    f_hat_.assign(d_, Spectrum(sp_->modes(), Complex{}));
    if (pb.forcing) {
      require_same_grid(grid_, pb.forcing->grid(), "momentum forcing");
      require_finite(*pb.forcing, "momentum forcing");
      for (int i = 0; i < d_; ++i) f_hat_[i] = sp_->forward(pb.forcing->component(i));
    }
  }

  const Spectral& spectral() const { return *sp_; }
  int dim() const { return d_; }

  SVec zeros() const { return SVec(d_, Spectrum(sp_->modes(), Complex{})); }

  SVec to_spectral(const VectorField& v) const {
    require_same_grid(grid_, v.grid(), "momentum unknown");
    SVec out(d_);
    for (int i = 0; i < d_; ++i) {
      out[i] = sp_->forward(v.component(i));
      for (std::size_t m = 0; m < sp_->modes(); ++m) out[i][m] *= mask_[m];
    }
    return out;
  }

  VectorField to_physical(const SVec& v) const {
    VectorField out(grid_);
    for (int i = 0; i < d_; ++i) sp_->inverse(v[i], out.component(i));
    return out;
  }

  double inner(const SVec& a, const SVec& b) const {
    double s = 0.0;
    for (int i = 0; i < d_; ++i) s += sp_->inner(a[i], b[i]);
    return s;
  }

  SVec precondition(const SVec& g) const {
    SVec out = g;
    for (int i = 0; i < d_; ++i)
      for (std::size_t m = 0; m < sp_->modes(); ++m) out[i][m] *= prec_[m];
    return out;
  }

  /// Energy (when requested) and band-projected gradient at v.
  double evaluate(const SVec& v, SVec* grad, bool want_energy = true) const {
    const std::size_t npts = grid_.size();
    const std::size_t nm = sp_->modes();
    // Jacobian J_ij = d_j v_i in physical space.
    std::vector<std::vector<double>> jac(d_ * d_, std::vector<double>(npts));
    Spectrum tmp(nm);
    for (int i = 0; i < d_; ++i) {
      for (int j = 0; j < d_; ++j) {
        const auto k = sp_->odd_wavenumber(j);
        for (std::size_t m = 0; m < nm; ++m) tmp[m] = kI * k[m] * v[i][m];
        sp_->inverse(tmp, jac[i * d_ + j]);
      }
    }
    // Pointwise nonlinearities.
    const int nsym = d_ * (d_ + 1) / 2;
    std::vector<std::vector<double>> stress(nsym, std::vector<double>(npts));
    std::vector<double> q(npts);
    long double e_density = 0.0L;
    for (std::size_t p = 0; p < npts; ++p) {
      double dnorm2 = 0.0, jnorm2 = 0.0, div = 0.0;
      for (int i = 0; i < d_; ++i) {
        div += jac[i * d_ + i][p];
        for (int j = 0; j < d_; ++j) {
          const double jij = jac[i * d_ + j][p];
          const double dij = 0.5 * (jij + jac[j * d_ + i][p]);
          dnorm2 += dij * dij;
          jnorm2 += jij * jij;
        }
      }
      const double r = std::sqrt(dnorm2);
      const double mu = model_.mu0(r);
      int s = 0;
      for (int i = 0; i < d_; ++i)
        for (int j = i; j < d_; ++j, ++s)
          stress[s][p] = mu * 0.5 * (jac[i * d_ + j][p] + jac[j * d_ + i][p]);
      q[p] = (1.0 + model_.lambda(std::abs(div))) * div;
      if (want_energy) {
        e_density += model_.potential_F(r) + 0.5 * jnorm2 + model_.potential_Lambda(div);
      }
    }
    double energy = 0.0;
    if (want_energy) {
      energy = static_cast<double>(e_density) * grid_.cell_volume();
      // eps/2 ||Lap^m v||^2 - int rho^gamma div v - int f.v, by Parseval.
      Spectrum div_hat(nm, Complex{});
      double reg = 0.0;
      for (int i = 0; i < d_; ++i) {
        const auto k = sp_->odd_wavenumber(i);
        for (std::size_t m = 0; m < nm; ++m) {
          div_hat[m] += kI * k[m] * v[i][m];
          tmp[m] = lap_m_[m] * v[i][m];
        }
        reg += sp_->inner(tmp, tmp);
        energy -= sp_->inner(f_hat_[i], v[i]);
      }
      energy += 0.5 * params_.epsilon * reg;
      energy -= sp_->inner(p_hat_, div_hat);
    }
    if (grad != nullptr) {
      std::vector<Spectrum> s_hat(nsym);
      for (int s = 0; s < nsym; ++s) s_hat[s] = sp_->forward(stress[s]);
      const Spectrum q_hat = sp_->forward(q);
      const auto k2 = sp_->k2();
      grad->assign(d_, Spectrum(nm));
      for (int i = 0; i < d_; ++i) {
        const auto ki = sp_->odd_wavenumber(i);
        auto& g = (*grad)[i];
        for (std::size_t m = 0; m < nm; ++m) {
          if (mask_[m] == 0.0) {
            g[m] = Complex{};
            continue;
          }
          Complex acc{};
          for (int j = 0; j < d_; ++j) {
            const int a = std::min(i, j), b = std::max(i, j);
            const int s = a * d_ - a * (a - 1) / 2 + (b - a);
            acc -= kI * sp_->odd_wavenumber(j)[m] * s_hat[s][m];
          }
          acc += (k2[m] + params_.epsilon * lap_m_[m] * lap_m_[m]) * v[i][m];
          acc -= kI * ki[m] * q_hat[m];
          acc += kI * ki[m] * p_hat_[m];
          acc -= f_hat_[i][m];
          g[m] = acc;
        }
      }
    }
    return energy;
  }

 private:
  std::shared_ptr<const Spectral> sp_;
  ConstitutiveModel model_;
  RegularizationParams params_;
  Grid grid_;
  int d_;
  std::vector<double> mask_;
  std::vector<double> lap_m_;
  std::vector<double> prec_;
  Spectrum p_hat_;
  SVec f_hat_;
};

void axpy(double a, const SVec& x, SVec& y) {
  for (std::size_t i = 0; i < y.size(); ++i)
    for (std::size_t m = 0; m < y[i].size(); ++m) y[i][m] += a * x[i][m];
}

bool all_finite(const SVec& v) {
  for (const auto& c : v)
    for (const auto& z : c)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

struct LineSearchResult {
  bool ok = false;
  double alpha = 0.0;
  double energy = 0.0;
  SVec grad;
};

// Strong Wolfe search on phi(alpha) = I[v + alpha d] for convex phi. Energy
// comparisons carry a relative slack of 1e-14; once energy differences are
// at round-off level the bracket is driven by the sign of phi', and the
// approximate Wolfe test phi' <= (2 c1 - 1) phi'(0) replaces Armijo.
LineSearchResult line_search(const Operator& op, const SVec& v, const SVec& dir, double phi0,
                             double dphi0, double alpha0) {
  constexpr double c1 = 1e-4;
  constexpr double c2 = 0.1;
  constexpr int max_evals = 40;
  const double slack = 1e-14 * std::max(1.0, std::abs(phi0));

  double lo = 0.0, dlo = dphi0;
  double hi = std::numeric_limits<double>::infinity(), dhi = 0.0;
  double alpha = alpha0;
  LineSearchResult best;
  best.energy = phi0;
  double best_abs_dphi = std::abs(dphi0);
  for (int it = 0; it < max_evals; ++it) {
    SVec trial = v;
    axpy(alpha, dir, trial);
    SVec grad;
    const double phi = op.evaluate(trial, &grad);
    if (!std::isfinite(phi) || !all_finite(grad)) {
      throw NonFiniteError("NonFiniteEnergy: momentum energy or residual became non-finite");
    }
    const double dphi = op.inner(grad, dir);
    const bool within_slack = phi <= phi0 + slack;
    const bool armijo = phi <= phi0 + c1 * alpha * dphi0 ||
                        (within_slack && dphi <= (2.0 * c1 - 1.0) * dphi0);
    if (armijo && std::abs(dphi) <= c2 * std::abs(dphi0)) {
      return {true, alpha, phi, std::move(grad)};
    }
    if (within_slack && dphi < 0.0 && std::abs(dphi) < best_abs_dphi) {
      best = {false, alpha, phi, grad};
      best_abs_dphi = std::abs(dphi);
    }
    if (dphi >= 0.0 || !within_slack) {
      hi = alpha;
      dhi = dphi;
    } else {
      lo = alpha;
      dlo = dphi;
    }
    if (std::isinf(hi)) {
      // Extrapolate with the secant on phi', growing by at most 8x.
      const double next =
          (lo > 0.0 && dlo > dphi0) ? lo - dlo * lo / (dlo - dphi0) : 4.0 * alpha;
      alpha = std::clamp(next, 1.5 * alpha, 8.0 * alpha);
    } else {
      const double width = hi - lo;
      if (width <= 1e-16 * std::max(1.0, hi)) break;
      double next = 0.5 * (lo + hi);
      if (dhi > 0.0 && dhi > dlo) next = lo - dlo * width / (dhi - dlo);
      alpha = std::clamp(next, lo + 0.1 * width, hi - 0.1 * width);
    }
  }
  return best;
}

}  // namespace

double energy(const MomentumProblem& problem, const VectorField& v) {
  require_finite(v, "energy");
  const Operator op(problem);
  const auto sp = spectral_for(v.grid());
  std::vector<Spectrum> vh(v.components());
  for (int i = 0; i < v.components(); ++i) vh[i] = sp->forward(v.component(i));
  return op.evaluate(vh, nullptr);
}

VectorField energy_gradient(const MomentumProblem& problem, const VectorField& v) {
  require_finite(v, "energy_gradient");
  const Operator op(problem);
  const auto sp = spectral_for(v.grid());
  std::vector<Spectrum> vh(v.components());
  for (int i = 0; i < v.components(); ++i) vh[i] = sp->forward(v.component(i));
  SVec g;
  op.evaluate(vh, &g, false);
  return op.to_physical(g);
}

VectorField project_solver_space(const VectorField& u) {
  const auto sp = spectral_for(u.grid());
  const auto band = sp->band();
  const auto k2 = sp->k2();
  VectorField out(u.grid());
  for (int i = 0; i < u.components(); ++i) {
    auto uh = sp->forward(u.component(i));
    for (std::size_t m = 0; m < sp->modes(); ++m)
      if (!band[m] || k2[m] == 0.0) uh[m] = Complex{};
    sp->inverse(uh, out.component(i));
  }
  return out;
}

MomentumSolution solve_momentum(const MomentumProblem& problem, const MomentumOptions& options,
                                const VectorField* initial_guess) {
  if (!(options.tol > 0.0)) throw ConfigError("momentum.tol must be > 0");
  if (options.max_iter < 0) throw ConfigError("momentum.max_iter must be >= 0");
  problem.params.validate(problem.model.gamma(), problem.rho_gamma.grid().dim());
  if (min_value(problem.rho_gamma) < 0.0) throw NegativeDensity("momentum datum rho^gamma is negative");

  const Operator op(problem);
  SVec v = initial_guess ? op.to_spectral(*initial_guess) : op.zeros();
  SVec grad;
  double phi = op.evaluate(v, &grad);
  if (!std::isfinite(phi) || !all_finite(grad)) {
    throw NonFiniteError("NonFiniteEnergy: momentum energy is not finite at the initial guess");
  }
  SVec z = op.precondition(grad);
  double rz = op.inner(grad, z);
  SVec dir = z;
  for (auto& c : dir)
    for (auto& x : c) x = -x;

  MomentumSolution sol{VectorField(problem.rho_gamma.grid()), 0.0, 0.0, 0, SolveStatus::MaxIterExceeded, {}, {}};
  double alpha_prev = 1.0, dphi_prev = 0.0;
  int iter = 0;
  for (;; ++iter) {
    const double res = std::sqrt(std::max(rz, 0.0));
    sol.history.push_back({iter, phi, res});
    if (res <= options.tol) {
      sol.status = SolveStatus::Converged;
      break;
    }
    if (iter >= options.max_iter) break;
    double dphi0 = op.inner(grad, dir);
    if (dphi0 >= 0.0) {
      // Lost descent: restart along the preconditioned steepest descent.
      dir = z;
      for (auto& c : dir)
        for (auto& x : c) x = -x;
      dphi0 = -rz;
    }
    const double alpha0 = (iter == 0 || dphi_prev == 0.0)
                              ? 1.0
                              : std::clamp(alpha_prev * dphi_prev / dphi0, 1e-3, 1e3);
    auto ls = line_search(op, v, dir, phi, dphi0, alpha0);
    if (!ls.ok && ls.alpha == 0.0) {
      sol.status = SolveStatus::LineSearchStalled;
      break;
    }
    axpy(ls.alpha, dir, v);
    phi = ls.energy;
    SVec z_new = op.precondition(ls.grad);
    const double rz_new = op.inner(ls.grad, z_new);
    // Polak-Ribiere+ on the preconditioned residuals.
    double num = rz_new;
    for (int i = 0; i < op.dim(); ++i) num -= op.spectral().inner(grad[i], z_new[i]);
    const double beta = std::max(0.0, num / rz);
    for (int i = 0; i < op.dim(); ++i)
      for (std::size_t m = 0; m < dir[i].size(); ++m) dir[i][m] = -z_new[i][m] + beta * dir[i][m];
    alpha_prev = ls.alpha;
    dphi_prev = dphi0;
    grad = std::move(ls.grad);
    z = std::move(z_new);
    rz = rz_new;
    if (!ls.ok) {
      // Accepted the best available step; restart the conjugacy.
      dir = z;
      for (auto& c : dir)
        for (auto& x : c) x = -x;
    }
  }

  sol.u = op.to_physical(v);
  sol.residual_norm = std::sqrt(std::max(rz, 0.0));
  sol.energy_value = phi;
  sol.iterations = iter;

  const double eps = problem.params.epsilon;
  sol.certificate.grad_l2 = lp_norm(jacobian(sol.u), 2.0);
  sol.certificate.eps_lap_m_l2 =
      eps > 0.0 ? std::sqrt(eps) * lp_norm(laplacian_power(sol.u, problem.params.m), 2.0) : 0.0;
  sol.certificate.w1inf = eps > 0.0 ? w1inf_norm(sol.u) : std::numeric_limits<double>::quiet_NaN();
  sol.certificate.datum_l2 = lp_norm(problem.rho_gamma, 2.0);
  return sol;
}

double dissipation(const ConstitutiveModel& model, const RegularizationParams& params,
                   const VectorField& u) {
  const TensorField jac = jacobian(u);
  const int d = u.grid().dim();
  double s = 0.0;
  for (std::size_t p = 0; p < u.grid().size(); ++p) {
    double dn2 = 0.0, jn2 = 0.0, div = 0.0;
    for (int i = 0; i < d; ++i) {
      div += jac.entry(i, i)[p];
      for (int j = 0; j < d; ++j) {
        const double dij = 0.5 * (jac.entry(i, j)[p] + jac.entry(j, i)[p]);
        dn2 += dij * dij;
        jn2 += jac.entry(i, j)[p] * jac.entry(i, j)[p];
      }
    }
    s += model.mu0(std::sqrt(dn2)) * dn2 + jn2 + (1.0 + model.lambda(std::abs(div))) * div * div;
  }
  s *= u.grid().cell_volume();
  if (params.epsilon > 0.0) {
    const double l = lp_norm(laplacian_power(u, params.m), 2.0);
    s += params.epsilon * l * l;
  }
  return s;
}

void write_history_csv(const std::filesystem::path& path, const MomentumSolution& solution) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open csv for writing: " + path.string());
  os << "iter,energy,residual\n" << std::setprecision(17);
  for (const auto& h : solution.history) os << h.iter << ',' << h.energy << ',' << h.residual << '\n';
}

}  // namespace csnt
