#include "csnt/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "csnt/constitutive.hpp"
#include "csnt/diagnostics.hpp"
#include "csnt/errors.hpp"
#include "csnt/fields.hpp"
#include "csnt/snapshot_io.hpp"

namespace csnt {

namespace fs = std::filesystem;

namespace {

DiagnosticRow row(const std::string& name, double t, double value, double bound, bool pass,
                  std::string note = {}) {
  return {name, t, value, bound, pass ? Verdict::Pass : Verdict::Fail, std::move(note)};
}

DiagnosticRow skipped(const std::string& name, std::string why) {
  return {name, 0.0, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
          Verdict::Skipped, std::move(why)};
}

// Worst relative residual of a balance series together with its time.
std::pair<double, double> worst(const BalanceSeries& b) {
  double r = 0.0, s = 0.0, t = b.t.empty() ? 0.0 : b.t.front();
  for (std::size_t k = 0; k < b.residual.size(); ++k) {
    if (b.residual[k] > r) {
      r = b.residual[k];
      t = b.t[k];
    }
    s = std::max(s, b.scale[k]);
  }
  return {s > 0.0 ? r / s : r, t};
}

double flux_sup(const ScalarField& g) { return max_abs(g); }

ScalarField band_zero_mean(const ScalarField& f) { return subtract_mean(dealias(f)); }

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

// y(t) = |int rho^gamma - int rho_ref^gamma|; the grids may differ.
std::vector<double> pressure_defect(const TrajectoryState& a, const TrajectoryState& b, double gamma) {
  std::vector<double> y(a.levels());
  for (std::size_t k = 0; k < a.levels(); ++k) {
    auto pint = [gamma](const ScalarField& r) {
      double s = 0.0;
      for (double v : r.values()) s += std::pow(std::max(v, 0.0), gamma);
      return s * r.grid().cell_volume();
    };
    y[k] = std::abs(pint(a.rho[k]) - pint(b.rho[k]));
  }
  return y;
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Skipped: return "SKIPPED";
  }
  return "?";
}

bool any_failed(const std::vector<DiagnosticRow>& rows) {
  return std::any_of(rows.begin(), rows.end(), [](const auto& r) { return r.verdict == Verdict::Fail; });
}

std::vector<DiagnosticRow> run_checks(const RunConfig& config, const TrajectoryState& traj,
                                      const std::vector<std::string>& checks,
                                      const TrajectoryState* reference, const fs::path& cube_dump) {
  const std::set<std::string> valid(default_checks().begin(), default_checks().end());
  for (const auto& c : checks) {
    if (!valid.count(c)) throw ConfigError("unknown diagnostic check `" + c + "`");
  }
  traj.validate();
  if (traj.levels() == 0) throw DataError("trajectory has no levels");
  const auto& model = config.coupled.model;
  const auto& params = config.coupled.params;
  const double T = traj.times.back();
  const std::size_t L = traj.levels();
  std::vector<DiagnosticRow> rows;

  for (const auto& name : checks) {
    if (name == "energy_balance") {
      if (L < 2) {
        rows.push_back(skipped(name, "needs two time levels"));
        continue;
      }
      const auto [v, t] = worst(energy_balance(traj, model, params));
      rows.push_back(row(name, t, v, 1e-6, v <= 1e-6, "relative trapezoid residual"));
    } else if (name == "energy_monotone") {
      double v = 0.0, t = 0.0;
      for (std::size_t k = 0; k + 1 < L; ++k) {
        const double inc = traj.energy[k + 1] - traj.energy[k];
        if (inc > v) {
          v = inc;
          t = traj.times[k + 1];
        }
      }
      rows.push_back(row(name, t, v, 1e-8, v <= 1e-8, "largest per-step energy increase"));
    } else if (name == "mass_monotone") {
      double v = 0.0, t = 0.0, scale = 1.0;
      for (std::size_t k = 0; k < L; ++k) scale = std::max(scale, std::abs(traj.mass[k]));
      for (std::size_t k = 0; k + 1 < L; ++k) {
        const double inc = traj.mass[k + 1] - traj.mass[k];
        if (inc > v) {
          v = inc;
          t = traj.times[k + 1];
        }
      }
      const double bound = 1e-12 * scale;
      rows.push_back(row(name, t, v, bound, v <= bound, "largest per-step mass increase"));
    } else if (name == "nonnegativity") {
      double v = 0.0, t = 0.0;
      for (std::size_t k = 0; k < L; ++k) {
        if (-traj.rho_min[k] > v) {
          v = -traj.rho_min[k];
          t = traj.times[k];
        }
      }
      rows.push_back(row(name, t, v, 0.0, v <= 0.0, "largest negative density"));
    } else if (name == "stress_bound") {
      double v = 0.0, t = 0.0;
      for (std::size_t k = 0; k < L; ++k) {
        const double s = lp_norm(stress(model, symmetric_gradient(traj.u[k])), INFINITY);
        if (s > v) {
          v = s;
          t = traj.times[k];
        }
      }
      const double c = model.bound_constant();
      rows.push_back(row(name, t, v, c, v <= c, "sup |mu0(|Du|)Du| against the model constant"));
    } else if (name == "cz_flux") {
      double v = 0.0, t = 0.0;
      for (std::size_t k = 0; k < L; ++k) {
        const ScalarField g = band_zero_mean(effective_viscous_flux(traj.u[k], traj.rho[k], model));
        const double d = max_abs(g - cz_flux(traj.u[k], model, params));
        if (d > v) {
          v = d;
          t = traj.times[k];
        }
      }
      rows.push_back(row(name, t, v, 1e-6, v <= 1e-6, "max-norm gap to the multiplier representation"));
    } else if (name == "bmo_flux") {
      const DyadicCubeSet cubes = DyadicCubeSet::standard(traj.rho[0].grid());
      double v = 0.0, bound = 0.0, t = 0.0;
      std::size_t worst_level = 0;
      bool pass = true;
      for (std::size_t k = 0; k < L; ++k) {
        const ScalarField g = effective_viscous_flux(traj.u[k], traj.rho[k], model);
        const double b = bmo_norm(g, cubes);
        const double cap = 2.0 * flux_sup(g);
        if (b > cap * (1.0 + 1e-12)) pass = false;
        if (b >= v) {
          v = b;
          bound = cap;
          t = traj.times[k];
          worst_level = k;
        }
      }
      if (!cube_dump.empty()) {
        std::vector<CubeOscillation> dump;
        bmo_norm(effective_viscous_flux(traj.u[worst_level], traj.rho[worst_level], model), cubes, &dump);
        write_cube_dump_csv(cube_dump, dump);
      }
      rows.push_back(row(name, t, v, bound, pass, "dyadic-BMO lower bound of G"));
    } else if (name == "bogovskii_div_psi" || name == "bogovskii_constant") {
      const BogovskiiReport rep = bogovskii_pressure_test(traj, model, params, config.bogovskii_theta);
      if (name == "bogovskii_div_psi") {
        rows.push_back(row(name, T, rep.div_psi_residual, 1e-10, rep.div_psi_residual <= 1e-10,
                           "max-norm residual of div psi"));
      } else {
        const double c = rep.constant();
        // lhs <= bound holds up to the closure of the identity itself
        const double cap = 1.0 + 1e-9;
        rows.push_back(row(name, T, c, cap, c <= cap && rep.identity_residual <= 1e-9,
                           "lhs " + fmt(rep.lhs) + " / bound " + fmt(rep.bound) + "; identity residual " +
                               fmt(rep.identity_residual)));
      }
    } else if (name == "renormalized_identity") {
      if (L < 2) {
        rows.push_back(skipped(name, "needs two time levels"));
        continue;
      }
      const TruncationOperator op(config.truncation_k);
      const auto [v, t] = worst(renormalized_identity_residual(traj, op, config.truncation_p, params));
      rows.push_back(row(name, t, v, 1e-5, v <= 1e-5, "relative trapezoid residual of the P_k identity"));
    } else if (name == "constant_state_ode") {
      const ScalarField& r0 = traj.rho[0];
      const double lo = traj.rho_min[0], hi = traj.rho_max[0];
      if (hi - lo > 1e-14 * std::max(1.0, std::abs(hi))) {
        rows.push_back(skipped(name, "initial density is not constant"));
        continue;
      }
      const double c0 = mean(r0);
      double v = 0.0, t = 0.0;
      for (std::size_t k = 0; k < L; ++k) {
        const double exact = constant_state_decay(c0, params.delta, params.beta, traj.times[k]);
        const double d = std::max(std::abs(traj.rho_max[k] - exact), std::abs(traj.rho_min[k] - exact));
        if (d > v) {
          v = d;
          t = traj.times[k];
        }
      }
      rows.push_back(row(name, t, v, 1e-6, v <= 1e-6, "max deviation from the exact decay"));
    } else if (name == "gronwall") {
      if (reference == nullptr) {
        rows.push_back(skipped(name, "needs a reference trajectory"));
        continue;
      }
      if (reference->times != traj.times) {
        rows.push_back(skipped(name, "reference has different time levels"));
        continue;
      }
      const auto y = pressure_defect(traj, *reference, model.gamma());
      // Floor: 1e-9 of the compared integrals, or the defect already present at t = 0.
      double scale = 0.0;
      for (std::size_t k = 0; k < traj.levels(); ++k) scale = std::max(scale, integrate(pressure(model, traj.rho[k])));
      const double tol = std::max({1e-8, 1e-9 * scale, 10.0 * y.front()});
      const GronwallResult g = gronwall_compare(traj.times, y, config.gronwall_C, tol);
      const double ymax = *std::max_element(y.begin(), y.end());
      rows.push_back(row(name, T, ymax, tol, g.pass,
                         "max excess over the eta envelopes " + fmt(g.max_excess)));
    }
  }
  return rows;
}

void write_diagnostics_csv(const fs::path& path, const std::vector<DiagnosticRow>& rows) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open csv for writing: " + path.string());
  os << "name,t,value,bound,verdict,note\n" << std::setprecision(17);
  for (const auto& r : rows) {
    std::string note = r.note;
    std::replace(note.begin(), note.end(), ',', ';');
    os << r.name << ',' << r.t << ',' << r.value << ',' << r.bound << ',' << to_string(r.verdict) << ','
       << note << '\n';
  }
}

fs::path resolve_output_dir(const RunConfig& config, const fs::path& override_dir) {
  if (!override_dir.empty()) return override_dir;
  if (!config.output_dir.empty()) return config.output_dir;
  if (const char* env = std::getenv("CSNT_OUTDIR"); env && *env) return fs::path(env);
  return fs::path("csnt_out");
}

void write_trajectory_snapshots(const fs::path& dir, const TrajectoryState& traj, int every) {
  const std::size_t L = traj.levels();
  for (std::size_t k = 0; k < L; ++k) {
    const bool keep = k + 1 == L || k == 0 || (every > 0 && k % static_cast<std::size_t>(every) == 0);
    if (!keep) continue;
    char tag[32];
    std::snprintf(tag, sizeof tag, "%06zu.bin", k);
    write_snapshot(dir / ("rho_" + std::string(tag)), traj.rho[k], traj.times[k]);
    if (!traj.u.empty()) write_snapshot(dir / ("u_" + std::string(tag)), traj.u[k], traj.times[k]);
  }
}

TrajectoryState load_snapshot_dir(const fs::path& dir, const CoupledConfig& config) {
  if (!fs::is_directory(dir)) throw DataError("snapshot directory not found: " + dir.string());
  static const std::regex pattern(R"((rho|u)_(\d+)\.bin)");
  std::map<long, fs::path> rho_files, u_files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (!std::regex_match(name, m, pattern)) continue;
    (m[1] == "rho" ? rho_files : u_files)[std::stol(m[2])] = entry.path();
  }
  if (rho_files.empty()) throw DataError("no rho_*.bin snapshots in " + dir.string());
  TrajectoryState traj;
  for (const auto& [idx, path] : rho_files) {
    const auto u_it = u_files.find(idx);
    if (u_it == u_files.end()) throw DataError("missing velocity snapshot for " + path.filename().string());
    const Snapshot rs = read_snapshot(path);
    const Snapshot us = read_snapshot(u_it->second);
    if (rs.components != 1) throw DataError(path.string() + " is not a scalar snapshot");
    if (us.components != us.dim) throw DataError(u_it->second.string() + " is not a vector snapshot");
    if (rs.dim != config.grid.dim() || rs.n != config.grid.n() || us.dim != rs.dim || us.n != rs.n) {
      throw DataError("snapshot grid of " + path.filename().string() + " does not match the configuration");
    }
    if (rs.time != us.time) throw DataError("rho and u snapshot times differ at index " + std::to_string(idx));
    traj.times.push_back(rs.time);
    traj.rho.push_back(to_scalar_field(rs));
    traj.u.push_back(to_vector_field(us));
  }
  u_files.clear();
  try {
    traj.validate();
  } catch (const Error& e) {
    throw DataError(std::string("inconsistent snapshot directory: ") + e.what());
  }
  compute_series(config, traj);
  return traj;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path.string());
  os << text;
}

void write_fixed_point_csv(const fs::path& path, const FixedPointReport& rep) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open csv for writing: " + path.string());
  os << "iteration,residual\n" << std::setprecision(17);
  for (std::size_t i = 0; i < rep.residuals.size(); ++i) os << i + 1 << ',' << rep.residuals[i] << '\n';
}

}  // namespace

RunOutcome execute_run(const RunConfig& config, const fs::path& override_dir) {
  RunOutcome out;
  out.dir = resolve_output_dir(config, override_dir);
  fs::create_directories(out.dir);
  write_text(out.dir / "manifest.txt", manifest_text(config));

  const ScalarField rho0 = initial_density(config);
  const auto& cc = config.coupled;

  if (config.kind == "ladder") {
    const LadderReport rep = regularization_ladder(cc, rho0, config.ladder_deltas, config.ladder_epsilons);
    write_ladder_csv(out.dir / "ladder_report.csv", rep);
    const TrajectoryState* finest = nullptr;
    const TrajectoryState* previous = nullptr;
    RunConfig finest_config = config;
    for (std::size_t i = 0; i < rep.rungs.size(); ++i) {
      if (!rep.rungs[i].ok) continue;
      const fs::path sub = out.dir / ("rung_" + std::to_string(i));
      fs::create_directories(sub);
      write_series_csv(sub / "series.csv", rep.trajectories[i]);
      write_trajectory_snapshots(sub, rep.trajectories[i], config.snapshot_every);
      previous = finest;
      finest = &rep.trajectories[i];
      finest_config.coupled.params.delta = rep.rungs[i].delta;
      finest_config.coupled.params.epsilon = rep.rungs[i].epsilon;
    }
    bool all_ok = std::all_of(rep.rungs.begin(), rep.rungs.end(), [](const auto& r) { return r.ok; });
    out.rows.push_back(row("ladder_rungs", cc.T, static_cast<double>(rep.rungs.size()),
                           static_cast<double>(rep.rungs.size()), all_ok, "rungs solved"));
    double worst_ratio = 0.0;
    for (std::size_t i = 0; i + 2 < rep.rungs.size(); ++i) {
      const double a = rep.rungs[i].rho_distance_next, b = rep.rungs[i + 1].rho_distance_next;
      if (std::isfinite(a) && std::isfinite(b) && a > 0.0) worst_ratio = std::max(worst_ratio, b / a);
    }
    if (rep.rungs.size() >= 3) {
      out.rows.push_back(row("ladder_distance_monotone", cc.T, worst_ratio, 1.0, all_ok && worst_ratio < 1.0,
                             "largest ratio of consecutive rung distances"));
    }
    if (finest) {
      out.trajectory = *finest;
      auto checks = run_checks(finest_config, *finest, config.checks);
      out.rows.insert(out.rows.end(), checks.begin(), checks.end());
      if (previous && previous->times == finest->times) {
        // The rung defect is O(delta), so the envelope comparison is reported, not judged.
        const auto y = pressure_defect(*finest, *previous, cc.model.gamma());
        const GronwallResult g = gronwall_compare(finest->times, y, config.gronwall_C);
        DiagnosticRow r = skipped("gronwall_ladder_defect", "reported only; max excess over the eta envelopes " +
                                                                fmt(g.max_excess));
        r.t = cc.T;
        r.value = *std::max_element(y.begin(), y.end());
        r.bound = 1e-8;
        out.rows.push_back(r);
      }
    }
    write_diagnostics_csv(out.dir / "diagnostics.csv", out.rows);
    return out;
  }

  FixedPointReport rep = solve_fixed_point(cc, rho0);
  if (config.kind == "fixed_point") {
    write_fixed_point_csv(out.dir / "fixed_point.csv", rep);
    out.rows.push_back(row("fixed_point_converged", cc.T,
                           rep.residuals.empty() ? 0.0 : rep.residuals.back(), cc.fixed_point.tol,
                           rep.converged && !rep.flagged,
                           std::to_string(rep.iterations) + " iterations" + (rep.flagged ? "; flagged" : "")));
    CoupledConfig other = cc;
    other.fixed_point.mode = cc.fixed_point.mode == FixedPointOptions::Mode::Global
                                 ? FixedPointOptions::Mode::PerStep
                                 : FixedPointOptions::Mode::Global;
    const FixedPointReport alt = solve_fixed_point(other, rho0);
    const double p = 2.0 * cc.model.gamma();
    const double dist = trajectory_distance(rep.trajectory.rho, alt.trajectory.rho, p);
    const double bound = 5.0 * cc.fixed_point.tol;
    out.rows.push_back(row("mode_agreement", cc.T, dist, bound, dist <= bound,
                           std::string("distance to the ") + to_string(other.fixed_point.mode) + " solution"));
  } else if (!rep.converged) {
    throw SolverError("fixed-point iteration did not converge within " + std::to_string(rep.iterations) +
                      " iterations");
  }
  out.trajectory = std::move(rep.trajectory);
  write_series_csv(out.dir / "series.csv", out.trajectory);
  write_trajectory_snapshots(out.dir, out.trajectory, config.snapshot_every);
  auto checks = run_checks(config, out.trajectory, config.checks);
  out.rows.insert(out.rows.end(), checks.begin(), checks.end());
  write_diagnostics_csv(out.dir / "diagnostics.csv", out.rows);
  return out;
}

RunOutcome diagnose_directory(const fs::path& dir, const std::vector<std::string>& checks,
                              const fs::path& config_path, const fs::path& reference_dir, bool dump_cubes) {
  const fs::path cfg = config_path.empty() ? dir / "manifest.txt" : config_path;
  if (!fs::exists(cfg)) throw ConfigError("no configuration: pass --config or provide " + cfg.string());
  const RunConfig config = load_config(cfg);
  RunOutcome out;
  out.dir = dir;
  out.trajectory = load_snapshot_dir(dir, config.coupled);
  std::optional<TrajectoryState> reference;
  if (!reference_dir.empty()) {
    const fs::path rcfg = reference_dir / "manifest.txt";
    const RunConfig ref_config = fs::exists(rcfg) ? load_config(rcfg) : config;
    reference = load_snapshot_dir(reference_dir, ref_config.coupled);
  }
  out.rows = run_checks(config, out.trajectory, checks.empty() ? config.checks : checks,
                        reference ? &*reference : nullptr, dump_cubes ? dir / "cube_dump.csv" : fs::path{});
  write_diagnostics_csv(dir / "diagnostics.csv", out.rows);
  return out;
}

}  // namespace csnt
