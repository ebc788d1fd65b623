#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "csnt/config.hpp"
#include "csnt/coupling.hpp"

namespace csnt {

enum class Verdict { Pass, Fail, Skipped };

const char* to_string(Verdict v);

/// One row of diagnostics.csv.
struct DiagnosticRow {
  std::string name;
  double t = 0.0;       // time the value refers to (worst level, or T)
  double value = 0.0;
  double bound = 0.0;
  Verdict verdict = Verdict::Skipped;
  std::string note;
};

bool any_failed(const std::vector<DiagnosticRow>& rows);

/// Evaluates the named checks on a trajectory. Unknown names raise
/// ConfigError; checks that cannot be evaluated on the data (gronwall without
/// a reference, constant_state_ode on a non-constant start) come back SKIPPED.
/// When `cube_dump` is non-empty, bmo_flux writes the per-cube oscillations
/// of its worst level there.
std::vector<DiagnosticRow> run_checks(const RunConfig& config, const TrajectoryState& traj,
                                      const std::vector<std::string>& checks,
                                      const TrajectoryState* reference = nullptr,
                                      const std::filesystem::path& cube_dump = {});

/// `name,t,value,bound,verdict,note`
void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<DiagnosticRow>& rows);

/// output.dir, then $CSNT_OUTDIR, then ./csnt_out; a non-empty override wins.
std::filesystem::path resolve_output_dir(const RunConfig& config, const std::filesystem::path& override_dir);

/// Writes rho_NNNNNN.bin and u_NNNNNN.bin for every `every`-th level and the
/// last one (every = 0: first and last only).
void write_trajectory_snapshots(const std::filesystem::path& dir, const TrajectoryState& traj, int every);

/// Reads the rho_/u_ snapshot pairs of a directory, in index order, and
/// recomputes the scalar series. Throws DataError for malformed or
/// inconsistent files.
TrajectoryState load_snapshot_dir(const std::filesystem::path& dir, const CoupledConfig& config);

struct RunOutcome {
  std::filesystem::path dir;
  std::vector<DiagnosticRow> rows;
  TrajectoryState trajectory;
  bool failed() const { return any_failed(rows); }
};

/// Runs the experiment selected by config.kind and writes manifest.txt,
/// series.csv, snapshots and diagnostics.csv (plus fixed_point.csv or
/// ladder_report.csv). Solver failures propagate as SolverError.
RunOutcome execute_run(const RunConfig& config, const std::filesystem::path& override_dir = {});

/// Diagnostics pass over an existing snapshot directory. The configuration
/// is `config_path` if given, else the directory's manifest.txt.
RunOutcome diagnose_directory(const std::filesystem::path& dir, const std::vector<std::string>& checks,
                              const std::filesystem::path& config_path = {},
                              const std::filesystem::path& reference_dir = {},
                              bool dump_cubes = false);

}  // namespace csnt
