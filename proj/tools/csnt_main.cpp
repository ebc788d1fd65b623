// csnt: batch front end (run, ladder, diagnose, fixtures regenerate).

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "csnt/config.hpp"
#include "csnt/errors.hpp"
#include "csnt/fixtures.hpp"
#include "csnt/parallel.hpp"
#include "csnt/runner.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kConfig = 2, kData = 3, kSolver = 4, kDiagnostic = 5 };

void print_rows(const std::vector<csnt::DiagnosticRow>& rows) {
  for (const auto& r : rows) {
    std::printf("%-24s %-7s value=%.6g bound=%.6g t=%.6g\n", r.name.c_str(), csnt::to_string(r.verdict),
                r.value, r.bound, r.t);
  }
}

int report(const csnt::RunOutcome& out) {
  print_rows(out.rows);
  std::printf("output: %s\n", out.dir.string().c_str());
  return out.failed() ? kDiagnostic : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressible non-Newtonian Stokes simulator and verification harness"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker thread cap (default: all cores)")->check(CLI::NonNegativeNumber);

  std::string config_path, kind, out_dir;
  auto* run = app.add_subcommand("run", "Run a simulation described by a config file");
  run->add_option("--config", config_path, "Config file (key = value)")->required();
  run->add_option("--kind", kind, "Override the experiment kind")
      ->check(CLI::IsMember({"single", "fixed_point", "ladder"}));
  run->add_option("--out", out_dir, "Output directory");

  auto* ladder = app.add_subcommand("ladder", "Regularization ladder (run --kind ladder)");
  ladder->add_option("--config", config_path, "Config file (key = value)")->required();
  ladder->add_option("--out", out_dir, "Output directory");

  std::string snapshot_dir, reference_dir, checks_arg;
  bool dump_cubes = false;
  auto* diagnose = app.add_subcommand("diagnose", "Run diagnostic checks on a snapshot directory");
  diagnose->add_option("snapshot_dir", snapshot_dir, "Directory with rho_*.bin and u_*.bin")->required();
  diagnose->add_option("--checks", checks_arg, "Comma-separated checks (default: from the config)");
  diagnose->add_option("--config", config_path, "Config file (default: <snapshot_dir>/manifest.txt)");
  diagnose->add_option("--reference", reference_dir, "Reference snapshot directory for the gronwall check");
  diagnose->add_flag("--dump-cubes", dump_cubes, "Write per-cube oscillations to cube_dump.csv");

  std::string fixture_dir = "tests/fixtures";
  auto* fixtures = app.add_subcommand("fixtures", "Fixture maintenance");
  fixtures->require_subcommand(1);
  auto* regenerate = fixtures->add_subcommand("regenerate", "Recompute the pinned regression fixtures");
  regenerate->add_option("--dir", fixture_dir, "Fixture directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  if (threads > 0) csnt::set_thread_limit(threads);

  try {
    if (*run || *ladder) {
      const csnt::RunConfig config = csnt::load_config(config_path, *ladder ? "ladder" : kind);
      return report(csnt::execute_run(config, out_dir));
    }
    if (*diagnose) {
      std::vector<std::string> checks;
      std::stringstream ss(checks_arg);
      for (std::string item; std::getline(ss, item, ',');) {
        if (!item.empty()) checks.push_back(item);
      }
      return report(csnt::diagnose_directory(snapshot_dir, checks, config_path, reference_dir, dump_cubes));
    }
    if (*regenerate) {
      for (const auto& path : csnt::regenerate_fixtures(fixture_dir)) std::printf("wrote %s\n", path.string().c_str());
      return kOk;
    }
  } catch (const csnt::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const csnt::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kData;
  } catch (const csnt::SolverError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return kSolver;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kData;
  }
  return kOk;
}
