#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace csnt {

/// Configuration text of the smooth benchmark: rho0 = 1 + 0.3 cos x1,
/// gamma = 2, delta = 1e-3, eps = 1e-4, m = 2, n = 64, dt = 1e-3, T = 0.25.
const std::string& benchmark_config_text();

/// Configuration text of the constant-state decay run (rho0 = 1, u = 0).
const std::string& constant_state_config_text();

/// Recomputes and writes the regression fixtures into `dir`:
///   log_inequality.txt   pinned constant of the logarithmic inequality harness
///   bmo_cos.txt          dyadic-BMO of cos x1 at n = 32, 64, 128
///   constant_state.csv   exact decay t,rho for the constant-state run
///   benchmark_verdicts.csv  check name and verdict on the benchmark
/// Returns the paths written.
std::vector<std::filesystem::path> regenerate_fixtures(const std::filesystem::path& dir);

/// Reads `key = value` lines with real values (`#` comments allowed).
std::map<std::string, double> read_fixture_values(const std::filesystem::path& path);

}  // namespace csnt
