#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "csnt/coupling.hpp"

namespace csnt {

/// Initial density: `constant` (mean), `cosine` (mean + amplitude cos(mode x1)),
/// `random` (positive band-limited field from `seed`) or `snapshot` (path).
struct InitialCondition {
  std::string kind = "cosine";
  double mean = 1.0;
  double amplitude = 0.3;
  int mode = 1;
  std::filesystem::path path;
};

/// Every setting of a batch run. Built only through parse_config_text, which
/// validates all keys before any computation starts.
struct RunConfig {
  std::string kind = "single";  // single | fixed_point | ladder
  std::string model_name = "rational";
  double tau = 1.0;
  double a = 1.0;
  double hb_threshold = 0.1;
  CoupledConfig coupled;
  InitialCondition initial;
  std::vector<double> ladder_deltas;
  std::vector<double> ladder_epsilons;
  int snapshot_every = 1;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  std::vector<std::string> checks;
  double bogovskii_theta = 2.0;
  double truncation_k = 2.0;
  double truncation_p = 2.0;
  double gronwall_C = 1.0;

  /// Canonical key = value pairs after defaults are applied.
  std::map<std::string, std::string> resolved;
  /// git-style blob SHA-1 of the config text as read.
  std::string input_hash;
};

/// Keys accepted by the parser.
const std::vector<std::string>& known_config_keys();

/// Parses `key = value` lines (dotted keys, `#` comments, optional quotes).
/// Throws ConfigError for syntax errors, unknown or duplicate keys, missing
/// required keys (gamma, dim, n, T, dt, delta, epsilon) and invalid values.
/// A non-empty `kind_override` replaces the `kind` key of the text.
RunConfig parse_config_text(const std::string& text, const std::string& kind_override = "");
RunConfig load_config(const std::filesystem::path& path, const std::string& kind_override = "");

/// Manifest: the resolved configuration in the input format, preceded by
/// comment lines carrying the input and resolved hashes. Parsing it back
/// yields the same resolved configuration.
std::string manifest_text(const RunConfig& config);

/// SHA-1 of "blob <size>\0<content>", as computed by git.
std::string git_blob_sha1(const std::string& content);

/// Density at t = 0 for the configured initial condition.
ScalarField initial_density(const RunConfig& config);

/// The checks run when none are requested.
const std::vector<std::string>& default_checks();

}  // namespace csnt
