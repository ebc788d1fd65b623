#include "csnt/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "csnt/config.hpp"
#include "csnt/continuity.hpp"
#include "csnt/diagnostics.hpp"
#include "csnt/errors.hpp"
#include "csnt/runner.hpp"

namespace csnt {

namespace fs = std::filesystem;

const std::string& benchmark_config_text() {
  static const std::string text =
      "# smooth benchmark\n"
      "kind = single\n"
      "gamma = 2\n"
      "dim = 2\n"
      "n = 64\n"
      "T = 0.25\n"
      "dt = 1e-3\n"
      "delta = 1e-3\n"
      "epsilon = 1e-4\n"
      "m = 2\n"
      "initial.kind = cosine\n"
      "initial.mean = 1\n"
      "initial.amplitude = 0.3\n"
      "ladder.deltas = 1e-2, 1e-3, 1e-4\n"
      "snapshot_every = 50\n";
  return text;
}

const std::string& constant_state_config_text() {
  static const std::string text =
      "# constant state: u = 0 and rho' = -delta rho^beta\n"
      "kind = single\n"
      "gamma = 2\n"
      "dim = 2\n"
      "n = 8\n"
      "T = 1\n"
      "dt = 1e-4\n"
      "delta = 0.1\n"
      "epsilon = 1e-4\n"
      "beta = 4\n"
      "initial.kind = constant\n"
      "initial.mean = 1\n"
      "snapshot_every = 1000\n"
      "diagnostics.checks = constant_state_ode, energy_monotone, mass_monotone, nonnegativity\n";
  return text;
}

std::map<std::string, double> read_fixture_values(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot read fixture " + path.string());
  std::map<std::string, double> out;
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    key.erase(std::remove_if(key.begin(), key.end(), ::isspace), key.end());
    try {
      out[key] = std::stod(line.substr(eq + 1));
    } catch (const std::exception&) {
      throw DataError("fixture " + path.string() + ": bad value for `" + key + "`");
    }
  }
  return out;
}

std::vector<fs::path> regenerate_fixtures(const fs::path& dir) {
  fs::create_directories(dir);
  std::vector<fs::path> written;

  {
    const auto fams = log_inequality_families(Grid(2, 64), 4.0);
    double c = 0.0;
    for (const auto& f : fams) c = std::max(c, f.terms.ratio);
    const fs::path p = dir / "log_inequality.txt";
    std::ofstream os(p);
    os << "# largest ratio |int f g| / (bmo |g|_1 bracket) over the test families, n = 64, q = 4\n"
       << std::setprecision(17) << "constant = " << c << '\n'
       << "families = " << fams.size() << '\n';
    written.push_back(p);
  }
  {
    const fs::path p = dir / "bmo_cos.txt";
    std::ofstream os(p);
    os << "# dyadic-BMO lower bound of cos x1 on the 2-torus\n" << std::setprecision(17);
    for (int n : {32, 64, 128}) {
      const Grid g(2, n);
      const ScalarField f = ScalarField::sample(g, [](const auto& x) { return std::cos(x[0]); });
      os << "n" << n << " = " << bmo_norm(f, DyadicCubeSet::standard(g)) << '\n';
    }
    written.push_back(p);
  }
  {
    const RunConfig c = parse_config_text(constant_state_config_text());
    const fs::path p = dir / "constant_state.csv";
    std::ofstream os(p);
    os << "t,rho\n" << std::setprecision(17);
    const auto& prm = c.coupled.params;
    for (int i = 0; i <= 100; ++i) {
      const double t = c.coupled.T * i / 100.0;
      os << t << ',' << constant_state_decay(c.initial.mean, prm.delta, prm.beta, t) << '\n';
    }
    written.push_back(p);
  }
  {
    const RunConfig c = parse_config_text(benchmark_config_text());
    const fs::path work = fs::temp_directory_path() / "csnt_fixture_benchmark";
    fs::remove_all(work);
    const RunOutcome out = execute_run(c, work);
    const fs::path p = dir / "benchmark_verdicts.csv";
    std::ofstream os(p);
    os << "name,verdict\n";
    for (const auto& r : out.rows) os << r.name << ',' << to_string(r.verdict) << '\n';
    fs::remove_all(work);
    written.push_back(p);
  }
  return written;
}

}  // namespace csnt
