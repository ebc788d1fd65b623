#include "csnt/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <array>
#include <random>
#include <set>
#include <sstream>

#include "csnt/errors.hpp"
#include "csnt/fields.hpp"
#include "csnt/snapshot_io.hpp"

namespace csnt {

namespace {

const std::vector<std::string> kRequired = {"gamma", "dim", "n", "T", "dt", "delta", "epsilon"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') || (v.front() == '\'' && v.back() == '\''))) {
    return v.substr(1, v.size() - 2);
  }
  return v;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

class Reader {
 public:
  explicit Reader(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  std::string str(const std::string& key, const std::string& def) const {
    const auto it = kv_.find(key);
    return it == kv_.end() ? def : it->second;
  }

  double real(const std::string& key, double def) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    return parse_real(key, it->second);
  }

  long integer(const std::string& key, long def) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    const std::string& v = it->second;
    long out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) {
      throw ConfigError("key `" + key + "`: expected an integer, got `" + v + "`");
    }
    return out;
  }

  std::vector<double> reals(const std::string& key) const {
    std::vector<double> out;
    const auto it = kv_.find(key);
    if (it == kv_.end()) return out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_real(key, trim(item)));
    return out;
  }

  std::vector<std::string> words(const std::string& key) const {
    std::vector<std::string> out;
    const auto it = kv_.find(key);
    if (it == kv_.end()) return out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

  static double parse_real(const std::string& key, const std::string& v) {
    try {
      std::size_t used = 0;
      const double x = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      if (!std::isfinite(x)) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw ConfigError("key `" + key + "`: expected a finite real, got `" + v + "`");
    }
  }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = {
      "kind", "gamma", "dim", "n", "T", "dt", "cfl", "delta", "epsilon", "m", "beta",
      "model", "tau", "a", "hb_threshold",
      "momentum.tol", "momentum.max_iter",
      "fixed_point.mode", "fixed_point.tol", "fixed_point.max_iter", "fixed_point.relaxation",
      "initial.kind", "initial.mean", "initial.amplitude", "initial.mode", "initial.path",
      "initial.mollify",
      "ladder.deltas", "ladder.epsilons",
      "snapshot_every", "seed", "output.dir",
      "diagnostics.checks", "diagnostics.theta", "diagnostics.k", "diagnostics.p",
      "diagnostics.gronwall_C"};
  return keys;
}

const std::vector<std::string>& default_checks() {
  static const std::vector<std::string> checks = {
      "energy_balance", "energy_monotone", "mass_monotone", "nonnegativity", "stress_bound",
      "cz_flux", "bmo_flux", "bogovskii_div_psi", "bogovskii_constant", "renormalized_identity",
      "constant_state_ode", "gronwall"};
  return checks;
}

std::string git_blob_sha1(const std::string& content) {
  const std::string header = "blob " + std::to_string(content.size()) + std::string(1, '\0');
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
  EVP_DigestUpdate(ctx, header.data(), header.size());
  EVP_DigestUpdate(ctx, content.data(), content.size());
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

RunConfig parse_config_text(const std::string& text, const std::string& kind_override) {
  std::map<std::string, std::string> kv;
  const std::set<std::string> known(known_config_keys().begin(), known_config_keys().end());
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected `key = value`");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = unquote(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (!known.count(key)) throw ConfigError("unknown config key `" + key + "` (line " + std::to_string(lineno) + ")");
    if (kv.count(key)) throw ConfigError("duplicate config key `" + key + "` (line " + std::to_string(lineno) + ")");
    kv[key] = value;
  }
  if (!kind_override.empty()) kv["kind"] = kind_override;
  for (const auto& k : kRequired) {
    if (!kv.count(k)) throw ConfigError("missing required config key `" + k + "`");
  }

  const Reader r(kv);
  RunConfig c;
  c.input_hash = git_blob_sha1(text);
  c.kind = r.str("kind", "single");
  if (c.kind != "single" && c.kind != "fixed_point" && c.kind != "ladder") {
    throw ConfigError("key `kind` must be single, fixed_point or ladder");
  }
  const double gamma = r.real("gamma", 1.0);
  const long dim = r.integer("dim", 2);
  const long n = r.integer("n", 64);
  if (dim < 1 || dim > 3) throw ConfigError("key `dim` must be 1, 2 or 3");
  c.coupled.grid = Grid(static_cast<int>(dim), static_cast<int>(n));

  c.model_name = r.str("model", "rational");
  c.tau = r.real("tau", 1.0);
  c.a = r.real("a", 1.0);
  c.hb_threshold = r.real("hb_threshold", 0.1);
  if (c.model_name == "rational") {
    c.coupled.model = ConstitutiveModel::rational(c.tau, c.a, gamma);
  } else if (c.model_name == "herschel_bulkley") {
    c.coupled.model = ConstitutiveModel::herschel_bulkley(c.tau, c.hb_threshold, gamma);
  } else {
    throw ConfigError("key `model` must be rational or herschel_bulkley");
  }

  auto& p = c.coupled.params;
  p.delta = r.real("delta", 0.0);
  p.epsilon = r.real("epsilon", 0.0);
  p.m = static_cast<int>(r.integer("m", 2));
  p.beta = static_cast<int>(r.integer("beta", RegularizationParams::minimal_beta(gamma)));
  c.coupled.T = r.real("T", 1.0);
  c.coupled.dt = r.real("dt", 1e-3);
  c.coupled.cfl = r.real("cfl", 0.5);
  c.coupled.momentum.tol = r.real("momentum.tol", c.coupled.momentum.tol);
  c.coupled.momentum.max_iter = static_cast<int>(r.integer("momentum.max_iter", c.coupled.momentum.max_iter));

  auto& fp = c.coupled.fixed_point;
  const std::string mode = r.str("fixed_point.mode", c.kind == "fixed_point" ? "global" : "per_step");
  if (mode == "per_step") {
    fp.mode = FixedPointOptions::Mode::PerStep;
  } else if (mode == "global") {
    fp.mode = FixedPointOptions::Mode::Global;
  } else {
    throw ConfigError("key `fixed_point.mode` must be per_step or global");
  }
  fp.tol = r.real("fixed_point.tol", fp.tol);
  fp.max_iter = static_cast<int>(r.integer("fixed_point.max_iter", fp.max_iter));
  fp.relaxation = r.real("fixed_point.relaxation", fp.relaxation);

  c.initial.kind = r.str("initial.kind", "cosine");
  if (c.initial.kind != "constant" && c.initial.kind != "cosine" && c.initial.kind != "random" &&
      c.initial.kind != "snapshot") {
    throw ConfigError("key `initial.kind` must be constant, cosine, random or snapshot");
  }
  c.initial.mean = r.real("initial.mean", 1.0);
  c.initial.amplitude = r.real("initial.amplitude", c.initial.kind == "constant" ? 0.0 : 0.3);
  c.initial.mode = static_cast<int>(r.integer("initial.mode", 1));
  c.initial.path = r.str("initial.path", "");
  if (c.initial.kind == "snapshot" && c.initial.path.empty()) {
    throw ConfigError("initial.kind = snapshot needs `initial.path`");
  }
  const std::string moll = r.str("initial.mollify", "false");
  if (moll != "true" && moll != "false") throw ConfigError("key `initial.mollify` must be true or false");
  c.coupled.mollify_initial = moll == "true";
  if (!(c.initial.mean > 0.0)) throw ConfigError("key `initial.mean` must be > 0");
  if (c.initial.kind != "snapshot" && c.initial.kind != "random" &&
      !(std::abs(c.initial.amplitude) < c.initial.mean)) {
    throw ConfigError("initial density must be positive: need |initial.amplitude| < initial.mean");
  }

  c.ladder_deltas = r.reals("ladder.deltas");
  c.ladder_epsilons = r.reals("ladder.epsilons");
  if (c.kind == "ladder") {
    if (c.ladder_deltas.empty()) c.ladder_deltas = {1e-2, 1e-3, 1e-4};
    for (double d : c.ladder_deltas) {
      if (!(d > 0.0)) throw ConfigError("`ladder.deltas` entries must be > 0");
    }
    if (c.ladder_epsilons.empty()) {
      // epsilon tied to delta with the base ratio
      const double ratio = p.delta > 0.0 ? p.epsilon / p.delta : 0.1;
      for (double d : c.ladder_deltas) c.ladder_epsilons.push_back(ratio * d);
    }
    if (c.ladder_epsilons.size() != c.ladder_deltas.size()) {
      throw ConfigError("`ladder.deltas` and `ladder.epsilons` must have the same length");
    }
  }

  c.snapshot_every = static_cast<int>(r.integer("snapshot_every", 1));
  if (c.snapshot_every < 0) throw ConfigError("key `snapshot_every` must be >= 0");
  const long seed = r.integer("seed", 0);
  if (seed < 0) throw ConfigError("key `seed` must be >= 0");
  c.seed = static_cast<std::uint64_t>(seed);
  c.output_dir = r.str("output.dir", "");
  c.checks = r.words("diagnostics.checks");
  if (c.checks.empty()) c.checks = default_checks();
  const std::set<std::string> valid(default_checks().begin(), default_checks().end());
  for (const auto& ch : c.checks) {
    if (!valid.count(ch)) throw ConfigError("unknown diagnostic check `" + ch + "`");
  }
  c.bogovskii_theta = r.real("diagnostics.theta", 2.0);
  c.truncation_k = r.real("diagnostics.k", 2.0);
  c.truncation_p = r.real("diagnostics.p", 2.0);
  c.gronwall_C = r.real("diagnostics.gronwall_C", 1.0);
  if (!(c.bogovskii_theta > 1.0)) throw ConfigError("key `diagnostics.theta` must be > 1");
  if (!(c.truncation_k >= 1.0)) throw ConfigError("key `diagnostics.k` must be >= 1");
  if (!(c.truncation_p > 1.0)) throw ConfigError("key `diagnostics.p` must be > 1");

  c.coupled.validate();

  auto& res = c.resolved;
  res["kind"] = c.kind;
  res["gamma"] = fmt(gamma);
  res["dim"] = std::to_string(dim);
  res["n"] = std::to_string(n);
  res["T"] = fmt(c.coupled.T);
  res["dt"] = fmt(c.coupled.dt);
  res["cfl"] = fmt(c.coupled.cfl);
  res["delta"] = fmt(p.delta);
  res["epsilon"] = fmt(p.epsilon);
  res["m"] = std::to_string(p.m);
  res["beta"] = std::to_string(p.beta);
  res["model"] = c.model_name;
  res["tau"] = fmt(c.tau);
  res["a"] = fmt(c.a);
  res["hb_threshold"] = fmt(c.hb_threshold);
  res["momentum.tol"] = fmt(c.coupled.momentum.tol);
  res["momentum.max_iter"] = std::to_string(c.coupled.momentum.max_iter);
  res["fixed_point.mode"] = to_string(fp.mode);
  res["fixed_point.tol"] = fmt(fp.tol);
  res["fixed_point.max_iter"] = std::to_string(fp.max_iter);
  res["fixed_point.relaxation"] = fmt(fp.relaxation);
  res["initial.kind"] = c.initial.kind;
  res["initial.mean"] = fmt(c.initial.mean);
  res["initial.amplitude"] = fmt(c.initial.amplitude);
  res["initial.mode"] = std::to_string(c.initial.mode);
  if (!c.initial.path.empty()) res["initial.path"] = c.initial.path.string();
  res["initial.mollify"] = moll;
  if (!c.ladder_deltas.empty()) res["ladder.deltas"] = join(c.ladder_deltas);
  if (!c.ladder_epsilons.empty()) res["ladder.epsilons"] = join(c.ladder_epsilons);
  res["snapshot_every"] = std::to_string(c.snapshot_every);
  res["seed"] = std::to_string(c.seed);
  if (!c.output_dir.empty()) res["output.dir"] = c.output_dir.string();
  res["diagnostics.checks"] = join(c.checks);
  res["diagnostics.theta"] = fmt(c.bogovskii_theta);
  res["diagnostics.k"] = fmt(c.truncation_k);
  res["diagnostics.p"] = fmt(c.truncation_p);
  res["diagnostics.gronwall_C"] = fmt(c.gronwall_C);
  return c;
}

RunConfig load_config(const std::filesystem::path& path, const std::string& kind_override) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file: " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str(), kind_override);
}

std::string manifest_text(const RunConfig& config) {
  std::ostringstream body;
  for (const auto& [k, v] : config.resolved) body << k << " = " << v << '\n';
  std::ostringstream os;
  os << "# csnt run manifest\n"
     << "# input_sha1 = " << config.input_hash << '\n'
     << "# resolved_sha1 = " << git_blob_sha1(body.str()) << '\n'
     << "# initial density: " << config.initial.kind
     << (config.coupled.mollify_initial ? ", mollified to |k| <= n/4 and floored at delta" : "")
     << '\n'
     << body.str();
  return os.str();
}

ScalarField initial_density(const RunConfig& config) {
  const Grid& grid = config.coupled.grid;
  const auto& ic = config.initial;
  if (ic.kind == "constant") return ScalarField(grid, ic.mean);
  if (ic.kind == "cosine") {
    const double amp = ic.amplitude, mean = ic.mean;
    const int mode = ic.mode;
    return ScalarField::sample(grid, [=](const auto& x) { return mean + amp * std::cos(mode * x[0]); });
  }
  if (ic.kind == "snapshot") {
    const Snapshot s = read_snapshot(ic.path);
    if (s.dim != grid.dim() || s.n != grid.n()) {
      throw DataError("initial snapshot grid does not match dim/n of the config");
    }
    ScalarField rho = to_scalar_field(s);
    if (min_value(rho) < 0.0) throw DataError("initial snapshot density is negative");
    return rho;
  }
  // random: positive trigonometric polynomial with |k_a| <= n/8
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const int cut = std::max(1, grid.n() / 8);
  const int d = grid.dim();
  struct Wave {
    std::array<int, 3> k;
    double c, s;
  };
  std::vector<Wave> waves;
  std::array<int, 3> k{0, 0, 0};
  const int span = 2 * cut + 1;
  const int total = static_cast<int>(std::pow(span, d));
  for (int idx = 0; idx < total; ++idx) {
    int rem = idx;
    for (int a = 0; a < d; ++a) {
      k[a] = rem % span - cut;
      rem /= span;
    }
    // one representative of each +-k pair
    int first = 0;
    for (int a = 0; a < d && first == 0; ++a) first = k[a];
    if (first <= 0) continue;
    double k2 = 0.0;
    for (int a = 0; a < d; ++a) k2 += k[a] * k[a];
    const double c = uni(rng) / (1.0 + k2), sn = uni(rng) / (1.0 + k2);
    waves.push_back({k, c, sn});
  }
  ScalarField f = ScalarField::sample(grid, [&](const std::array<double, 3>& x) {
    double v = 0.0;
    for (const auto& w : waves) {
      double phase = 0.0;
      for (int a = 0; a < d; ++a) phase += w.k[a] * x[a];
      v += w.c * std::cos(phase) + w.s * std::sin(phase);
    }
    return v;
  });
  const double amp = max_abs(f);
  const double scale = amp > 0.0 ? ic.amplitude / amp : 0.0;
  for (auto& v : f.values()) v = ic.mean + scale * v;
  if (min_value(f) <= 0.0) throw ConfigError("random initial density is not positive; lower initial.amplitude");
  return f;
}

}  // namespace csnt
