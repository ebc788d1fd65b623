#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <random>

#include "csnt/diagnostics.hpp"
#include "csnt/errors.hpp"
#include "csnt/fields.hpp"
#include "csnt/fixtures.hpp"

using namespace csnt;

namespace {

// Exhaustive scan of the shifted dyadic cubes of a 2-d field.
double brute_force_bmo_2d(const ScalarField& f, int depth, const std::vector<int>& shifts) {
  const int n = f.grid().n();
  double best = 0.0;
  for (int s : shifts) {
    for (int j = 0; j <= depth; ++j) {
      const int side = n >> j;
      for (int c0 = 0; c0 < n; c0 += side) {
        for (int c1 = 0; c1 < n; c1 += side) {
          double sum = 0.0;
          for (int a = 0; a < side; ++a)
            for (int b = 0; b < side; ++b) sum += f[((c0 + s + a) % n) * n + (c1 + s + b) % n];
          const double m = sum / (side * side);
          double osc = 0.0;
          for (int a = 0; a < side; ++a)
            for (int b = 0; b < side; ++b) osc += std::abs(f[((c0 + s + a) % n) * n + (c1 + s + b) % n] - m);
          best = std::max(best, osc / (side * side));
        }
      }
    }
  }
  return best;
}

TrajectoryState trajectory_of(const std::vector<double>& times, const ScalarField& rho, const VectorField& u) {
  TrajectoryState t;
  t.times = times;
  t.rho.assign(times.size(), rho);
  t.u.assign(times.size(), u);
  return t;
}

ScalarField random_band_limited(const Grid& g, int cut, unsigned seed, double amp) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<std::array<double, 4>> w;
  for (int a = -cut; a <= cut; ++a)
    for (int b = -cut; b <= cut; ++b) w.push_back({double(a), double(b), uni(rng), uni(rng)});
  ScalarField f = ScalarField::sample(g, [&](const auto& x) {
    double s = 0.0;
    for (const auto& q : w) s += q[2] * std::cos(q[0] * x[0] + q[1] * x[1]) + q[3] * std::sin(q[0] * x[0] + q[1] * x[1]);
    return s;
  });
  const double m = max_abs(f);
  for (auto& v : f.values()) v = 1.0 + amp * v / m;
  return f;
}

}  // namespace

TEST_CASE("effective viscous flux pointwise values") {
  const Grid g(2, 8);
  const auto m = ConstitutiveModel::default_model(2.0);
  CHECK(max_abs(effective_viscous_flux(VectorField(g), ScalarField(g), m)) == 0.0);
  const auto e = effective_viscous_flux(VectorField(g), ScalarField(g, 1.0), m);
  CHECK(e[5] == -1.0);
  // div u = cos x1 reaches 1 at x1 = 0, where G = 2 + 1/2 with rho = 0
  const auto u = VectorField::sample(g, [](const auto& x) { return std::array<double, 3>{std::sin(x[0]), 0.0, 0.0}; });
  const auto gu = effective_viscous_flux(u, ScalarField(g), m);
  CHECK(gu[0] == doctest::Approx(2.5).epsilon(1e-14));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double c = std::cos(g.coords(i)[0]);
    CHECK(gu[i] == doctest::Approx((2.0 + 1.0 / (1.0 + std::abs(c))) * c).epsilon(1e-13));
  }
}

TEST_CASE("cz flux: Newtonian limit is zero") {
  const Grid g(2, 16);
  const auto newtonian = ConstitutiveModel::custom([](double) { return 0.0; }, [](double) { return 0.0; }, 1.0, 2.0);
  const auto u = VectorField::sample(
      g, [](const auto& x) { return std::array<double, 3>{std::sin(x[0]) * std::cos(x[1]), std::sin(2 * x[1]), 0.0}; });
  CHECK(max_abs(cz_flux(u, newtonian)) <= 1e-15);
}

TEST_CASE("cz flux against a dense DFT convolution") {
  const Grid g(2, 16);
  const int n = 16;
  const auto m = ConstitutiveModel::default_model(2.0);
  const auto u = VectorField::sample(g, [](const auto& x) { return std::array<double, 3>{std::sin(x[0]), 0.0, 0.0}; });
  const auto got = cz_flux(u, m);
  // S = mu0(|Du|) Du with Du = diag(cos x1, 0), so only S_00 = cos x1 / (1 + |cos x1|).
  std::vector<double> s00(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double c = std::cos(g.coords(i)[0]);
    s00[i] = c / (1.0 + std::abs(c));
  }
  const int cut = n / 3;
  std::vector<double> expect(g.size(), 0.0);
  for (int k0 = -n / 2 + 1; k0 < n / 2; ++k0) {
    for (int k1 = -n / 2 + 1; k1 < n / 2; ++k1) {
      if (std::abs(k0) > cut || std::abs(k1) > cut || (k0 == 0 && k1 == 0)) continue;
      std::complex<double> hat = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const auto x = g.coords(i);
        hat += s00[i] * std::exp(std::complex<double>(0.0, -(k0 * x[0] + k1 * x[1])));
      }
      hat /= static_cast<double>(g.size());
      const double mult = -static_cast<double>(k0 * k0) / (k0 * k0 + k1 * k1);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const auto x = g.coords(i);
        expect[i] += (mult * hat * std::exp(std::complex<double>(0.0, k0 * x[0] + k1 * x[1]))).real();
      }
    }
  }
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(got[i] - expect[i]) <= 1e-12);
}

TEST_CASE("BMO exact scan and invariants") {
  const Grid g(2, 64);
  const auto f = ScalarField::sample(g, [](const auto& x) { return std::cos(x[0]); });
  const DyadicCubeSet cubes(g, 4, 2);
  CHECK(cubes.cube_count() == 2 * (1 + 4 + 16 + 64 + 256));
  const double b = bmo_norm(f, cubes);
  CHECK(b == doctest::Approx(brute_force_bmo_2d(f, 4, {0, 64 / 3})).epsilon(1e-14));
  CHECK(b == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-2));
  CHECK(bmo_norm(ScalarField(g, 3.0), cubes) == 0.0);

  ScalarField shifted = f;
  for (auto& v : shifted.values()) v += 0.5;
  CHECK(bmo_norm(shifted, cubes) == doctest::Approx(b).epsilon(1e-14));
  CHECK(bmo_norm(-3.0 * f, cubes) == doctest::Approx(3.0 * b).epsilon(1e-12));

  const auto r = random_band_limited(g, 8, 5, 0.9);
  CHECK(bmo_norm(r, cubes) <= 2.0 * max_abs(r));

  std::vector<CubeOscillation> dump;
  bmo_norm(f, cubes, &dump);
  CHECK(dump.size() == cubes.cube_count());

  CHECK_THROWS_AS(DyadicCubeSet(g, 5, 2), ConfigError);
  CHECK_THROWS_AS(DyadicCubeSet(g, 2, 5), ConfigError);
}

TEST_CASE("BMO of a log profile is resolution stable") {
  auto value = [](int n) {
    const Grid g(2, n);
    const auto f = ScalarField::sample(g, [](const auto& x) { return std::log(0.01 + 1.0 - std::cos(x[0])); });
    return std::make_pair(bmo_norm(f, DyadicCubeSet::standard(g)), max_abs(f));
  };
  const auto [b64, s64] = value(64);
  const auto [b128, s128] = value(128);
  CHECK(std::abs(b128 / b64 - 1.0) < 0.1);
  CHECK(s128 >= s64);
}

TEST_CASE("logarithmic inequality families") {
  const Grid g(2, 64);
  const auto cubes = DyadicCubeSet::standard(g);
  const auto f = ScalarField::sample(g, [](const auto& x) { return std::cos(x[0]); });
  const auto t0 = log_inequality_terms(f, ScalarField(g, 2.0), 4.0, cubes);
  CHECK(t0.lhs <= 1e-12);
  CHECK(t0.ratio <= 1e-12);
  const auto fams = log_inequality_families(g);
  CHECK(fams.size() == 1 + 3 + 21);
  double c = 0.0;
  for (const auto& fam : fams) {
    CHECK(std::isfinite(fam.terms.ratio));
    c = std::max(c, fam.terms.ratio);
  }
  CHECK(c < 10.0);
  CHECK(fams.back().terms.g_l1 == doctest::Approx(std::ldexp(1.0, -20)).epsilon(1e-12));
  CHECK_THROWS_AS(log_inequality_terms(f, f, 2.0, cubes), ConfigError);
}

TEST_CASE("truncation profile") {
  for (double k : {1.0, 1.5, 2.0, 4.0, 8.0}) {
    const TruncationOperator op(k);
    CHECK(op.value(0.0) == 0.0);
    CHECK(op.value(0.5 * k) == 0.5 * k);
    CHECK(op.value(2.0 * k + 3.0) == doctest::Approx(k + 1.0));
    double prev = 0.0;
    for (int i = 0; i <= 2000; ++i) {
      const double z = 0.01 * i;
      const double v = op.value(z);
      CHECK(v >= prev - 1e-15);
      CHECK(v <= std::min(z, k + 1.0) + 1e-15);
      CHECK(op.derivative(z) >= -1e-15);
      CHECK(op.derivative(z) <= 1.0 + 1e-15);
      prev = v;
    }
  }
  for (int i = 0; i <= 400; ++i) {
    const double z = 0.05 * i;
    double prev = 0.0;
    for (double k : {1.0, 2.0, 4.0, 8.0}) {
      const double v = TruncationOperator(k).value(z);
      CHECK(v >= prev - 1e-15);
      prev = v;
    }
  }
  CHECK_THROWS_AS(TruncationOperator(0.5), ConfigError);
}

TEST_CASE("renormalization P_k") {
  const TruncationOperator op(4.0);
  CHECK(op.pk(0.0, 2.0) == 0.0);
  for (double r : {0.3, 1.0, 2.0}) {
    for (double p : {1.5, 2.0, 3.0}) CHECK(op.pk(r, p) == doctest::Approx(std::pow(r, p) / (p - 1.0)).epsilon(1e-12));
  }
  // derivative against finite differences across the blend
  for (double r : {3.0, 4.5, 5.5, 7.0}) {
    const double h = 1e-5;
    const double fd = (op.pk(r + h, 2.0) - op.pk(r - h, 2.0)) / (2 * h);
    CHECK(op.pk_derivative(r, 2.0) == doctest::Approx(fd).epsilon(1e-7));
  }
  const Grid g(2, 32);
  const auto rho = ScalarField::sample(g, [](const auto& x) { return 1.0 + std::cos(x[0]); });
  double prev = 0.0;
  for (double k : {1.0, 2.0, 4.0, 8.0}) {
    const double v = integrate(pk_apply(TruncationOperator(k), 2.0, rho));
    CHECK(v >= prev - 1e-12);
    prev = v;
  }
  double limit = 0.0;
  for (double r : rho.values()) limit += r * r;
  CHECK(prev == doctest::Approx(limit * g.cell_volume()).epsilon(1e-12));
}

TEST_CASE("renormalized identity vanishes without motion or penalty") {
  const Grid g(2, 16);
  const auto rho = ScalarField::sample(g, [](const auto& x) { return 1.0 + 0.2 * std::cos(x[0]); });
  const auto traj = trajectory_of({0.0, 0.1, 0.2}, rho, VectorField(g));
  const auto b = renormalized_identity_residual(traj, TruncationOperator(2.0), 2.0, {0.0, 1e-4, 2, 4});
  for (double r : b.residual) CHECK(r == 0.0);
  const auto e = energy_balance(traj, ConstitutiveModel::default_model(2.0), {0.0, 1e-4, 2, 4});
  for (double r : e.residual) CHECK(r == 0.0);
}

TEST_CASE("Bogovskii field") {
  const Grid g(2, 32);
  CHECK(max_abs(bogovskii_field(ScalarField(g, 1.3), 2.0)) == 0.0);
  const auto rho = random_band_limited(g, 5, 8, 0.5);
  const auto traj = trajectory_of({0.0}, rho, VectorField(g));
  const auto rep = bogovskii_pressure_test(traj, ConstitutiveModel::default_model(2.0), {1e-3, 1e-4, 2, 4}, 2.0);
  CHECK(rep.div_psi_residual <= 1e-10);
  const auto flat = trajectory_of({0.0, 1.0}, ScalarField(g, 2.0), VectorField(g));
  const auto fr = bogovskii_pressure_test(flat, ConstitutiveModel::default_model(2.0), {1e-3, 1e-4, 2, 4}, 2.0);
  CHECK(fr.identity_residual <= 1e-14);
  CHECK(fr.lhs == doctest::Approx(16.0 * g.volume()));
  CHECK_THROWS_AS(bogovskii_pressure_test(flat, ConstitutiveModel::default_model(2.0), {}, 1.0), ConfigError);
}

TEST_CASE("Gronwall envelopes") {
  std::vector<double> t;
  for (int i = 0; i <= 50; ++i) t.push_back(0.02 * i);
  for (double eta : {1e-2, 1e-6, 1e-12}) {
    const double C = 1.0;
    const auto z = gronwall_envelope(t, C, eta);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double oracle = std::exp(1.0 - (1.0 - std::log(eta)) * std::exp(-C * t[i]));
      CHECK(z[i] == doctest::Approx(oracle).epsilon(1e-9));
    }
  }
  const std::vector<double> zero(t.size(), 0.0);
  CHECK(gronwall_compare(t, zero, 1.0).pass);
  CHECK_FALSE(gronwall_compare(t, t, 0.1).pass);
  CHECK_THROWS_AS(gronwall_compare(t, std::vector<double>(3, 0.0), 1.0), DataError);
}

TEST_CASE("BMO of cos x1 matches the pinned values") {
  const auto pinned = read_fixture_values(std::filesystem::path(CSNT_FIXTURE_DIR) / "bmo_cos.txt");
  for (int n : {32, 64, 128}) {
    const Grid g(2, n);
    const auto f = ScalarField::sample(g, [](const auto& x) { return std::cos(x[0]); });
    CHECK(bmo_norm(f, DyadicCubeSet::standard(g)) == doctest::Approx(pinned.at("n" + std::to_string(n))).epsilon(1e-12));
  }
}
