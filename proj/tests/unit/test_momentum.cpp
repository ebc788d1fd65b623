#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "csnt/errors.hpp"
#include "csnt/fields.hpp"
#include "csnt/momentum.hpp"

using namespace csnt;

namespace {

MomentumProblem make_problem(const Grid& g, const std::function<double(const std::array<double, 3>&)>& datum,
                             double eps = 1e-4) {
  return {ConstitutiveModel::default_model(2.0), {1e-3, eps, 2, 4}, ScalarField::sample(g, datum), std::nullopt};
}

VectorField random_field(const Grid& g, unsigned seed, int cut = 4, double amp = 0.3) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uni(-amp, amp);
  VectorField v(g);
  for (int c = 0; c < g.dim(); ++c) {
    std::vector<std::array<double, 4>> w;
    for (int a = -cut; a <= cut; ++a)
      for (int b = -cut; b <= cut; ++b) w.push_back({double(a), double(b), uni(rng), uni(rng)});
    v.set_component(c, ScalarField::sample(g, [&](const auto& x) {
      double s = 0.0;
      for (const auto& q : w) {
        const double ph = q[0] * x[0] + q[1] * x[1];
        s += (q[2] * std::cos(ph) + q[3] * std::sin(ph)) / (1.0 + q[0] * q[0] + q[1] * q[1]);
      }
      return s;
    }));
  }
  return project_solver_space(v);
}

}  // namespace

TEST_CASE("energy at zero and constant datum") {
  const Grid g(2, 16);
  const auto pb = make_problem(g, [](const auto& x) { return 1.0 + 0.5 * std::cos(x[0]); });
  CHECK(energy(pb, VectorField(g)) == 0.0);
  const auto flat = make_problem(g, [](const auto&) { return 2.0; });
  CHECK(energy(flat, VectorField(g)) == 0.0);
  const auto v = random_field(g, 1);
  CHECK(energy(flat, v) > 0.0);
}

TEST_CASE("energy lower bound by its quadratic part") {
  const Grid g(2, 32);
  const auto pb = make_problem(g, [](const auto& x) { return 1.0 + 0.5 * std::cos(x[0]); });
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const auto v = random_field(g, seed);
    const double lower = 0.5 * pb.params.epsilon * std::pow(lp_norm(laplacian_power(v, 2), 2.0), 2) +
                         0.5 * std::pow(lp_norm(jacobian(v), 2.0), 2) - inner(pb.rho_gamma, divergence(v));
    CHECK(energy(pb, v) >= lower - 1e-12);
  }
}

TEST_CASE("gradient at zero") {
  const Grid g(2, 32);
  const auto flat = make_problem(g, [](const auto&) { return 3.0; });
  CHECK(max_abs(energy_gradient(flat, VectorField(g))) <= 1e-14);
  const auto pb = make_problem(g, [](const auto& x) { return 1.0 + std::cos(x[0]); });
  const auto gr = energy_gradient(pb, VectorField(g));
  const auto expect = ScalarField::sample(g, [](const auto& x) { return -std::sin(x[0]); });
  CHECK(max_abs(gr.component_field(0) - expect) <= 1e-13);
  CHECK(max_abs(gr.component_field(1)) <= 1e-13);
}

TEST_CASE("gradient matches Richardson-extrapolated directional derivative") {
  const Grid g(2, 32);
  const auto pb = make_problem(g, [](const auto& x) { return 1.0 + 0.3 * std::cos(x[0] + x[1]); });
  for (unsigned seed = 10; seed < 14; ++seed) {
    const auto v = random_field(g, seed);
    const auto w = random_field(g, seed + 100);
    const double h = 1e-5;
    auto d = [&](double s) { return (energy(pb, v + s * w) - energy(pb, v - s * w)) / (2 * s); };
    const double fd = (4.0 * d(h / 2) - d(h)) / 3.0;
    const double an = inner(energy_gradient(pb, v), w);
    CHECK(std::abs(fd - an) <= 1e-6 * std::max(1.0, std::abs(an)));
  }
}

TEST_CASE("constant datum gives u = 0 immediately") {
  const Grid g(2, 32);
  const auto sol = solve_momentum(make_problem(g, [](const auto&) { return 1.7; }));
  CHECK(sol.converged());
  CHECK(sol.iterations <= 1);
  CHECK(max_abs(sol.u) == 0.0);
}

TEST_CASE("manufactured solution") {
  const Grid g(2, 64);
  auto pb = make_problem(g, [](const auto& x) { return 1.0 + 0.3 * std::cos(x[0]); });
  const auto ustar = VectorField::sample(
      g, [](const auto& x) { return std::array<double, 3>{std::sin(x[1]), std::sin(x[0]), 0.0}; });
  pb.forcing = energy_gradient(pb, ustar);
  const auto sol = solve_momentum(pb, {1e-11, 500});
  CHECK(sol.converged());
  CHECK(max_abs(sol.u - ustar) <= 1e-8);
}

TEST_CASE("solver certificates and energy identity") {
  const Grid g(2, 32);
  const auto pb = make_problem(g, [](const auto& x) { return 1.0 + 0.5 * std::cos(x[0]) * std::cos(2 * x[1]); });
  const auto sol = solve_momentum(pb, {1e-10, 500});
  REQUIRE(sol.converged());
  CHECK(sol.residual_norm <= 1e-10);
  for (int c = 0; c < 2; ++c) CHECK(std::abs(mean(sol.u.component_field(c))) <= 1e-12);
  const double lhs = dissipation(pb.model, pb.params, sol.u);
  const double rhs = inner(pb.rho_gamma, divergence(sol.u));
  CHECK(std::abs(lhs - rhs) <= 1e-6 * std::abs(lhs));
  CHECK(sol.certificate.grad_l2 == doctest::Approx(lp_norm(jacobian(sol.u), 2.0)));
  CHECK(std::isfinite(sol.certificate.w1inf));
  for (std::size_t i = 1; i < sol.history.size(); ++i) {
    CHECK(sol.history[i].energy <= sol.history[i - 1].energy + 1e-14 * std::max(1.0, std::abs(sol.history[i - 1].energy)));
  }
}

TEST_CASE("minimizer does not depend on the initial guess") {
  const Grid g(2, 32);
  const auto pb = make_problem(g, [](const auto& x) { return 1.0 + 0.4 * std::sin(x[0] - x[1]); });
  const double tol = 1e-10;
  const auto a = solve_momentum(pb, {tol, 500}, nullptr);
  const auto g1 = random_field(g, 77, 6, 1.0), g2 = random_field(g, 78, 6, 1.0);
  const auto b = solve_momentum(pb, {tol, 500}, &g1);
  const auto c = solve_momentum(pb, {tol, 500}, &g2);
  CHECK(lp_norm(b.u - c.u, 2.0) <= 10 * tol);
  CHECK(lp_norm(a.u - b.u, 2.0) <= 10 * tol);
}

TEST_CASE("formal eps = 0 mode disables the W1,inf certificate") {
  const Grid g(2, 16);
  const auto pb = make_problem(g, [](const auto& x) { return 1.0 + 0.2 * std::cos(x[0]); }, 0.0);
  const auto sol = solve_momentum(pb);
  CHECK(sol.converged());
  CHECK(std::isnan(sol.certificate.w1inf));
}

TEST_CASE("invalid problems") {
  const Grid g(2, 16);
  auto pb = make_problem(g, [](const auto& x) { return x[0] < 1.0 ? -1.0 : 1.0; });
  CHECK_THROWS_AS(solve_momentum(pb), NegativeDensity);
  auto nan = make_problem(g, [](const auto&) { return NAN; });
  CHECK_THROWS_AS(solve_momentum(nan), NonFiniteError);
}

TEST_CASE("history csv") {
  const Grid g(2, 16);
  const auto sol = solve_momentum(make_problem(g, [](const auto& x) { return 1.0 + 0.5 * std::cos(x[0]); }));
  const auto p = std::filesystem::temp_directory_path() / "csnt_history.csv";
  write_history_csv(p, sol);
  std::ifstream is(p);
  std::string header;
  std::getline(is, header);
  CHECK(header == "iter,energy,residual");
}
