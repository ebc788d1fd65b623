#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cmath>

#include "csnt/config.hpp"
#include "csnt/constitutive.hpp"
#include "csnt/continuity.hpp"
#include "csnt/coupling.hpp"
#include "csnt/diagnostics.hpp"
#include "csnt/errors.hpp"
#include "csnt/fields.hpp"
#include "csnt/momentum.hpp"
#include "csnt/parallel.hpp"
#include "csnt/runner.hpp"
#include "csnt/snapshot_io.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace csnt;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Grid grid_of(const Array& a) {
  if (a.ndim() < 1 || a.ndim() > 3) throw ConfigError("expected a 1-, 2- or 3-dimensional array");
  const auto n = a.shape(0);
  for (py::ssize_t i = 1; i < a.ndim(); ++i) {
    if (a.shape(i) != n) throw ConfigError("expected an array with equal sides");
  }
  return Grid(static_cast<int>(a.ndim()), static_cast<int>(n));
}

ScalarField to_field(const Array& a) {
  const Grid g = grid_of(a);
  return ScalarField(g, std::vector<double>(a.data(), a.data() + a.size()));
}

std::vector<py::ssize_t> shape_of(const Grid& g) { return std::vector<py::ssize_t>(g.dim(), g.n()); }

Array to_array(const ScalarField& f) {
  Array out(shape_of(f.grid()));
  std::copy(f.values().begin(), f.values().end(), out.mutable_data());
  return out;
}

Array to_array(const VectorField& u) {
  auto shape = shape_of(u.grid());
  shape.insert(shape.begin(), u.components());
  Array out(shape);
  double* p = out.mutable_data();
  for (int c = 0; c < u.components(); ++c) p = std::copy(u.component(c).begin(), u.component(c).end(), p);
  return out;
}

py::list rows_to_list(const std::vector<DiagnosticRow>& rows) {
  py::list out;
  for (const auto& r : rows) {
    out.append(py::dict("name"_a = r.name, "t"_a = r.t, "value"_a = r.value, "bound"_a = r.bound,
                        "verdict"_a = to_string(r.verdict), "note"_a = r.note));
  }
  return out;
}

py::dict trajectory_series(const TrajectoryState& t) {
  return py::dict("t"_a = t.times, "energy"_a = t.energy, "mass"_a = t.mass, "rho_min"_a = t.rho_min,
                  "rho_max"_a = t.rho_max, "dissipation"_a = t.dissipation, "grad_u_l2"_a = t.grad_u_l2);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Compressible non-Newtonian Stokes solver on the periodic torus";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<SolverError>(m, "SolverError", base.ptr());

  m.def("set_threads", &set_thread_limit, "n"_a);

  py::class_<ConstitutiveModel>(m, "ConstitutiveModel")
      .def_static("rational", &ConstitutiveModel::rational, "tau"_a, "a"_a, "gamma"_a)
      .def_static("herschel_bulkley", &ConstitutiveModel::herschel_bulkley, "tau"_a, "threshold"_a, "gamma"_a,
                  "flow_index"_a = 1.0)
      .def_static("default", &ConstitutiveModel::default_model, "gamma"_a)
      .def_property_readonly("name", &ConstitutiveModel::name)
      .def_property_readonly("gamma", &ConstitutiveModel::gamma)
      .def_property_readonly("bound_constant", &ConstitutiveModel::bound_constant)
      .def("mu0", [](const ConstitutiveModel& self, const Array& z) {
        return py::vectorize([&self](double x) { return self.mu0(x); })(z);
      }, "z"_a)
      .def("lam", [](const ConstitutiveModel& self, const Array& z) {
        return py::vectorize([&self](double x) { return self.lambda(x); })(z);
      }, "z"_a)
      .def("potential_F", &ConstitutiveModel::potential_F, "r"_a)
      .def("potential_Lambda", &ConstitutiveModel::potential_Lambda, "s"_a)
      .def("pressure", &ConstitutiveModel::pressure, "rho"_a);

  m.def(
      "solve_momentum",
      [](const Array& rho, double gamma, double delta, double epsilon, int mexp, int beta, double tol,
         int max_iter) {
        const ScalarField r = to_field(rho);
        const auto model = ConstitutiveModel::default_model(gamma);
        const RegularizationParams prm{delta, epsilon, mexp, beta};
        prm.validate(gamma, r.grid().dim());
        const MomentumProblem pb{model, prm, pressure(model, r), std::nullopt};
        const MomentumSolution sol = solve_momentum(pb, {tol, max_iter});
        return py::dict("u"_a = to_array(sol.u), "iterations"_a = sol.iterations,
                        "residual"_a = sol.residual_norm, "energy"_a = sol.energy_value,
                        "status"_a = to_string(sol.status),
                        "dissipation"_a = dissipation(model, prm, sol.u));
      },
      "rho"_a, "gamma"_a = 2.0, "delta"_a = 1e-3, "epsilon"_a = 1e-4, "m"_a = 2, "beta"_a = 4, "tol"_a = 1e-9,
      "max_iter"_a = 500);

  m.def("constant_state_decay", py::vectorize(&constant_state_decay), "rho0"_a, "delta"_a, "beta"_a, "t"_a);

  m.def(
      "bmo_norm", [](const Array& f, int shifts) {
        const ScalarField s = to_field(f);
        return bmo_norm(s, DyadicCubeSet::standard(s.grid(), shifts));
      },
      "f"_a, "shifts"_a = 2);

  m.def(
      "log_inequality_ratio",
      [](const Array& f, const Array& g, double q) {
        const ScalarField a = to_field(f), b = to_field(g);
        return log_inequality_ratio(a, b, q, DyadicCubeSet::standard(a.grid()));
      },
      "f"_a, "g"_a, "q"_a = 4.0);

  m.def("truncation", [](double k, double z) { return TruncationOperator(k).value(z); }, "k"_a, "z"_a);
  m.def("pk", [](double k, double p, double rho) { return TruncationOperator(k).pk(rho, p); }, "k"_a, "p"_a,
        "rho"_a);

  m.def("gronwall_envelope", &gronwall_envelope, "t"_a, "C"_a, "eta"_a);
  m.def(
      "gronwall_compare",
      [](const std::vector<double>& t, const std::vector<double>& y, double C, double tol) {
        const GronwallResult g = gronwall_compare(t, y, C, tol);
        return py::dict("passed"_a = g.pass, "max_excess"_a = g.max_excess, "etas"_a = g.etas);
      },
      "t"_a, "y"_a, "C"_a = 1.0, "tol"_a = 1e-8);

  m.def("git_blob_sha1", &git_blob_sha1, "content"_a);

  m.def(
      "parse_config",
      [](const std::string& text, const std::string& kind) { return parse_config_text(text, kind).resolved; },
      "text"_a, "kind"_a = "");

  m.def(
      "run",
      [](const std::string& text, const std::filesystem::path& out, const std::string& kind) {
        const RunOutcome o = execute_run(parse_config_text(text, kind), out);
        return py::dict("dir"_a = o.dir, "rows"_a = rows_to_list(o.rows), "failed"_a = o.failed(),
                        "series"_a = trajectory_series(o.trajectory));
      },
      "config_text"_a, "out"_a, "kind"_a = "");

  m.def(
      "diagnose",
      [](const std::filesystem::path& dir, const std::vector<std::string>& checks,
         const std::optional<std::filesystem::path>& config,
         const std::optional<std::filesystem::path>& reference) {
        const RunOutcome o = diagnose_directory(dir, checks, config.value_or(std::filesystem::path{}),
                                                reference.value_or(std::filesystem::path{}));
        return py::dict("rows"_a = rows_to_list(o.rows), "failed"_a = o.failed());
      },
      "dir"_a, "checks"_a = std::vector<std::string>{}, "config"_a = py::none(), "reference"_a = py::none());

  m.def(
      "read_snapshot",
      [](const std::filesystem::path& path) {
        const Snapshot s = read_snapshot(path);
        if (s.components == 1) return py::make_tuple(s.time, to_array(to_scalar_field(s)));
        return py::make_tuple(s.time, to_array(to_vector_field(s)));
      },
      "path"_a);
}
