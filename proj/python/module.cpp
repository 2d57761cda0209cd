#include <optional>
#include <string>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bwretrieve/error.hpp"
#include "bwretrieve/objective.hpp"
#include "bwretrieve/sensing.hpp"
#include "bwretrieve/smoothing.hpp"
#include "bwretrieve/solver.hpp"
#include "bwretrieve/verify.hpp"

namespace py = pybind11;
using namespace bwretrieve;

namespace {

Measurements measurements(const Vector& y, std::optional<Vector> truth = std::nullopt) {
  return {y, std::move(truth)};
}

ObjectiveContext context(const SensingEnsemble& e, const Vector& y, double epsilon) {
  return ObjectiveContext(e.active(), y, epsilon);
}

SmoothingSchedule schedule(const std::string& method, double epsilon0, double epsilon_min,
                           double gamma, double c_loss, double fixed_epsilon) {
  SmoothingSchedule s;
  s.epsilon0 = epsilon0;
  s.epsilon_min = epsilon_min;
  if (method == "bwgd") s.kind = FixedSmoothing{0.0};
  else if (method == "fixed") s.kind = FixedSmoothing{fixed_epsilon};
  else if (method == "loss") s.kind = LossHeuristic{c_loss};
  else if (method == "quantile") s.kind = QuantileHeuristic{gamma};
  else if (method == "oracle") s.kind = OracleSmoothing{};
  else throw Error(ErrorKind::InvalidConfiguration, "unknown method '" + method + "'");
  return s;
}

}  // namespace

PYBIND11_MODULE(_bwretrieve, m) {
  m.doc() = "BWGD-DS phase retrieval core";

  static py::exception<Error> error(m, "BwretrieveError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
    }
  });

  py::class_<SensingEnsemble>(m, "Ensemble")
      .def_static("from_vectors", &SensingEnsemble::from_vectors, py::arg("raw"),
                  py::arg("seed") = 0, "Wrap a d x n matrix of raw sensing vectors (columns).")
      .def_property_readonly("n", &SensingEnsemble::n)
      .def_property_readonly("d", &SensingEnsemble::d)
      .def_property_readonly("seed", &SensingEnsemble::seed)
      .def_property_readonly("raw", &SensingEnsemble::raw)
      .def_property_readonly("whitened", &SensingEnsemble::whitened)
      .def_property_readonly("cholesky_factor", &SensingEnsemble::cholesky_factor)
      .def_property_readonly("is_whitened", &SensingEnsemble::is_whitened)
      .def("whiten", [](const SensingEnsemble& e) { return whiten(e); })
      .def("covariance", [](const SensingEnsemble& e) { return empirical_covariance(e); });

  m.def("generate_ensemble", &generate_ensemble, py::arg("d"), py::arg("n"), py::arg("seed"));
  m.def("constant_unit_signal", &constant_unit_signal, py::arg("d"));
  m.def(
      "synthesize_measurements",
      [](const SensingEnsemble& e, const Vector& u) { return synthesize_measurements(e, u).values; },
      py::arg("ensemble"), py::arg("u_star"));
  m.def("unwhiten", &unwhiten, py::arg("cholesky_factor"), py::arg("u"));

  m.def(
      "amplitude_loss",
      [](const SensingEnsemble& e, const Vector& y, const Vector& u) {
        return amplitude_loss(context(e, y, 0.0), u);
      },
      py::arg("ensemble"), py::arg("y"), py::arg("u"));
  m.def(
      "smoothed_loss",
      [](const SensingEnsemble& e, const Vector& y, const Vector& u, double eps) {
        return smoothed_loss(context(e, y, eps), u);
      },
      py::arg("ensemble"), py::arg("y"), py::arg("u"), py::arg("epsilon"));
  m.def(
      "smoothed_gradient",
      [](const SensingEnsemble& e, const Vector& y, const Vector& u, double eps) {
        return smoothed_grad(context(e, y, eps), u).gradient;
      },
      py::arg("ensemble"), py::arg("y"), py::arg("u"), py::arg("epsilon"));
  m.def(
      "smoothed_hessian",
      [](const SensingEnsemble& e, const Vector& y, const Vector& u, double eps) {
        return smoothed_hessian(context(e, y, eps), u);
      },
      py::arg("ensemble"), py::arg("y"), py::arg("u"), py::arg("epsilon"));
  m.def(
      "bwgd_ds_step",
      [](const SensingEnsemble& e, const Vector& y, const Vector& u, double eps) {
        return bwgd_ds_step(SolverState::start(u, eps), context(e, y, eps)).u;
      },
      py::arg("ensemble"), py::arg("y"), py::arg("u"), py::arg("epsilon"));
  m.def(
      "newton_step",
      [](const SensingEnsemble& e, const Vector& y, const Vector& u) {
        return newton_step_amplitude(context(e, y, 0.0), u).u;
      },
      py::arg("ensemble"), py::arg("y"), py::arg("u"));
  m.def(
      "quantile", [](std::vector<double> v, double gamma) { return quantile(v, gamma); },
      py::arg("values"), py::arg("gamma"));

  m.def(
      "spectral_init",
      [](const SensingEnsemble& e, const Vector& y, const std::string& weighting) {
        SpectralOptions o;
        if (weighting == "squared") o.weighting = SpectralWeighting::Squared;
        else if (weighting != "exponential")
          throw Error(ErrorKind::InvalidConfiguration, "weighting must be exponential or squared");
        return spectral_init(e, measurements(y), o);
      },
      py::arg("ensemble"), py::arg("y"), py::arg("weighting") = "exponential");
  m.def(
      "random_init",
      [](const SensingEnsemble& e, const Vector& y, std::uint64_t seed) {
        return random_init(e, measurements(y), seed);
      },
      py::arg("ensemble"), py::arg("y"), py::arg("seed"));

  m.def(
      "run",
      [](const SensingEnsemble& e, const Vector& y, const Vector& init, const std::string& method,
         std::optional<Vector> truth, double epsilon0, double epsilon_min, double gamma,
         double c_loss, double fixed_epsilon, double err_tol, double rel_tol, int patience,
         std::int64_t cap) {
        const auto s = schedule(method, epsilon0, epsilon_min, gamma, c_loss, fixed_epsilon);
        const auto stop = stopping_rule({err_tol, rel_tol, patience, cap});
        ConvergenceTrace t;
        {
          py::gil_scoped_release release;
          t = run(e, measurements(y, std::move(truth)), init, s, stop);
        }
        const auto len = static_cast<Index>(t.records.size());
        Vector error(len), loss(len), epsilon(len), step(len);
        for (Index i = 0; i < len; ++i) {
          error(i) = t.records[i].error;
          loss(i) = t.records[i].loss;
          epsilon(i) = t.records[i].epsilon;
          step(i) = t.records[i].step_size;
        }
        py::dict out;
        out["status"] = to_string(t.status);
        out["stalled"] = t.stalled;
        out["iterations"] = t.iterations();
        out["degenerate_count"] = t.degenerate_count;
        out["error"] = error;
        out["loss"] = loss;
        out["epsilon"] = epsilon;
        out["step_size"] = step;
        out["estimate"] = t.estimate;
        out["final_whitened"] = t.final_whitened;
        return out;
      },
      py::arg("ensemble"), py::arg("y"), py::arg("init"), py::arg("method") = "quantile",
      py::arg("truth") = py::none(), py::arg("epsilon0") = 1.0, py::arg("epsilon_min") = 0.0,
      py::arg("gamma") = 0.25, py::arg("c_loss") = 2.0, py::arg("fixed_epsilon") = 0.0,
      py::arg("err_tol") = 1e-9, py::arg("rel_tol") = 1e-12, py::arg("patience") = 3,
      py::arg("cap") = 5000);

  m.def("suite_names", [] {
    std::vector<std::string> names;
    for (const auto& s : verify::suites()) names.push_back(s.name);
    return names;
  });
  m.def(
      "run_suite",
      [](const std::string& name, std::uint64_t seed, bool desk, double gradient_fault) {
        for (const auto& s : verify::suites()) {
          if (s.name != name) continue;
          verify::SuiteOptions o;
          o.seed = seed;
          o.desk = desk;
          o.gradient_fault = gradient_fault;
          py::list rows;
          for (const auto& c : s.run(o)) {
            py::dict row;
            row["check"] = c.check;
            row["params"] = c.params;
            row["measured"] = c.measured;
            row["bound"] = c.bound;
            row["pass"] = c.pass;
            rows.append(row);
          }
          return rows;
        }
        throw Error(ErrorKind::InvalidConfiguration, "unknown suite '" + name + "'");
      },
      py::arg("name"), py::arg("seed") = 20250101, py::arg("desk") = true,
      py::arg("gradient_fault") = 0.0);
}
