#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "msrate/certify.h"
#include "msrate/errors.h"
#include "msrate/model.h"
#include "msrate/rnvi.h"
#include "msrate/simulate.h"

namespace py = pybind11;

namespace msrate {
namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw DimensionMismatch("expected a 2-D array");
  const auto rows = static_cast<int>(a.shape(0));
  const auto cols = static_cast<int>(a.shape(1));
  return Matrix(rows, cols, std::vector<double>(a.data(), a.data() + a.size()));
}

py::array_t<double> to_array(const Matrix& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

py::dict certify_py(const SystemSpec& spec, double tau_start, double tau_end, int tau_count,
                    double epsilon, int max_inner_iters) {
  RnviConfig cfg;
  cfg.tau_grid = default_tau_grid(tau_start, tau_end, tau_count);
  cfg.epsilon = epsilon;
  cfg.max_inner_iters = max_inner_iters;
  const ContinuationResult result = [&] {
    py::gil_scoped_release release;
    return run_continuation(spec, cfg);
  }();
  const BoundsCertificate c = aggregate(spec, result);

  py::list per_tau;
  for (const PerTauDiagnostics& d : c.per_tau) {
    per_tau.append(py::dict(py::arg("tau") = d.tau, py::arg("J_low") = d.J_low,
                            py::arg("J_up") = d.J_up, py::arg("Delta") = d.Delta,
                            py::arg("lambda_max_Pinv") = d.lambda_max_Pinv,
                            py::arg("inner_iters") = d.inner_iters));
  }
  py::dict out;
  out["J_low"] = c.J_low_best;
  out["J_up"] = c.J_up_best;
  out["rho_low"] = c.rho_low;
  out["rho_up"] = c.rho_up;
  out["tau_low"] = c.tau_low;
  out["tau_up"] = c.tau_up;
  out["K_up"] = to_array(c.K_up);
  out["per_tau"] = per_tau;
  return out;
}

}  // namespace
}  // namespace msrate

PYBIND11_MODULE(_msrate, m) {
  using namespace msrate;
  m.doc() = "Certified bounds on the optimal mean-square stabilizing rate";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  static py::exception<ConfigError> config_error(m, "ConfigError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      PyErr_SetString(config_error.ptr(), e.what());
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), e.what());
    }
  });

  py::class_<SystemSpec>(m, "SystemSpec")
      .def(py::init([](const Array& A, const Array& A_bar, const Array& B, const Array& B_bar,
                       double sigma) {
             return SystemSpec(to_matrix(A), to_matrix(A_bar), to_matrix(B), to_matrix(B_bar),
                               sigma);
           }),
           py::arg("A"), py::arg("A_bar"), py::arg("B"), py::arg("B_bar"), py::arg("sigma"))
      .def_property_readonly("n", &SystemSpec::n)
      .def_property_readonly("m", &SystemSpec::m)
      .def_property_readonly("sigma", &SystemSpec::sigma)
      .def_property_readonly("A", [](const SystemSpec& s) { return to_array(s.A()); })
      .def_property_readonly("A_bar", [](const SystemSpec& s) { return to_array(s.A_bar()); })
      .def_property_readonly("B", [](const SystemSpec& s) { return to_array(s.B()); })
      .def_property_readonly("B_bar", [](const SystemSpec& s) { return to_array(s.B_bar()); })
      .def("scale_A", &scale_A, py::arg("theta"))
      .def("with_sigma", &with_sigma, py::arg("sigma"))
      .def("to_json", &dump_spec);

  m.def("load_spec", [](const std::string& path) { return load_spec(path); }, py::arg("path"));
  m.def("parse_spec", &parse_spec, py::arg("text"));
  m.def(
      "validate",
      [](const SystemSpec& s) {
        const ValidationReport r = validate(s);
        return py::dict(py::arg("nondegenerate") = r.nondegenerate,
                        py::arg("stacked_rank") = r.stacked_rank, py::arg("C_A") = r.C_A,
                        py::arg("R0_min_eig") = r.R0_min_eig);
      },
      py::arg("spec"));
  m.def("default_tau_grid", &default_tau_grid, py::arg("tau_start") = kDefaultTauStart,
        py::arg("tau_end") = kDefaultTauEnd, py::arg("count") = kDefaultTauCount);
  m.def("certify", &certify_py, py::arg("spec"), py::arg("tau_start") = kDefaultTauStart,
        py::arg("tau_end") = kDefaultTauEnd, py::arg("tau_count") = kDefaultTauCount,
        py::arg("epsilon") = kDefaultEpsilon, py::arg("max_inner_iters") = kDefaultMaxInnerIters,
        "Run the continuation and return the best certified bounds.");
  m.def(
      "norm_bounds",
      [](const SystemSpec& s) {
        const NormBounds nb = norm_bounds(s);
        return py::make_tuple(nb.alpha, nb.beta);
      },
      py::arg("spec"));
  m.def(
      "closed_loop_rate",
      [](const SystemSpec& s, const Array& K) { return closed_loop_rate(s, to_matrix(K)); },
      py::arg("spec"), py::arg("K"));
  m.def(
      "propagate_exact",
      [](const SystemSpec& s, const Array& K, const std::vector<double>& x0, int horizon) {
        return propagate_exact(s, to_matrix(K), x0, horizon).energies;
      },
      py::arg("spec"), py::arg("K"), py::arg("x0"), py::arg("horizon") = 60);
  m.def(
      "monte_carlo",
      [](const SystemSpec& s, const Array& K, const std::vector<double>& x0, int horizon,
         int num_traj, std::uint64_t seed, unsigned threads) {
        SimConfig cfg;
        cfg.x0 = x0;
        cfg.K = to_matrix(K);
        cfg.horizon = horizon;
        cfg.num_traj = num_traj;
        cfg.seed = seed;
        cfg.fit_window = {0, horizon};
        py::gil_scoped_release release;
        return monte_carlo(s, cfg, threads).energies;
      },
      py::arg("spec"), py::arg("K"), py::arg("x0"), py::arg("horizon") = 60,
      py::arg("num_traj") = 10000, py::arg("seed") = 42, py::arg("threads") = 0);
}
