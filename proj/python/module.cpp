#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <numbers>

#include "kdvlab/config.hpp"
#include "kdvlab/errors.hpp"
#include "kdvlab/harness.hpp"
#include "kdvlab/hopf.hpp"
#include "kdvlab/multiscale.hpp"
#include "kdvlab/pde.hpp"
#include "kdvlab/pi2.hpp"
#include "kdvlab/whitham.hpp"

namespace py = pybind11;
using namespace kdvlab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

template <class F>
Array map_array(const Array& x, F&& f) {
  Array out(x.request().shape);
  auto in = x.unchecked();
  auto* o = out.mutable_data();
  const double* src = x.data();
  for (py::ssize_t i = 0; i < in.size(); ++i) o[i] = f(src[i]);
  return out;
}

Array to_array(const std::vector<double>& v) { return Array(static_cast<py::ssize_t>(v.size()), v.data()); }

py::dict solve(Equation eq, const InitialData& data, double epsilon, double t_end, std::vector<double> snapshots,
               std::size_t points, double half_length, double dt, const std::string& scheme, bool dealias) {
  const std::size_t n = points ? points : required_points(2.0 * half_length, epsilon);
  const auto u0 = GridFunction::sample(-half_length, half_length, n, [&](double x) { return data.u0(x); });
  SolverParams p;
  p.epsilon = epsilon;
  p.t_end = t_end;
  p.dt = dt;
  p.scheme = parse_scheme(scheme);
  p.dealias = dealias;
  SolveReport rep;
  {
    py::gil_scoped_release release;
    rep = eq == Equation::kdv ? kdv_run(u0, p, snapshots) : ch_run(u0, p, snapshots);
  }
  py::list u;
  for (const auto& g : rep.snapshots) u.append(to_array(g.values()));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = u0.x(i);
  py::dict out;
  out["x"] = to_array(x);
  out["t"] = rep.times;
  out["u"] = u;
  out["mass_drift"] = rep.mass_drift;
  out["energy_drift"] = rep.energy_drift;
  out["dt"] = rep.dt;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Small-dispersion KdV and Camassa-Holm near the gradient catastrophe";

  // Registered base first: later translators are tried first, so DomainError wins over Error.
  const auto& error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", error.ptr());

  py::class_<InitialData>(m, "InitialData")
      .def_static("neg_sech_squared", &InitialData::neg_sech_squared, py::arg("amplitude") = 1.0)
      .def_static("from_table", &InitialData::from_table, py::arg("x"), py::arg("u"))
      .def_property_readonly("name", &InitialData::name)
      .def("u0", [](const InitialData& d, const Array& x) { return map_array(x, [&](double v) { return d.u0(v); }); })
      .def("f_minus", &InitialData::f_minus);

  py::class_<BreakupPoint>(m, "BreakupPoint")
      .def_readonly("x_c", &BreakupPoint::x_c)
      .def_readonly("t_c", &BreakupPoint::t_c)
      .def_readonly("u_c", &BreakupPoint::u_c)
      .def_readonly("k", &BreakupPoint::k)
      .def("__repr__", [](const BreakupPoint& b) {
        return "BreakupPoint(x_c=" + std::to_string(b.x_c) + ", t_c=" + std::to_string(b.t_c) +
               ", u_c=" + std::to_string(b.u_c) + ", k=" + std::to_string(b.k) + ")";
      });

  m.def("breakup_point", &breakup_point, py::arg("data"));
  m.def(
      "hopf_evaluate",
      [](const InitialData& d, const Array& x, double t) {
        return map_array(x, [&](double v) { return hopf_evaluate(d, v, t); });
      },
      py::arg("data"), py::arg("x"), py::arg("t"));
  m.def(
      "local_cubic",
      [](const BreakupPoint& bp, const Array& x, double t) {
        return map_array(x, [&](double v) { return local_cubic(bp, v, t); });
      },
      py::arg("bp"), py::arg("x"), py::arg("t"));

  m.def(
      "kdv_solve",
      [](const InitialData& d, double epsilon, double t_end, std::vector<double> snapshots, std::size_t points,
         double half_length, double dt, const std::string& scheme, bool dealias) {
        return solve(Equation::kdv, d, epsilon, t_end, std::move(snapshots), points, half_length, dt, scheme, dealias);
      },
      py::arg("data"), py::arg("epsilon"), py::arg("t_end"), py::arg("snapshots") = std::vector<double>{},
      py::arg("points") = 0, py::arg("half_length") = 5.0 * std::numbers::pi, py::arg("dt") = 0.0,
      py::arg("scheme") = "if-rk4", py::arg("dealias") = true);
  m.def(
      "ch_solve",
      [](const InitialData& d, double epsilon, double t_end, std::vector<double> snapshots, std::size_t points,
         double half_length, double dt, const std::string& scheme, bool dealias) {
        return solve(Equation::ch, d, epsilon, t_end, std::move(snapshots), points, half_length, dt, scheme, dealias);
      },
      py::arg("data"), py::arg("epsilon"), py::arg("t_end"), py::arg("snapshots") = std::vector<double>{},
      py::arg("points") = 0, py::arg("half_length") = 5.0 * std::numbers::pi, py::arg("dt") = 0.0,
      py::arg("scheme") = "if-rk4", py::arg("dealias") = true);

  m.def(
      "whitham_edges",
      [](const InitialData& d, double t) { return whitham_edges(t, d); }, py::arg("data"), py::arg("t"));
  m.def(
      "asymptotic_u",
      [](const InitialData& d, const Array& x, double t, double epsilon) {
        const AsymptoticSolution sol(t, d);
        return map_array(x, [&](double v) { return sol.u(v, epsilon); });
      },
      py::arg("data"), py::arg("x"), py::arg("t"), py::arg("epsilon"));
  m.def(
      "finite_gap_eval",
      [](std::array<double, 3> beta, double q0, const Array& x, double t, double epsilon) {
        const BetaTriple b{beta[0], beta[1], beta[2]};
        return map_array(x, [&](double v) { return finite_gap_eval(b, q0, v, t, epsilon); });
      },
      py::arg("beta"), py::arg("q0"), py::arg("x"), py::arg("t"), py::arg("epsilon"));

  m.def("laurent_coefficients", &laurent_coefficients, py::arg("T"));
  m.def(
      "pi2_solve",
      [](double T, double X_l, double X_r, double rel_tol) {
        Pi2Solution sol;
        {
          py::gil_scoped_release release;
          sol = pi2_solve(T, X_l, X_r, rel_tol);
        }
        py::dict out;
        out["X"] = to_array(sol.mesh);
        out["U"] = to_array(sol.U);
        out["U_X"] = to_array(sol.U_X);
        out["tol"] = sol.tol;
        out["residual"] = pi2_residual(sol, std::max(X_l, -10.0), std::min(X_r, 10.0)).max_abs();
        return out;
      },
      py::arg("T"), py::arg("X_l") = -100.0, py::arg("X_r") = 100.0, py::arg("rel_tol") = 1e-6);
  m.def(
      "multiscale_u",
      [](const BreakupPoint& bp, const std::string& equation, double epsilon, const Array& x, double t) {
        const auto frame = make_frame(bp, epsilon, parse_equation(equation));
        Pi2Cache cache;
        return map_array(x, [&](double v) { return multiscale_u(frame, v, t, cache); });
      },
      py::arg("bp"), py::arg("equation"), py::arg("epsilon"), py::arg("x"), py::arg("t"));

  m.def(
      "run_experiment",
      [](const std::map<std::string, std::string>& settings) {
        KeyValues kv;
        for (const auto& [k, v] : settings) kv.set(k, v);
        const auto config = config_from_key_values(kv);
        ExperimentReport rep;
        {
          py::gil_scoped_release release;
          rep = run_experiment(config);
        }
        py::list errors, fits;
        for (std::size_t i = 0; i < rep.cells.size(); ++i) {
          py::dict e;
          e["epsilon"] = rep.cells[i].epsilon;
          e["t"] = rep.cells[i].t;
          e["label"] = rep.cells[i].label;
          e["delta_hopf"] = rep.errors[i].delta_hopf;
          e["delta_asymptotic"] = rep.errors[i].delta_asymptotic;
          e["delta_multiscale"] = rep.errors[i].delta_multiscale;
          e["gate_difference"] = rep.cells[i].gate_difference;
          errors.append(e);
        }
        for (const auto& f : rep.fits) {
          py::dict d;
          d["experiment"] = f.experiment;
          d["time"] = f.time;
          d["alpha"] = f.alpha;
          d["a"] = f.fit.a;
          d["r"] = f.fit.r;
          d["sigma_a"] = f.fit.sigma_a;
          fits.append(d);
        }
        py::dict out;
        out["errors"] = errors;
        out["fits"] = fits;
        return out;
      },
      py::arg("settings"),
      "Runs an epsilon sweep configured by the same keys as the flat config file (values as strings).");
}
