#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qmem/commands.hpp"

namespace py = pybind11;
using namespace qmem;

namespace {

// Finite-level models carry their Lindbladian so Python callers never
// assemble it themselves.
struct FiniteLevel {
  FiniteLevelModel model;
  Lindbladian lind;
};

FiniteLevel make_finite_level(const ComplexMatrix& h0, const std::vector<ComplexMatrix>& ls,
                              const ComplexMatrix& sigma0) {
  FiniteLevelModel model = build_finite_level(h0, ls, sigma0);
  Lindbladian lind = assemble_lindbladian(model);
  return {std::move(model), std::move(lind)};
}

py::object optional_float(const std::optional<double>& v) {
  return v ? py::object(py::float_(*v)) : py::object(py::none());
}

py::dict decoherence_dict(const DecoherenceResult& r) {
  py::dict d;
  d["epsilon"] = r.epsilon;
  d["scale"] = r.scale;
  d["tau"] = optional_float(r.tau);
  d["never_reached"] = !r.reached();
  d["t_cap"] = r.t_cap;
  d["regular"] = r.regular;
  d["derivative_at_tau"] = r.derivative_at_tau;
  d["tau_prime"] = optional_float(r.tau_prime);
  d["tau_double_prime"] = optional_float(r.tau_double_prime);
  d["tau_double_prime_low_confidence"] = r.tau_double_prime_low_confidence;
  return d;
}

py::dict discounted_dict(const DiscountedResult& r) {
  py::dict d;
  d["horizon"] = r.horizon;
  d["value"] = r.value;
  d["path"] = std::string(to_string(r.path));
  d["admissibility_margin"] = r.admissibility_margin;
  d["error_estimate"] = r.error_estimate;
  return d;
}

py::dict report_dict(const OptimizationReport& r) {
  py::dict d;
  d["objective"] = std::string(to_string(r.objective));
  d["p_init"] = r.p_init;
  d["p_final"] = r.p_final;
  d["initial_value"] = r.trace.empty() ? 0.0 : r.trace.front().value;
  d["final_value"] = r.final_value();
  d["converged"] = r.converged;
  d["iterations"] = r.iterations;
  d["interior"] = r.interior;
  d["message"] = r.message;
  py::list values;
  for (const auto& e : r.trace) values.append(e.value);
  d["trace"] = values;
  if (r.duality) {
    py::dict du;
    du["t_star"] = r.duality->t_star;
    du["grad_norm"] = r.duality->grad_norm;
    du["hessian_min_eigenvalue"] = r.duality->hessian_min_eigenvalue;
    du["passed"] = r.duality->passed();
    d["duality"] = du;
  } else {
    d["duality"] = py::none();
  }
  return d;
}

OptimizerSettings settings_from(int max_iterations, double t_cap, std::vector<double> lower,
                                std::vector<double> upper) {
  OptimizerSettings s;
  s.max_iterations = max_iterations;
  s.t_cap = t_cap;
  s.lower = std::move(lower);
  s.upper = std::move(upper);
  return s;
}

}  // namespace

PYBIND11_MODULE(_qmem, m) {
  m.doc() = "Quantum memory criteria (C++ core)";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DimensionError>(m, "DimensionError", base);
  py::register_exception<ValidationError>(m, "ValidationError", base);
  py::register_exception<StabilityError>(m, "StabilityError", base);
  py::register_exception<HorizonError>(m, "HorizonError", base);
  py::register_exception<RegularityError>(m, "RegularityError", base);
  py::register_exception<DegenerateScaleError>(m, "DegenerateScaleError", base);
  py::register_exception<NumericalError>(m, "NumericalError", base);

  py::class_<OqhoModel>(m, "OqhoModel")
      .def_property_readonly("n", &OqhoModel::n)
      .def_property_readonly("m", &OqhoModel::m)
      .def_property_readonly("drift", &OqhoModel::drift)
      .def_property_readonly("dispersion", &OqhoModel::dispersion)
      .def_property_readonly("weight", &OqhoModel::weight)
      .def_property_readonly("p0", &OqhoModel::p0)
      .def_property_readonly("is_physical", &OqhoModel::is_physical)
      .def_property_readonly("warnings", &OqhoModel::warnings);

  py::class_<FiniteLevel>(m, "FiniteLevelModel")
      .def_property_readonly("d", [](const FiniteLevel& f) { return f.model.d(); })
      .def_property_readonly("lindbladian", [](const FiniteLevel& f) { return f.lind.matrix; })
      .def_property_readonly("sigma0", [](const FiniteLevel& f) { return f.model.sigma0(); });

  m.def(
      "build_oqho",
      [](const RealMatrix& R, const RealMatrix& M, const RealMatrix& F, const RealMatrix& P,
         std::optional<RealMatrix> theta) {
        return build_oqho(theta ? *theta : canonical_ccr(R.rows()), R, M, F, P);
      },
      py::arg("R"), py::arg("M"), py::arg("F"), py::arg("P"), py::arg("theta") = py::none(),
      "Physical-mode oscillator from energy R, coupling M, weight F and covariance P.");
  m.def("build_oqho_raw", &build_oqho_raw, py::arg("A"), py::arg("B"), py::arg("F"),
        py::arg("P"));
  m.def("build_finite_level", &make_finite_level, py::arg("H0"), py::arg("L"),
        py::arg("sigma0"));

  m.def("delta", &delta, py::arg("model"), py::arg("t"));
  m.def(
      "delta_derivatives",
      [](const OqhoModel& model, double t) {
        const auto d = delta_derivatives(model, t);
        return std::make_pair(d.first, d.second);
      },
      py::arg("model"), py::arg("t"));
  m.def("delta_star", &delta_star, py::arg("model"));
  m.def(
      "delta_sup",
      [](const OqhoModel& model, double horizon) {
        const auto s = delta_sup(model, horizon);
        return std::make_pair(s.value, s.argmax);
      },
      py::arg("model"), py::arg("horizon"));
  m.def(
      "delta_trace",
      [](const OqhoModel& model, const std::vector<double>& times, int jobs) {
        return delta_trace(model, times, jobs).values;
      },
      py::arg("model"), py::arg("times"), py::arg("jobs") = 1);

  m.def(
      "gamma", [](const FiniteLevel& f, double t) { return gamma(f.model, f.lind, t); },
      py::arg("model"), py::arg("t"));
  m.def(
      "gamma_derivatives",
      [](const FiniteLevel& f, double t) {
        const auto d = gamma_derivatives(f.model, f.lind, t);
        return std::make_pair(d.first, d.second);
      },
      py::arg("model"), py::arg("t"));
  m.def(
      "gamma_star", [](const FiniteLevel& f) { return gamma_star(f.model); }, py::arg("model"));
  m.def(
      "evolve_state", [](const FiniteLevel& f, double t) { return evolve_state(f.lind, f.model.sigma0(), t); },
      py::arg("model"), py::arg("t"));

  m.def(
      "decoherence_time",
      [](const OqhoModel& model, double epsilon, double t_cap) {
        return decoherence_dict(decoherence_time(delta_curve(model), epsilon, t_cap));
      },
      py::arg("model"), py::arg("epsilon"), py::arg("t_cap") = kDefaultSearchHorizon);
  m.def(
      "decoherence_time",
      [](const FiniteLevel& f, double epsilon, double t_cap) {
        return decoherence_dict(decoherence_time(gamma_curve(f.model, f.lind), epsilon, t_cap));
      },
      py::arg("model"), py::arg("epsilon"), py::arg("t_cap") = kDefaultSearchHorizon);
  m.def(
      "tau_derivatives_at_zero",
      [](const OqhoModel& model) { return tau_derivatives_at_zero(delta_curve(model)); },
      py::arg("model"));

  m.def(
      "discounted",
      [](const OqhoModel& model, double horizon) {
        return discounted_dict(discounted_delta_ale(model, horizon));
      },
      py::arg("model"), py::arg("horizon"));
  m.def(
      "discounted",
      [](const FiniteLevel& f, double horizon) {
        return discounted_dict(discounted_gamma_superop(f.model, f.lind, horizon));
      },
      py::arg("model"), py::arg("horizon"));
  m.def(
      "discounted_quadrature",
      [](const OqhoModel& model, double horizon) {
        return discounted_dict(discounted_delta_quadrature(model, horizon));
      },
      py::arg("model"), py::arg("horizon"));
  m.def(
      "discounted_quadrature",
      [](const FiniteLevel& f, double horizon) {
        return discounted_dict(discounted_gamma_quadrature(f.model, f.lind, horizon));
      },
      py::arg("model"), py::arg("horizon"));

  m.def(
      "check_bound",
      [](const OqhoModel& model, double horizon, int n_eps) {
        const ScalarCurve curve = delta_curve(model);
        const double growth = 2.0 * std::max(0.0, spectral_abscissa(model.drift()));
        const double eps_max = default_eps_max(curve, horizon, bound_search_horizon(horizon));
        const BoundCheck c = check_discount_bound(curve, horizon, eps_max, n_eps,
                                                  default_quadrature_span(horizon, growth));
        py::dict d;
        d["lhs"] = c.lhs;
        d["rhs"] = c.rhs;
        d["holds"] = c.holds;
        d["eps_truncation"] = c.eps_truncation;
        return d;
      },
      py::arg("model"), py::arg("horizon"), py::arg("n_eps") = 256);

  m.def(
      "optimize",
      [](const OqhoModel& model, const std::string& objective, const RealVector& p0,
         const std::vector<RealMatrix>& directions_R, const std::vector<RealMatrix>& directions_M,
         double epsilon, double horizon, int max_iterations, double t_cap,
         std::vector<double> lower, std::vector<double> upper) {
        const ParamMap map = ParamMap::from_model(model, directions_R, directions_M);
        const auto s = settings_from(max_iterations, t_cap, std::move(lower), std::move(upper));
        OptimizationReport r;
        switch (objective_from_string(objective)) {
          case Objective::TauMax:
            r = maximize_tau(map, p0, epsilon, s);
            r.duality = verify_duality(map, r.p_final, epsilon, t_cap);
            break;
          case Objective::DeltaSupMin:
            r = minimize_delta_sup(map, p0, horizon, s);
            break;
          case Objective::DiscountedMin:
            r = minimize_discounted(map, p0, horizon, s);
            break;
        }
        return report_dict(r);
      },
      py::arg("model"), py::arg("objective"), py::arg("p0"), py::arg("directions_R"),
      py::arg("directions_M") = std::vector<RealMatrix>{}, py::arg("epsilon") = 0.1,
      py::arg("horizon") = 1.0, py::arg("max_iterations") = 500,
      py::arg("t_cap") = kDefaultSearchHorizon, py::arg("lower") = std::vector<double>{},
      py::arg("upper") = std::vector<double>{});

  m.def(
      "load_config",
      [](const std::string& text) {
        const RunConfig cfg = parse_config(text);
        return std::string(to_string(cfg.kind));
      },
      py::arg("text"), "Validates a JSON run configuration and returns its model kind.");
}
