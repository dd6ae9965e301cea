#include "qmem/commands.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "json.hpp"
#include "qmem/parallel.hpp"

namespace qmem {

namespace {

using ordered_json = nlohmann::ordered_json;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

void write_json(const std::filesystem::path& path, const ordered_json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

void prepare_out_dir(const CommandOptions& opts) {
  std::error_code ec;
  std::filesystem::create_directories(opts.out_dir, ec);
  if (ec) throw ValidationError("out", "cannot create " + opts.out_dir.string());
}

// NaN and infinities have no JSON representation.
ordered_json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

ordered_json optional_number(const std::optional<double>& v) {
  return v ? number_or_null(*v) : ordered_json(nullptr);
}

ordered_json vector_json(const RealVector& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number_or_null(v(i)));
  return out;
}

struct CurveBundle {
  ScalarCurve curve;
  // Growth rate of the curve for admissibility; 0 for bounded curves.
  double growth = 0.0;
  double abscissa = 0.0;
};

CurveBundle make_curve(const RunConfig& cfg) {
  CurveBundle b;
  if (cfg.oqho) {
    b.curve = delta_curve(*cfg.oqho);
    b.abscissa = spectral_abscissa(cfg.oqho->drift());
  } else {
    const Lindbladian lind = assemble_lindbladian(*cfg.finite_level);
    b.curve = gamma_curve(*cfg.finite_level, lind);
    b.abscissa = std::max(0.0, spectral_abscissa(lind.matrix));
    // The Schrodinger-picture deviation is bounded; only roundoff makes the
    // Lindbladian abscissa positive.
    if (b.abscissa < 1e-10) b.abscissa = 0.0;
  }
  b.growth = 2.0 * std::max(0.0, b.abscissa);
  return b;
}

std::vector<double> epsilons_for(const RunConfig& cfg, const CommandOptions& opts) {
  return opts.epsilons ? *opts.epsilons : cfg.epsilons;
}

std::vector<double> horizons_for(const RunConfig& cfg, const CommandOptions& opts) {
  return opts.horizons ? *opts.horizons : cfg.horizons;
}

void require_positive_list(const std::vector<double>& xs, const char* field) {
  if (xs.empty()) throw ValidationError(field, "no values given");
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (!(xs[i] > 0.0) || !std::isfinite(xs[i]))
      throw ValidationError(fmt::format("{}[{}]", field, i), "must be positive and finite");
}

ordered_json model_header(const RunConfig& cfg) {
  ordered_json h;
  h["kind"] = std::string(to_string(cfg.kind));
  if (cfg.oqho) {
    h["n"] = cfg.oqho->n();
    h["m"] = cfg.oqho->m();
    h["warnings"] = cfg.oqho->warnings();
  } else {
    h["d"] = cfg.finite_level->d();
    h["m"] = cfg.finite_level->m();
  }
  return h;
}

}  // namespace

GridConfig parse_grid_spec(const std::string& spec) {
  GridConfig g;
  const auto a = spec.find(':');
  const auto b = a == std::string::npos ? a : spec.find(':', a + 1);
  if (b == std::string::npos) throw ValidationError("grid", "expected t0:t1:points");
  try {
    std::size_t used = 0;
    const std::string s0 = spec.substr(0, a);
    const std::string s1 = spec.substr(a + 1, b - a - 1);
    const std::string s2 = spec.substr(b + 1);
    g.t0 = std::stod(s0, &used);
    if (used != s0.size()) throw std::invalid_argument("t0");
    g.t1 = std::stod(s1, &used);
    if (used != s1.size()) throw std::invalid_argument("t1");
    g.points = std::stoi(s2, &used);
    if (used != s2.size()) throw std::invalid_argument("points");
  } catch (const std::logic_error&) {
    throw ValidationError("grid", "expected t0:t1:points, got '" + spec + "'");
  }
  if (!(g.t0 >= 0.0) || !(g.t1 >= g.t0) || !std::isfinite(g.t1) || g.points < 1)
    throw ValidationError("grid", "need 0 <= t0 <= t1 and points >= 1");
  return g;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const DimensionError*>(&e) ||
      dynamic_cast<const DegenerateScaleError*>(&e))
    return kExitConfig;
  return kExitNumerical;
}

int cmd_evaluate(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log) {
  prepare_out_dir(opts);
  const GridConfig grid = opts.grid ? *opts.grid : cfg.grid.value_or(GridConfig{});
  const auto times = uniform_grid(grid.t0, grid.t1, grid.points);

  DeviationTrace trace;
  std::optional<double> scale;
  Derivatives initial;
  if (cfg.oqho) {
    trace = delta_trace(*cfg.oqho, times, opts.jobs);
    initial = delta_derivatives(*cfg.oqho, 0.0);
    try {
      scale = delta_star(*cfg.oqho);
    } catch (const DegenerateScaleError&) {
    }
  } else {
    const Lindbladian lind = assemble_lindbladian(*cfg.finite_level);
    trace = gamma_trace(*cfg.finite_level, lind, times, opts.jobs);
    initial = gamma_derivatives(*cfg.finite_level, lind, 0.0);
    try {
      scale = gamma_star(*cfg.finite_level);
    } catch (const DegenerateScaleError&) {
    }
  }

  std::string csv = "t,value\n";
  for (std::size_t i = 0; i < trace.times.size(); ++i)
    csv += format_number(trace.times[i]) + "," + format_number(trace.values[i]) + "\n";
  write_text(opts.out_dir / "trace.csv", csv);

  ordered_json side;
  side["model"] = model_header(cfg);
  side["kind"] = std::string(to_string(trace.kind));
  side["scale"] = optional_number(scale);
  side["initial_derivative"] = number_or_null(initial.first);
  side["initial_second_derivative"] = number_or_null(initial.second);
  side["grid"] = {{"t0", grid.t0}, {"t1", grid.t1}, {"points", grid.points}};
  write_json(opts.out_dir / "trace.json", side);

  log << fmt::format("evaluate: {} points of {} written to {}\n", trace.times.size(),
                     to_string(trace.kind), (opts.out_dir / "trace.csv").string());
  return kExitOk;
}

int cmd_decoherence(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log) {
  const auto eps = epsilons_for(cfg, opts);
  require_positive_list(eps, "epsilon");
  prepare_out_dir(opts);
  const CurveBundle bundle = make_curve(cfg);
  const ScalarCurve& curve = bundle.curve;

  std::optional<std::pair<double, double>> at_zero;
  try {
    at_zero = tau_derivatives_at_zero(curve);
  } catch (const RegularityError&) {
  }

  const auto results = parallel_map(eps.size(), opts.jobs, [&](std::size_t i) {
    return decoherence_time(curve, eps[i], cfg.t_cap);
  });

  ordered_json rows = ordered_json::array();
  int reached = 0;
  for (const auto& r : results) {
    ordered_json row;
    row["epsilon"] = r.epsilon;
    row["tau"] = optional_number(r.tau);
    row["never_reached"] = !r.reached();
    row["t_cap"] = r.t_cap;
    if (r.reached()) {
      ++reached;
      row["value_at_tau"] = number_or_null(r.value_at_tau);
      row["derivative_at_tau"] = number_or_null(r.derivative_at_tau);
      row["second_derivative_at_tau"] = number_or_null(r.second_derivative_at_tau);
    }
    row["regular"] = r.regular;
    row["tau_prime"] = optional_number(r.tau_prime);
    row["tau_double_prime"] = optional_number(r.tau_double_prime);
    row["tau_double_prime_low_confidence"] = r.tau_double_prime_low_confidence;
    if (at_zero) {
      const double hat = at_zero->first * r.epsilon +
                         0.5 * at_zero->second * r.epsilon * r.epsilon;
      row["tau_short_horizon"] = number_or_null(hat);
      row["short_horizon_error"] =
          r.tau ? number_or_null(std::abs(*r.tau - hat)) : ordered_json(nullptr);
    } else {
      row["tau_short_horizon"] = nullptr;
      row["short_horizon_error"] = nullptr;
    }
    row["march_steps"] = r.march_steps;
    row["bisection_iterations"] = r.bisection_iterations;
    rows.push_back(std::move(row));
  }

  ordered_json doc;
  doc["model"] = model_header(cfg);
  doc["scale"] = curve.scale;
  doc["t_cap"] = cfg.t_cap;
  if (at_zero) {
    doc["tau_prime_at_zero"] = number_or_null(at_zero->first);
    doc["tau_double_prime_at_zero"] = number_or_null(at_zero->second);
  } else {
    doc["tau_prime_at_zero"] = nullptr;
    doc["tau_double_prime_at_zero"] = nullptr;
  }
  doc["results"] = std::move(rows);
  write_json(opts.out_dir / "decoherence.json", doc);

  log << fmt::format("decoherence: {} of {} thresholds reached within t_cap {}\n", reached,
                     eps.size(), format_number(cfg.t_cap));
  return reached > 0 ? kExitOk : kExitNumerical;
}

int cmd_discounted(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log) {
  const auto horizons = horizons_for(cfg, opts);
  require_positive_list(horizons, "horizon");
  prepare_out_dir(opts);

  std::optional<Lindbladian> lind;
  if (cfg.finite_level) lind = assemble_lindbladian(*cfg.finite_level);

  struct Row {
    bool admissible = false;
    double max_admissible = 0.0;
    DiscountedResult closed;
    std::optional<DiscountedResult> oracle;
  };
  const auto rows = parallel_map(horizons.size(), opts.jobs, [&](std::size_t i) {
    Row row;
    const double T = horizons[i];
    try {
      if (cfg.oqho) {
        row.closed = discounted_delta_ale(*cfg.oqho, T);
        if (opts.with_oracle) row.oracle = discounted_delta_quadrature(*cfg.oqho, T);
      } else {
        row.closed = discounted_gamma_superop(*cfg.finite_level, *lind, T);
        if (opts.with_oracle) row.oracle = discounted_gamma_quadrature(*cfg.finite_level, *lind, T);
      }
      row.admissible = true;
    } catch (const HorizonError& e) {
      row.max_admissible = e.max_admissible();
    }
    return row;
  });

  ordered_json out = ordered_json::array();
  int admissible = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    ordered_json row;
    row["horizon"] = horizons[i];
    row["admissible"] = r.admissible;
    if (!r.admissible) {
      row["max_admissible_horizon"] = number_or_null(r.max_admissible);
      out.push_back(std::move(row));
      continue;
    }
    ++admissible;
    row["value"] = r.closed.value;
    row["path"] = std::string(to_string(r.closed.path));
    row["admissibility_margin"] = number_or_null(r.closed.admissibility_margin);
    if (r.oracle) {
      row["quadrature_value"] = r.oracle->value;
      row["quadrature_error_estimate"] = number_or_null(r.oracle->error_estimate);
      const double gap = std::abs(r.closed.value - r.oracle->value);
      row["relative_gap"] = gap / std::max(std::abs(r.closed.value), 1e-300);
    }
    out.push_back(std::move(row));
  }

  ordered_json doc;
  doc["model"] = model_header(cfg);
  doc["results"] = std::move(out);
  write_json(opts.out_dir / "discounted.json", doc);

  log << fmt::format("discounted: {} of {} horizons admissible\n", admissible, horizons.size());
  return admissible > 0 ? kExitOk : kExitNumerical;
}

int cmd_check_bound(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log) {
  const auto horizons = horizons_for(cfg, opts);
  require_positive_list(horizons, "horizon");
  prepare_out_dir(opts);
  const CurveBundle bundle = make_curve(cfg);

  ordered_json out = ordered_json::array();
  int holds = 0;
  int evaluated = 0;
  for (double T : horizons) {
    ordered_json row;
    row["horizon"] = T;
    const double margin = admissibility_margin(T, bundle.abscissa);
    if (!(margin > 1e-10)) {
      row["evaluated"] = false;
      row["max_admissible_horizon"] = number_or_null(max_admissible_horizon(bundle.abscissa));
      out.push_back(std::move(row));
      continue;
    }
    const double span = default_quadrature_span(T, bundle.growth);
    const double eps_max = default_eps_max(bundle.curve, T, bound_search_horizon(T));
    const BoundCheck c = check_discount_bound(bundle.curve, T, eps_max, cfg.n_eps, span, opts.jobs);
    ++evaluated;
    if (c.holds) ++holds;
    row["evaluated"] = true;
    row["lhs"] = c.lhs;
    row["rhs"] = c.rhs;
    row["holds"] = c.holds;
    row["eps_truncation"] = c.eps_truncation;
    row["tail_integrand"] = c.tail_integrand;
    row["eps_nodes"] = c.eps_nodes;
    out.push_back(std::move(row));
  }

  ordered_json doc;
  doc["model"] = model_header(cfg);
  doc["scale"] = bundle.curve.scale;
  doc["results"] = std::move(out);
  write_json(opts.out_dir / "check_bound.json", doc);

  log << fmt::format("check-bound: inequality holds at {} of {} evaluated horizons\n", holds,
                     evaluated);
  return evaluated > 0 ? kExitOk : kExitNumerical;
}

int cmd_optimize(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log) {
  if (!cfg.optimize) throw ValidationError("optimize", "missing optimize block");
  if (!cfg.oqho || !cfg.oqho->is_physical())
    throw ValidationError("model.kind", "optimize requires an oqho-physical model");
  const OptimizeConfig& oc = *cfg.optimize;
  const ParamMap map =
      ParamMap::from_model(*cfg.oqho, oc.directions_energy, oc.directions_coupling);
  if (oc.p0.size() != map.size())
    throw ValidationError("optimize.p0", fmt::format("expected {} entries", map.size()));
  prepare_out_dir(opts);

  OptimizationReport report;
  switch (oc.objective) {
    case Objective::TauMax:
      report = maximize_tau(map, oc.p0, oc.epsilon, oc.settings);
      break;
    case Objective::DeltaSupMin:
      report = minimize_delta_sup(map, oc.p0, oc.horizon, oc.settings);
      break;
    case Objective::DiscountedMin:
      report = minimize_discounted(map, oc.p0, oc.horizon, oc.settings);
      break;
  }

  std::string duality_note;
  if (oc.objective == Objective::TauMax) {
    try {
      report.duality = verify_duality(map, report.p_final, oc.epsilon, oc.settings.t_cap);
    } catch (const Error& e) {
      duality_note = e.what();
    }
  }

  std::string csv = "iteration,objective,grad_norm\n";
  for (std::size_t i = 0; i < report.trace.size(); ++i)
    csv += fmt::format("{},{},{}\n", i, format_number(report.trace[i].value),
                       format_number(report.trace[i].gradient_norm));
  write_text(opts.out_dir / "trace.csv", csv);

  ordered_json doc;
  doc["objective"] = std::string(to_string(report.objective));
  if (oc.objective == Objective::TauMax)
    doc["epsilon"] = oc.epsilon;
  else
    doc["horizon"] = oc.horizon;
  doc["p_init"] = vector_json(report.p_init);
  doc["p_final"] = vector_json(report.p_final);
  doc["initial_value"] = report.trace.empty() ? ordered_json(nullptr)
                                              : number_or_null(report.trace.front().value);
  doc["final_value"] = number_or_null(report.final_value());
  doc["converged"] = report.converged;
  doc["iterations"] = report.iterations;
  doc["nelder_mead_steps"] = report.nelder_mead_steps;
  doc["interior"] = report.interior;
  doc["active_bounds"] = report.active_bounds;
  doc["message"] = report.message;
  if (report.duality) {
    const auto& d = *report.duality;
    doc["duality"] = {{"t_star", d.t_star},
                      {"scale", d.scale},
                      {"grad_norm", d.grad_norm},
                      {"hessian_min_eigenvalue", d.hessian_min_eigenvalue},
                      {"stationary", d.stationary},
                      {"curvature_ok", d.curvature_ok},
                      {"degenerate", d.degenerate},
                      {"passed", d.passed()}};
  } else if (oc.objective == Objective::TauMax) {
    doc["duality"] = {{"error", duality_note}};
  }
  write_json(opts.out_dir / "report.json", doc);

  // The optimized model becomes the new base point, so p restarts at zero.
  RunConfig next = cfg;
  next.optimize->p0 = RealVector::Zero(map.size());
  next.optimize->settings.lower.clear();
  next.optimize->settings.upper.clear();
  for (std::size_t i = 0; i < oc.settings.lower.size(); ++i)
    next.optimize->settings.lower.push_back(oc.settings.lower[i] - report.p_final(i));
  for (std::size_t i = 0; i < oc.settings.upper.size(); ++i)
    next.optimize->settings.upper.push_back(oc.settings.upper[i] - report.p_final(i));
  write_text(opts.out_dir / "model.json", model_document(map.model_at(report.p_final), next));

  log << fmt::format("optimize: {} {} after {} iterations, objective {} -> {}\n",
                     to_string(report.objective), report.converged ? "converged" : "stopped",
                     report.iterations, doc["initial_value"].dump(), doc["final_value"].dump());
  if (!report.converged) log << "optimize: " << report.message << "\n";
  return report.converged ? kExitOk : kExitNumerical;
}

}  // namespace qmem
