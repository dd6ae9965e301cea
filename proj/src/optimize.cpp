#include "qmem/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Eigenvalues>

namespace qmem {

namespace {

constexpr double kGradStep = 1e-6;
constexpr double kHessStep = 1e-4;
constexpr double kBoundTol = 1e-12;

using ScalarFn = std::function<double(const RealVector&)>;
// Objective for the line search; nullopt marks an unusable point.
using MaybeFn = std::function<std::optional<double>(const RealVector&)>;

double relative_step(double base, double pi) { return base * std::max(1.0, std::abs(pi)); }

// Central difference along coordinate i. A qmem::Error at a perturbed point
// triggers one retry with h / 8.
double central_difference(const ScalarFn& f, const RealVector& p, Eigen::Index i, double h) {
  for (int attempt = 0; attempt < 2; ++attempt, h /= 8.0) {
    try {
      RealVector plus = p;
      RealVector minus = p;
      plus(i) += h;
      minus(i) -= h;
      return (f(plus) - f(minus)) / (2.0 * h);
    } catch (const Error&) {
      if (attempt == 1) throw;
    }
  }
  return 0.0;  // unreachable
}

RealVector fd_gradient(const ScalarFn& f, const RealVector& p) {
  RealVector g(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    g(i) = central_difference(f, p, i, relative_step(kGradStep, p(i)));
  }
  return g;
}

RealMatrix fd_hessian(const ScalarFn& f, const RealVector& p) {
  const Eigen::Index r = p.size();
  RealMatrix h = RealMatrix::Zero(r, r);
  if (r == 0) return h;
  const double f0 = f(p);
  for (Eigen::Index i = 0; i < r; ++i) {
    const double hi = relative_step(kHessStep, p(i));
    RealVector pp = p;
    RealVector pm = p;
    pp(i) += hi;
    pm(i) -= hi;
    h(i, i) = (f(pp) - 2.0 * f0 + f(pm)) / (hi * hi);
    for (Eigen::Index j = 0; j < i; ++j) {
      const double hj = relative_step(kHessStep, p(j));
      RealVector q = p;
      q(i) += hi;
      q(j) += hj;
      const double fpp = f(q);
      q(j) -= 2.0 * hj;
      const double fpm = f(q);
      q(i) -= 2.0 * hi;
      const double fmm = f(q);
      q(j) += 2.0 * hj;
      const double fmp = f(q);
      h(i, j) = h(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
    }
  }
  return h;
}

struct TauState {
  DecoherenceResult result;
  DeltaSample sample;
};

TauState solve_tau(const OqhoModel& model, double epsilon, double t_cap) {
  TauState state;
  state.result = decoherence_time(delta_curve(model), epsilon, t_cap);
  if (!state.result.tau) {
    throw RegularityError("tau is never reached within the search horizon");
  }
  if (!state.result.regular) {
    throw RegularityError("fidelity level is not regular at this parameter");
  }
  state.sample = delta_sample(model, *state.result.tau);
  return state;
}

class Box {
 public:
  Box(const OptimizerSettings& s, Eigen::Index r) {
    if (!s.lower.empty() && static_cast<Eigen::Index>(s.lower.size()) != r) {
      throw DimensionError("optimizer: lower bound length differs from parameter count");
    }
    if (!s.upper.empty() && static_cast<Eigen::Index>(s.upper.size()) != r) {
      throw DimensionError("optimizer: upper bound length differs from parameter count");
    }
    lower_ = RealVector::Constant(r, -std::numeric_limits<double>::infinity());
    upper_ = RealVector::Constant(r, std::numeric_limits<double>::infinity());
    for (Eigen::Index i = 0; i < r && !s.lower.empty(); ++i) lower_(i) = s.lower[i];
    for (Eigen::Index i = 0; i < r && !s.upper.empty(); ++i) upper_(i) = s.upper[i];
    if ((lower_.array() > upper_.array()).any()) {
      throw Error("optimizer: lower bound exceeds upper bound");
    }
  }

  RealVector clamp(const RealVector& p) const { return p.cwiseMax(lower_).cwiseMin(upper_); }

  int side(const RealVector& p, Eigen::Index i) const {
    if (p(i) <= lower_(i) + kBoundTol * std::max(1.0, std::abs(lower_(i)))) return -1;
    if (p(i) >= upper_(i) - kBoundTol * std::max(1.0, std::abs(upper_(i)))) return 1;
    return 0;
  }

  // Zeroes components whose ascent direction points out of the box.
  RealVector project(const RealVector& p, const RealVector& direction) const {
    RealVector out = direction;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const int s = side(p, i);
      if ((s < 0 && out(i) < 0.0) || (s > 0 && out(i) > 0.0)) out(i) = 0.0;
    }
    return out;
  }

 private:
  RealVector lower_;
  RealVector upper_;
};

// Deterministic Nelder-Mead minimizing f, starting from a simplex of
// p + 0.05 max(1, |p_i|) e_i. Returns the best vertex and its value.
std::pair<RealVector, double> nelder_mead(const MaybeFn& objective, const Box& box,
                                          const RealVector& start, double start_value, int steps,
                                          int& used) {
  const Eigen::Index r = start.size();
  auto eval = [&](const RealVector& x) {
    const auto v = objective(x);
    return v ? *v : std::numeric_limits<double>::infinity();
  };
  std::vector<RealVector> simplex{start};
  std::vector<double> values{start_value};
  for (Eigen::Index i = 0; i < r; ++i) {
    RealVector v = start;
    v(i) += 0.05 * std::max(1.0, std::abs(start(i)));
    v = box.clamp(v);
    simplex.push_back(v);
    values.push_back(eval(v));
  }

  used = 0;
  std::vector<std::size_t> order(simplex.size());
  for (; used < steps && r > 0; ++used) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[order.size() - 2];
    if (std::abs(values[worst] - values[best]) <= 1e-14 * std::max(1.0, std::abs(values[best])))
      break;

    RealVector centroid = RealVector::Zero(r);
    for (std::size_t i = 0; i < simplex.size(); ++i) {
      if (i != worst) centroid += simplex[i];
    }
    centroid /= static_cast<double>(r);

    const RealVector reflected = box.clamp(centroid + (centroid - simplex[worst]));
    const double fr = eval(reflected);
    if (fr < values[best]) {
      const RealVector expanded = box.clamp(centroid + 2.0 * (centroid - simplex[worst]));
      const double fe = eval(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = reflected;
      values[worst] = fr;
      continue;
    }
    const RealVector contracted = box.clamp(centroid + 0.5 * (simplex[worst] - centroid));
    const double fc = eval(contracted);
    if (fc < values[worst]) {
      simplex[worst] = contracted;
      values[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i < simplex.size(); ++i) {
      if (i == best) continue;
      simplex[i] = box.clamp(simplex[best] + 0.5 * (simplex[i] - simplex[best]));
      values[i] = eval(simplex[i]);
    }
  }
  const auto best_it = std::min_element(values.begin(), values.end());
  const std::size_t best = static_cast<std::size_t>(best_it - values.begin());
  return {simplex[best], values[best]};
}

struct DescentProblem {
  /// +1 to maximize, -1 to minimize.
  double sense = 1.0;
  MaybeFn objective;
  /// Gradient of the objective; may throw RegularityError to request the
  /// derivative-free fallback.
  std::function<RealVector(const RealVector&)> gradient;
  bool allow_fallback = false;
};

void finalize_bounds(OptimizationReport& report, const Box& box) {
  const Eigen::Index r = report.p_final.size();
  report.active_bounds.assign(static_cast<std::size_t>(r), 0);
  report.interior = true;
  for (Eigen::Index i = 0; i < r; ++i) {
    report.active_bounds[i] = box.side(report.p_final, i);
    if (report.active_bounds[i] != 0) report.interior = false;
  }
}

OptimizationReport run_descent(Objective objective, const DescentProblem& problem,
                               const RealVector& p0, const OptimizerSettings& settings) {
  const Box box(settings, p0.size());
  OptimizationReport report;
  report.objective = objective;
  report.p_init = p0;

  RealVector p = box.clamp(p0);
  const auto v0 = problem.objective(p);
  if (!v0) throw Error("optimizer: objective is not finite at the starting point");
  double value = *v0;

  for (int iter = 0; iter < settings.max_iterations; ++iter) {
    RealVector grad;
    bool have_gradient = true;
    try {
      grad = problem.gradient(p);
    } catch (const RegularityError& e) {
      if (!problem.allow_fallback) {
        report.message = std::string("gradient evaluation failed: ") + e.what();
        break;
      }
      have_gradient = false;
    } catch (const Error& e) {
      report.message = std::string("gradient evaluation failed: ") + e.what();
      break;
    }

    if (!have_gradient) {
      // Derivative-free fallback on -sense * objective.
      report.trace.push_back({p, value, std::numeric_limits<double>::quiet_NaN()});
      const MaybeFn flipped = [&](const RealVector& x) -> std::optional<double> {
        const auto v = problem.objective(x);
        if (!v) return std::nullopt;
        return -problem.sense * *v;
      };
      int used = 0;
      auto [best, best_value] =
          nelder_mead(flipped, box, p, -problem.sense * value, settings.nelder_mead_steps, used);
      report.nelder_mead_steps += used;
      const double candidate = -problem.sense * best_value;
      bool regular_again = true;
      try {
        (void)problem.gradient(best);
      } catch (const RegularityError&) {
        regular_again = false;
      }
      if (problem.sense * (candidate - value) > 0.0) {
        p = best;
        value = candidate;
      }
      report.iterations = iter + 1;
      if (!regular_again) {
        report.trace.push_back({p, value, std::numeric_limits<double>::quiet_NaN()});
        report.message = "irregular fidelity level persists after derivative-free search";
        break;
      }
      continue;
    }

    const RealVector ascent = box.project(p, problem.sense * grad);
    const double gnorm = ascent.norm();
    report.trace.push_back({p, value, gnorm});
    report.iterations = iter + 1;
    if (gnorm < settings.gradient_tolerance) {
      report.converged = true;
      report.message = "gradient norm below tolerance";
      break;
    }

    bool accepted = false;
    double step = settings.initial_step;
    for (int k = 0; k < settings.max_backtracks; ++k, step *= settings.shrink) {
      const RealVector trial = box.clamp(p + step * ascent);
      const double predicted = ascent.dot(trial - p);
      if (!(predicted > 0.0)) continue;
      const auto tv = problem.objective(trial);
      if (!tv) continue;
      if (problem.sense * (*tv - value) >= settings.armijo * predicted) {
        p = trial;
        value = *tv;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      report.message = "line search could not improve the objective";
      report.iterations = iter + 1;
      break;
    }
    report.iterations = iter + 1;
    if (iter + 1 == settings.max_iterations) {
      report.trace.push_back({p, value, std::numeric_limits<double>::quiet_NaN()});
      report.message = "iteration limit reached";
    }
  }
  if (report.trace.empty() || !report.trace.back().p.isApprox(p) ||
      report.trace.back().value != value) {
    report.trace.push_back({p, value, std::numeric_limits<double>::quiet_NaN()});
  }
  report.p_final = p;
  finalize_bounds(report, box);
  return report;
}

}  // namespace

ParamMap::ParamMap(RealMatrix theta, RealMatrix base_energy, RealMatrix base_coupling,
                   RealMatrix weight, RealMatrix p0, std::vector<RealMatrix> directions_energy,
                   std::vector<RealMatrix> directions_coupling)
    : theta_(std::move(theta)),
      base_energy_(std::move(base_energy)),
      base_coupling_(std::move(base_coupling)),
      weight_(std::move(weight)),
      p0_(std::move(p0)),
      directions_energy_(std::move(directions_energy)),
      directions_coupling_(std::move(directions_coupling)) {
  if (directions_energy_.size() != directions_coupling_.size()) {
    throw ValidationError("param_map", "energy and coupling direction counts differ");
  }
  for (std::size_t i = 0; i < directions_energy_.size(); ++i) {
    const RealMatrix& dr = directions_energy_[i];
    const std::string field = "param_map.directions_R[" + std::to_string(i) + "]";
    if (dr.rows() != base_energy_.rows() || dr.cols() != base_energy_.cols()) {
      throw ValidationError(field, "shape differs from R");
    }
    require_finite(dr, field);
    if ((dr - dr.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, dr.cwiseAbs().maxCoeff())) {
      throw ValidationError(field, "direction is not symmetric");
    }
    const RealMatrix& dm = directions_coupling_[i];
    const std::string mfield = "param_map.directions_M[" + std::to_string(i) + "]";
    if (dm.rows() != base_coupling_.rows() || dm.cols() != base_coupling_.cols()) {
      throw ValidationError(mfield, "shape differs from M");
    }
    require_finite(dm, mfield);
  }
  // Fails early if the base point itself is invalid.
  (void)model_at(RealVector::Zero(size()));
}

ParamMap ParamMap::from_model(const OqhoModel& model, std::vector<RealMatrix> directions_energy,
                              std::vector<RealMatrix> directions_coupling) {
  if (!model.is_physical()) {
    throw ValidationError("model", "parameter optimization requires a physical-mode model");
  }
  const auto& phys = *model.physical();
  // An omitted direction list means the family leaves that matrix fixed.
  if (directions_coupling.empty()) {
    directions_coupling.assign(directions_energy.size(),
                               RealMatrix::Zero(phys.coupling.rows(), phys.coupling.cols()));
  }
  if (directions_energy.empty()) {
    directions_energy.assign(directions_coupling.size(),
                             RealMatrix::Zero(phys.energy.rows(), phys.energy.cols()));
  }
  return ParamMap(phys.theta, phys.energy, phys.coupling, model.weight(), model.p0(),
                  std::move(directions_energy), std::move(directions_coupling));
}

RealMatrix ParamMap::energy_at(const RealVector& p) const {
  if (p.size() != size()) throw DimensionError("ParamMap: parameter vector length mismatch");
  RealMatrix r = base_energy_;
  for (Eigen::Index i = 0; i < size(); ++i) r += p(i) * directions_energy_[i];
  return r;
}

RealMatrix ParamMap::coupling_at(const RealVector& p) const {
  if (p.size() != size()) throw DimensionError("ParamMap: parameter vector length mismatch");
  RealMatrix m = base_coupling_;
  for (Eigen::Index i = 0; i < size(); ++i) m += p(i) * directions_coupling_[i];
  return m;
}

OqhoModel ParamMap::model_at(const RealVector& p) const {
  return build_oqho(theta_, energy_at(p), coupling_at(p), weight_, p0_);
}

bool ParamMap::is_trivial() const {
  for (std::size_t i = 0; i < directions_energy_.size(); ++i) {
    if (!directions_energy_[i].isZero(0.0) || !directions_coupling_[i].isZero(0.0)) return false;
  }
  return true;
}

RealVector grad_delta_p(const ParamMap& map, const RealVector& p, double t) {
  return fd_gradient([&](const RealVector& x) { return delta(map.model_at(x), t); }, p);
}

RealVector grad_delta_dot_p(const ParamMap& map, const RealVector& p, double t) {
  return fd_gradient(
      [&](const RealVector& x) { return delta_derivatives(map.model_at(x), t).first; }, p);
}

RealMatrix hessian_delta_p(const ParamMap& map, const RealVector& p, double t) {
  return fd_hessian([&](const RealVector& x) { return delta(map.model_at(x), t); }, p);
}

std::optional<double> tau_at(const ParamMap& map, const RealVector& p, double epsilon,
                             double t_cap) {
  const DecoherenceResult r = decoherence_time(delta_curve(map.model_at(p)), epsilon, t_cap);
  return r.tau;
}

RealVector grad_tau(const ParamMap& map, const RealVector& p, double epsilon, double t_cap) {
  const TauState state = solve_tau(map.model_at(p), epsilon, t_cap);
  const RealVector dp = grad_delta_p(map, p, *state.result.tau);
  return -dp / state.sample.derivatives.first;
}

RealMatrix hessian_tau(const ParamMap& map, const RealVector& p, double epsilon, double t_cap) {
  const TauState state = solve_tau(map.model_at(p), epsilon, t_cap);
  const double t = *state.result.tau;
  const double d1 = state.sample.derivatives.first;
  const double d2 = state.sample.derivatives.second;
  const RealVector g_tau = -grad_delta_p(map, p, t) / d1;
  const RealVector g_dot = grad_delta_dot_p(map, p, t);
  const RealMatrix h_delta = hessian_delta_p(map, p, t);
  const RealMatrix cross = g_tau * g_dot.transpose();
  RealMatrix h = -(d2 * g_tau * g_tau.transpose() + (cross + cross.transpose()) + h_delta) / d1;
  return 0.5 * (h + h.transpose());
}

std::string_view to_string(Objective objective) {
  switch (objective) {
    case Objective::TauMax:
      return "tau-max";
    case Objective::DeltaSupMin:
      return "delta-sup-min";
    case Objective::DiscountedMin:
      return "discounted-min";
  }
  return "unknown";
}

Objective objective_from_string(std::string_view tag) {
  if (tag == "tau-max") return Objective::TauMax;
  if (tag == "delta-sup-min") return Objective::DeltaSupMin;
  if (tag == "discounted-min") return Objective::DiscountedMin;
  throw ValidationError("objective", "unknown objective '" + std::string(tag) + "'");
}

OptimizationReport maximize_tau(const ParamMap& map, const RealVector& p0, double epsilon,
                                const OptimizerSettings& settings) {
  if (!tau_at(map, p0, epsilon, settings.t_cap)) {
    throw Error("maximize_tau: tau is never reached at the starting point; cannot optimize");
  }
  DescentProblem problem;
  problem.sense = 1.0;
  problem.allow_fallback = true;
  problem.objective = [&](const RealVector& p) -> std::optional<double> {
    try {
      return tau_at(map, p, epsilon, settings.t_cap);
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  problem.gradient = [&](const RealVector& p) { return grad_tau(map, p, epsilon, settings.t_cap); };
  return run_descent(Objective::TauMax, problem, p0, settings);
}

OptimizationReport minimize_delta_sup(const ParamMap& map, const RealVector& p0, double horizon,
                                      const OptimizerSettings& settings) {
  if (!(horizon > 0.0)) throw Error("minimize_delta_sup: horizon must be positive");
  const ScalarFn value = [&](const RealVector& p) {
    return delta_sup(map.model_at(p), horizon).value;
  };
  DescentProblem problem;
  problem.sense = -1.0;
  problem.objective = [&](const RealVector& p) -> std::optional<double> {
    try {
      return value(p);
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  problem.gradient = [&](const RealVector& p) { return fd_gradient(value, p); };
  return run_descent(Objective::DeltaSupMin, problem, p0, settings);
}

RealVector grad_discounted_p(const ParamMap& map, const RealVector& p, double horizon) {
  return fd_gradient(
      [&](const RealVector& x) { return discounted_delta_ale(map.model_at(x), horizon).value; }, p);
}

OptimizationReport minimize_discounted(const ParamMap& map, const RealVector& p0, double horizon,
                                       const OptimizerSettings& settings) {
  // Throws HorizonError when T is inadmissible at p0.
  (void)discounted_delta_ale(map.model_at(p0), horizon);
  DescentProblem problem;
  problem.sense = -1.0;
  problem.objective = [&](const RealVector& p) -> std::optional<double> {
    try {
      return discounted_delta_ale(map.model_at(p), horizon).value;
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  problem.gradient = [&](const RealVector& p) { return grad_discounted_p(map, p, horizon); };
  return run_descent(Objective::DiscountedMin, problem, p0, settings);
}

DualityRecord verify_duality(const ParamMap& map, const RealVector& p_star, double epsilon,
                             double t_cap) {
  const OqhoModel model = map.model_at(p_star);
  const TauState state = solve_tau(model, epsilon, t_cap);
  DualityRecord rec;
  rec.t_star = *state.result.tau;
  rec.scale = state.result.scale;
  const RealVector g = grad_delta_p(map, p_star, rec.t_star);
  const RealMatrix h = hessian_delta_p(map, p_star, rec.t_star);
  rec.grad_norm = g.norm();
  rec.hessian_min_eigenvalue =
      h.size() == 0 ? 0.0
                    : Eigen::SelfAdjointEigenSolver<RealMatrix>(h, Eigen::EigenvaluesOnly)
                          .eigenvalues()
                          .minCoeff();
  rec.degenerate = h.size() == 0 || h.cwiseAbs().maxCoeff() <= 1e-9 * rec.scale;
  rec.stationary = rec.grad_norm <= 1e-4 * rec.scale;
  rec.curvature_ok = rec.hessian_min_eigenvalue >= -1e-6 * rec.scale;
  return rec;
}

}  // namespace qmem
