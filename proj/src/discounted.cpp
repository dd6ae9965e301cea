#include "qmem/discounted.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "qmem/parallel.hpp"

namespace qmem {

namespace {

constexpr double kMarginTol = 1e-10;
constexpr int kMaxRefinements = 20;
constexpr double kRefineTol = 1e-9;
constexpr double kEpsTailIntegrand = 1e-8;
constexpr int kEpsMaxIntervals = 16384;
constexpr double kEpsRelTolerance = 1e-9;

struct GaussRule {
  static constexpr int kOrder = 10;
  std::array<double, kOrder> nodes{};
  std::array<double, kOrder> weights{};
};

// Legendre nodes on [-1, 1] by Newton iteration on P_n.
GaussRule make_gauss_rule() {
  GaussRule rule;
  constexpr int n = GaussRule::kOrder;
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

const GaussRule& gauss_rule() {
  static const GaussRule rule = make_gauss_rule();
  return rule;
}

double composite_gauss(const std::function<double(double)>& integrand, double a, double b,
                       int panels) {
  const GaussRule& rule = gauss_rule();
  const double width = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * width;
    double panel = 0.0;
    for (int k = 0; k < GaussRule::kOrder; ++k) {
      panel += rule.weights[k] * integrand(mid + 0.5 * width * rule.nodes[k]);
    }
    sum += 0.5 * width * panel;
  }
  return sum;
}

void require_admissible(double horizon, double abscissa, const char* where) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw Error(std::string(where) + ": horizon must be positive and finite");
  }
  const double margin = admissibility_margin(horizon, abscissa);
  if (!(margin > kMarginTol)) {
    throw HorizonError(std::string(where) + ": horizon " + std::to_string(horizon) +
                           " is not admissible (margin " + std::to_string(margin) + ")",
                       max_admissible_horizon(abscissa));
  }
}

struct EpsIntegral {
  double value = 0.0;
  double upper = 0.0;
  double tail_integrand = 0.0;
  int nodes = 0;
};

double tail_weight(const ScalarCurve& curve, double horizon, double eps, double t_cap) {
  const DecoherenceResult r = decoherence_time(curve, eps, t_cap);
  return r.tau ? std::exp(-*r.tau / horizon) : 0.0;
}

// int_0^{eps_max} e^{-tau(eps)/T} d eps by composite Simpson; unreached
// thresholds contribute zero. tau is nondecreasing in eps, so the integrand is
// monotone and the range is cut by bisection where it first falls below the
// tail level. Both ends are graded with eps = upper (1 - (1 - u)^4 (1 + 4u)):
// near a reachable edge the integrand can vanish like a fractional power of
// (edge - eps), and a curve that starts quadratically has tau ~ sqrt(eps) at the
// origin. The map is quadratic at u = 0 and has a triple zero slope at u = 1, so
// Simpson keeps its order in both cases.
EpsIntegral eps_integral(const ScalarCurve& curve, double horizon, double eps_max, int n_eps,
                         double t_cap, int jobs) {
  int intervals = std::max(n_eps, 256);
  if (intervals % 2 != 0) ++intervals;

  double upper = eps_max;
  double tail = tail_weight(curve, horizon, eps_max, t_cap);
  if (tail < kEpsTailIntegrand) {
    double lo = 0.0;
    double hi = eps_max;
    double lo_weight = 1.0;
    for (int iter = 0; iter < 200 && hi - lo > 1e-13 * hi; ++iter) {
      const double mid = 0.5 * (lo + hi);
      const double w = tail_weight(curve, horizon, mid, t_cap);
      if (w >= kEpsTailIntegrand) {
        lo = mid;
        lo_weight = w;
      } else {
        hi = mid;
      }
    }
    // Nothing reachable at any positive threshold: the integral is zero.
    if (lo == 0.0) return {0.0, 0.0, 0.0, 0};
    upper = lo;
    tail = lo_weight;
  }

  auto node = [&](double u) {
    const double s = 1.0 - u;
    const double eps = upper * (1.0 - s * s * s * s * (1.0 + 4.0 * u));
    const double jacobian = 20.0 * upper * u * s * s * s;
    if (jacobian == 0.0) return 0.0;
    return jacobian * tail_weight(curve, horizon, eps, t_cap);
  };

  // Interval doubling: only the new midpoints are evaluated each round, and the
  // Simpson sum is rebuilt from the trapezoid sums of the two finest levels.
  std::vector<double> values = parallel_map(
      static_cast<std::size_t>(intervals + 1), jobs,
      [&](std::size_t i) { return node(static_cast<double>(i) / intervals); });
  auto simpson = [&]() {
    double sum = values.front() + values.back();
    for (int i = 1; i < intervals; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * values[i];
    return sum / (3.0 * intervals);
  };
  double estimate = simpson();
  while (intervals < kEpsMaxIntervals) {
    const auto mids = parallel_map(static_cast<std::size_t>(intervals), jobs, [&](std::size_t i) {
      return node((static_cast<double>(i) + 0.5) / intervals);
    });
    std::vector<double> refined(2 * values.size() - 1);
    for (std::size_t i = 0; i < values.size(); ++i) refined[2 * i] = values[i];
    for (std::size_t i = 0; i < mids.size(); ++i) refined[2 * i + 1] = mids[i];
    values = std::move(refined);
    intervals *= 2;
    const double next = simpson();
    const bool settled = std::abs(next - estimate) <= kEpsRelTolerance * std::abs(next);
    estimate = next;
    if (settled) break;
  }
  return {estimate, upper, tail, intervals + 1};
}

}  // namespace

std::string_view to_string(DiscountPath path) {
  switch (path) {
    case DiscountPath::AleClosedForm:
      return "ale-closed-form";
    case DiscountPath::SuperopClosedForm:
      return "superop-closed-form";
    case DiscountPath::Quadrature:
      return "quadrature";
  }
  return "unknown";
}

double admissibility_margin(double horizon, double abscissa) {
  return 1.0 / horizon - 2.0 * std::max(0.0, abscissa);
}

double max_admissible_horizon(double abscissa) {
  if (abscissa <= 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / (2.0 * abscissa);
}

DiscountedResult discounted_delta_ale(const OqhoModel& model, double horizon) {
  const RealMatrix& a = model.drift();
  const double abscissa = spectral_abscissa(a);
  require_admissible(horizon, abscissa, "discounted_delta_ale");

  const Eigen::Index n = model.n();
  const RealMatrix id = RealMatrix::Identity(n, n);
  const RealMatrix a_t = a - id / (2.0 * horizon);
  const RealMatrix p_t = solve_lyapunov(a_t, RealMatrix(model.p0() / horizon + model.diffusion()));
  const RealMatrix resolvent_p = (id - horizon * a).partialPivLu().solve(model.p0());

  DiscountedResult out;
  out.horizon = horizon;
  out.path = DiscountPath::AleClosedForm;
  out.admissibility_margin = admissibility_margin(horizon, abscissa);
  out.value = frobenius_inner(model.sigma_weight(),
                              p_t + model.p0() - 2.0 * symmetrize(resolvent_p));
  return out;
}

ComplexMatrix superop_gramian(const Lindbladian& lind, double horizon) {
  require_admissible(horizon, spectral_abscissa(lind.matrix), "superop_gramian");
  const Eigen::Index n = lind.matrix.rows();
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  const ComplexMatrix adj_t = lind.adjoint_matrix - id / (2.0 * horizon);
  return solve_lyapunov(adj_t, ComplexMatrix(id / horizon));
}

DiscountedResult discounted_gamma_superop(const FiniteLevelModel& model, const Lindbladian& lind,
                                          double horizon) {
  const double abscissa = spectral_abscissa(lind.matrix);
  require_admissible(horizon, abscissa, "discounted_gamma_superop");

  const Eigen::Index n = lind.matrix.rows();
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  const ComplexMatrix q_t = superop_gramian(lind, horizon);
  const ComplexMatrix resolvent =
      (id - horizon * lind.matrix).partialPivLu().solve(ComplexMatrix(id + horizon * lind.matrix));
  const ComplexMatrix k_t = q_t - resolvent;

  const ComplexVector v = vec(model.sigma0());
  const Complex value = v.dot(k_t * v);
  if (std::abs(value.imag()) > 1e-10 * std::max(1.0, std::abs(value.real()))) {
    throw NumericalError("discounted_gamma_superop: imaginary residue " +
                         std::to_string(value.imag()) + " exceeds tolerance");
  }

  DiscountedResult out;
  out.horizon = horizon;
  out.path = DiscountPath::SuperopClosedForm;
  out.admissibility_margin = admissibility_margin(horizon, abscissa);
  out.value = value.real();
  return out;
}

DiscountedResult discounted_quadrature(const std::function<double(double)>& f, double horizon,
                                       double t_max, int panels) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw Error("discounted_quadrature: horizon must be positive and finite");
  }
  if (!(t_max > 0.0) || !std::isfinite(t_max)) {
    throw Error("discounted_quadrature: integration span must be positive and finite");
  }
  panels = std::max(panels, 1);
  const std::function<double(double)> integrand = [&](double t) {
    return std::exp(-t / horizon) * f(t) / horizon;
  };

  DiscountedResult out;
  out.horizon = horizon;
  out.path = DiscountPath::Quadrature;
  out.admissibility_margin = std::numeric_limits<double>::quiet_NaN();

  double previous = composite_gauss(integrand, 0.0, t_max, panels);
  for (int refinement = 1; refinement <= kMaxRefinements; ++refinement) {
    panels *= 2;
    const double current = composite_gauss(integrand, 0.0, t_max, panels);
    const double diff = std::abs(current - previous);
    if (!std::isfinite(current)) break;
    if (diff <= kRefineTol * std::abs(current) || diff <= 1e-300) {
      out.value = current;
      out.refinements = refinement;
      out.error_estimate = diff + std::abs(integrand(t_max)) * horizon;
      return out;
    }
    previous = current;
  }
  throw NumericalError("discounted_quadrature: no convergence after " +
                       std::to_string(kMaxRefinements) + " refinements");
}

double default_quadrature_span(double horizon, double growth_rate) {
  const double rate = 1.0 / horizon - std::max(0.0, growth_rate);
  if (!(rate > 0.0)) {
    throw HorizonError("default_quadrature_span: discounted integrand does not decay",
                       growth_rate > 0.0 ? 1.0 / growth_rate
                                         : std::numeric_limits<double>::infinity());
  }
  return 40.0 / rate;
}

DiscountedResult discounted_delta_quadrature(const OqhoModel& model, double horizon) {
  const double abscissa = spectral_abscissa(model.drift());
  require_admissible(horizon, abscissa, "discounted_delta_quadrature");
  DiscountedResult out = discounted_quadrature(
      [&](double t) { return delta(model, t); }, horizon,
      default_quadrature_span(horizon, 2.0 * std::max(0.0, abscissa)));
  out.admissibility_margin = admissibility_margin(horizon, abscissa);
  return out;
}

DiscountedResult discounted_gamma_quadrature(const FiniteLevelModel& model,
                                             const Lindbladian& lind, double horizon) {
  const double abscissa = spectral_abscissa(lind.matrix);
  require_admissible(horizon, abscissa, "discounted_gamma_quadrature");
  DiscountedResult out = discounted_quadrature(
      [&](double t) { return gamma(model, lind, t); }, horizon,
      default_quadrature_span(horizon, 2.0 * std::max(0.0, abscissa)));
  out.admissibility_margin = admissibility_margin(horizon, abscissa);
  return out;
}

double bound_search_horizon(double horizon) { return 60.0 * horizon; }

double default_eps_max(const ScalarCurve& curve, double horizon, double t_cap) {
  double eps = 1e-4;
  for (int k = 0; k < 80; ++k, eps *= 2.0) {
    const DecoherenceResult r = decoherence_time(curve, eps, t_cap);
    if (!r.tau || std::exp(-*r.tau / horizon) < kEpsTailIntegrand) return eps;
  }
  return eps;
}

BoundCheck check_discount_bound(const ScalarCurve& curve, double horizon, double eps_max,
                                int n_eps, double quadrature_span, int jobs) {
  if (!(eps_max > 0.0)) throw Error("check_discount_bound: eps_max must be positive");
  const double span = quadrature_span > 0.0 ? quadrature_span : 40.0 * horizon;
  const DiscountedResult lhs =
      discounted_quadrature([&](double t) { return curve.value_at(t); }, horizon, span);
  const EpsIntegral rhs =
      eps_integral(curve, horizon, eps_max, n_eps, bound_search_horizon(horizon), jobs);

  BoundCheck out;
  out.horizon = horizon;
  out.lhs = lhs.value;
  out.rhs = curve.scale * rhs.value;
  out.holds = out.lhs <= out.rhs * (1.0 + 1e-6);
  out.eps_truncation = rhs.upper;
  out.tail_integrand = rhs.tail_integrand;
  out.eps_nodes = rhs.nodes;
  return out;
}

std::vector<AsymptoticRow> asymptotic_diagnostics(const ScalarCurve& curve,
                                                  const std::vector<double>& horizons, int n_eps,
                                                  int jobs) {
  const double slope0 = curve.eval(0.0).first;
  if (!(slope0 > 0.0)) {
    throw RegularityError("asymptotic_diagnostics: initial slope is not positive");
  }
  std::vector<AsymptoticRow> rows;
  rows.reserve(horizons.size());
  for (const double horizon : horizons) {
    const double t_cap = bound_search_horizon(horizon);
    const DiscountedResult m = discounted_quadrature(
        [&](double t) { return curve.value_at(t); }, horizon, 40.0 * horizon);
    const double eps_max = default_eps_max(curve, horizon, t_cap);
    const EpsIntegral integral = eps_integral(curve, horizon, eps_max, n_eps, t_cap, jobs);
    AsymptoticRow row;
    row.horizon = horizon;
    row.discounted = m.value;
    row.eps_integral = curve.scale * integral.value;
    row.ratio_discounted = m.value / (slope0 * horizon);
    row.ratio_eps = row.eps_integral / (slope0 * horizon);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace qmem
