#pragma once

// Exponentially discounted criteria M_T f = (1/T) int_0^inf e^{-t/T} f(t) dt,
// evaluated in closed form through Lyapunov equations or by quadrature, plus
// the tail-probability inequality linking M_T Delta to the decoherence time.

#include <functional>
#include <string_view>
#include <vector>

#include "qmem/decoherence.hpp"

namespace qmem {

enum class DiscountPath { AleClosedForm, SuperopClosedForm, Quadrature };

std::string_view to_string(DiscountPath path);

struct DiscountedResult {
  double horizon = 0.0;
  double value = 0.0;
  DiscountPath path = DiscountPath::Quadrature;
  /// 1/T - 2 max(0, spectral abscissa); NaN for quadrature of a bare curve.
  double admissibility_margin = 0.0;
  /// Quadrature only: refinement difference plus tail estimate.
  double error_estimate = 0.0;
  int refinements = 0;
};

/// 1/T - 2 max(0, abscissa).
double admissibility_margin(double horizon, double abscissa);

/// Supremum of admissible horizons, 1 / (2 max(0, abscissa)) (+inf if stable).
double max_admissible_horizon(double abscissa);

/// Closed form for an OQHO: solves A_T P_T + P_T A_T^T + P/T + BB^T = 0 with
/// A_T = A - I/(2T) and returns <Sigma, P_T + P - 2 sym((I - TA)^{-1} P)>.
/// Throws HorizonError when the margin is not above 1e-10.
DiscountedResult discounted_delta_ale(const OqhoModel& model, double horizon);

/// Q_T solving Q L_T + L_T^dagger Q + I/T = 0, as a d^2 x d^2 matrix.
ComplexMatrix superop_gramian(const Lindbladian& lind, double horizon);

/// Closed form for a finite-level model: <sigma0, K_T sigma0> with
/// K_T = Q_T - (I + TL)(I - TL)^{-1}.
DiscountedResult discounted_gamma_superop(const FiniteLevelModel& model, const Lindbladian& lind,
                                          double horizon);

inline constexpr int kDefaultQuadraturePanels = 16;

/// Adaptive composite Gauss-Legendre quadrature of M_T f over [0, t_max],
/// doubling the panel count until successive results agree to relative 1e-9.
/// Throws NumericalError after 20 refinements without convergence.
DiscountedResult discounted_quadrature(const std::function<double(double)>& f, double horizon,
                                       double t_max, int panels = kDefaultQuadraturePanels);

/// 40 / (1/T - growth_rate): the span after which the discounted integrand of
/// a function growing like e^{growth_rate t} has decayed by e^{-40}.
double default_quadrature_span(double horizon, double growth_rate = 0.0);

/// Quadrature oracles for the two closed-form paths, with the integration span
/// scaled by the admissibility margin.
DiscountedResult discounted_delta_quadrature(const OqhoModel& model, double horizon);
DiscountedResult discounted_gamma_quadrature(const FiniteLevelModel& model,
                                             const Lindbladian& lind, double horizon);

struct BoundCheck {
  double horizon = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
  /// Upper end of the eps integral after cutting where the integrand falls
  /// below 1e-8 or the threshold becomes unreachable.
  double eps_truncation = 0.0;
  /// Integrand e^{-tau/T} at the truncation point (0 when tau is never reached
  /// there); bounds the neglected tail per unit of eps.
  double tail_integrand = 0.0;
  int eps_nodes = 0;
};

/// Largest eps worth integrating: doubles eps until e^{-tau(eps)/T} < 1e-8 or
/// the threshold is never reached.
double default_eps_max(const ScalarCurve& curve, double horizon, double t_cap);

/// Search horizon used for tau solves inside the bound check.
double bound_search_horizon(double horizon);

/// (1/T) int Delta e^{-t/T} dt <= scale int_0^inf e^{-tau(eps)/T} d eps.
/// `quadrature_span` is the t-range for the left side (default 40 T). The eps
/// integral starts from `n_eps` Simpson intervals and doubles them until it settles.
BoundCheck check_discount_bound(const ScalarCurve& curve, double horizon, double eps_max,
                                int n_eps = 256, double quadrature_span = 0.0, int jobs = 1);

struct AsymptoticRow {
  double horizon = 0.0;
  double discounted = 0.0;
  double eps_integral = 0.0;
  double ratio_discounted = 0.0;  // M_T / (D'(0) T)
  double ratio_eps = 0.0;         // scale * int e^{-tau/T} / (D'(0) T)
};

/// Short-horizon equivalence diagnostics. Throws RegularityError if D'(0) <= 0.
std::vector<AsymptoticRow> asymptotic_diagnostics(const ScalarCurve& curve,
                                                  const std::vector<double>& horizons,
                                                  int n_eps = 256, int jobs = 1);

}  // namespace qmem
