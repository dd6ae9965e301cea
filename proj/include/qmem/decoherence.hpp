#pragma once

// Memory decoherence time tau(eps) = min{t >= 0 : value(t) >= eps * scale}
// for any nonnegative deviation curve with value(0) = 0.

#include <functional>
#include <optional>
#include <utility>

#include "qmem/functionals.hpp"

namespace qmem {

struct CurveSample {
  double value = 0.0;
  double first = 0.0;
  double second = 0.0;
};

/// A deviation functional normalized by its reference scale. `value` may be
/// left empty, in which case `eval(t).value` is used.
struct ScalarCurve {
  std::function<CurveSample(double)> eval;
  std::function<double(double)> value;
  double scale = 1.0;

  double value_at(double t) const { return value ? value(t) : eval(t).value; }
};

/// Delta(t) of an OQHO with scale Delta_*.
ScalarCurve delta_curve(const OqhoModel& model);

/// Gamma(t) of a finite-level system with scale Gamma_*.
ScalarCurve gamma_curve(const FiniteLevelModel& model, const Lindbladian& lind);

inline constexpr double kDefaultSearchHorizon = 100.0;

struct DecoherenceResult {
  double epsilon = 0.0;
  double scale = 1.0;
  /// Empty when the threshold is never reached within [0, t_cap].
  std::optional<double> tau;
  double t_cap = 0.0;
  double value_at_tau = 0.0;
  double derivative_at_tau = 0.0;
  double second_derivative_at_tau = 0.0;
  bool regular = false;
  std::optional<double> tau_prime;
  std::optional<double> tau_double_prime;
  /// tau'' is unreliable when the crossing slope is small.
  bool tau_double_prime_low_confidence = false;
  int march_steps = 0;
  int bisection_iterations = 0;

  bool reached() const { return tau.has_value(); }
};

/// Default regularity threshold 1e-8 * scale / tau.
double default_regularity_threshold(double scale, double tau);

/// First crossing of eps * scale. Marches with steps growing by 1.5 (never
/// longer than t_cap / 1024), brackets the first sample at or above the
/// threshold and bisects to relative 1e-10. Regularity and, when regular,
/// tau' and tau'' are filled in with the default threshold.
DecoherenceResult decoherence_time(const ScalarCurve& curve, double epsilon,
                                   double t_cap = kDefaultSearchHorizon);

/// regular := derivative_at_tau > theta_reg. Requires a finite tau.
bool classify_regularity(const DecoherenceResult& result, double theta_reg);
bool classify_regularity(const DecoherenceResult& result);

/// (tau'(eps), tau''(eps)) = (s / D', -s^2 D'' / D'^3) at t = tau.
/// Throws RegularityError unless result.regular.
std::pair<double, double> tau_eps_derivatives(const ScalarCurve& curve,
                                              const DecoherenceResult& result);

/// Right derivatives of tau at eps = 0. Throws RegularityError if D'(0) <= 0.
std::pair<double, double> tau_derivatives_at_zero(const ScalarCurve& curve);

/// tau'(0) eps + tau''(0) eps^2 / 2.
double tau_short_horizon(const ScalarCurve& curve, double epsilon);

}  // namespace qmem
