#include "qmem/decoherence.hpp"

#include <cmath>
#include <memory>

namespace qmem {

namespace {

constexpr double kGrowth = 1.5;
constexpr int kSkipDivisions = 1024;
constexpr double kBisectionTol = 1e-10;
constexpr double kLowConfidenceSlope = 1e-4;

}  // namespace

ScalarCurve delta_curve(const OqhoModel& model) {
  auto shared = std::make_shared<const OqhoModel>(model);
  ScalarCurve curve;
  curve.eval = [shared](double t) {
    const DeltaSample s = delta_sample(*shared, t);
    return CurveSample{s.value, s.derivatives.first, s.derivatives.second};
  };
  curve.value = [shared](double t) { return delta(*shared, t); };
  curve.scale = delta_star(model);
  return curve;
}

ScalarCurve gamma_curve(const FiniteLevelModel& model, const Lindbladian& lind) {
  auto shared_model = std::make_shared<const FiniteLevelModel>(model);
  auto shared_lind = std::make_shared<const Lindbladian>(lind);
  ScalarCurve curve;
  curve.eval = [shared_model, shared_lind](double t) {
    const GammaSample s = gamma_sample(*shared_model, *shared_lind, t);
    return CurveSample{s.value, s.derivatives.first, s.derivatives.second};
  };
  curve.value = [shared_model, shared_lind](double t) {
    return gamma(*shared_model, *shared_lind, t);
  };
  curve.scale = gamma_star(model);
  if (!(curve.scale > 1e-14)) throw DegenerateScaleError("gamma_star: reference scale vanishes");
  return curve;
}

double default_regularity_threshold(double scale, double tau) {
  return 1e-8 * scale / std::max(tau, 1e-300);
}

DecoherenceResult decoherence_time(const ScalarCurve& curve, double epsilon, double t_cap) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw Error("decoherence_time: epsilon must be positive and finite");
  }
  if (!(t_cap > 0.0) || !std::isfinite(t_cap)) {
    throw Error("decoherence_time: search horizon must be positive and finite");
  }
  if (!(curve.scale > 1e-14)) {
    throw DegenerateScaleError("decoherence_time: reference scale vanishes");
  }

  DecoherenceResult result;
  result.epsilon = epsilon;
  result.scale = curve.scale;
  result.t_cap = t_cap;
  const double threshold = epsilon * curve.scale;

  const double max_step = t_cap / kSkipDivisions;
  double step = t_cap * 1e-6;
  double lo = 0.0;
  double v_lo = curve.value_at(0.0);
  double hi = 0.0;
  double v_hi = v_lo;
  bool bracketed = false;
  while (lo < t_cap) {
    hi = std::min(lo + step, t_cap);
    v_hi = curve.value_at(hi);
    ++result.march_steps;
    if (v_hi >= threshold) {
      bracketed = true;
      break;
    }
    lo = hi;
    v_lo = v_hi;
    step = std::min(step * kGrowth, max_step);
  }
  if (!bracketed) return result;

  // Invariant: v_lo < threshold <= v_hi.
  while (hi - lo > kBisectionTol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double v_mid = curve.value_at(mid);
    ++result.bisection_iterations;
    if (v_mid >= threshold) {
      hi = mid;
      v_hi = v_mid;
    } else {
      lo = mid;
      v_lo = v_mid;
    }
  }
  // Secant step inside the final bracket.
  double tau = hi;
  if (v_hi > v_lo) {
    tau = lo + (threshold - v_lo) * (hi - lo) / (v_hi - v_lo);
    tau = std::clamp(tau, lo, hi);
  }

  const CurveSample at = curve.eval(tau);
  result.tau = tau;
  result.value_at_tau = at.value;
  result.derivative_at_tau = at.first;
  result.second_derivative_at_tau = at.second;
  result.regular = classify_regularity(result);
  if (result.regular) {
    const auto [d1, d2] = tau_eps_derivatives(curve, result);
    result.tau_prime = d1;
    result.tau_double_prime = d2;
    result.tau_double_prime_low_confidence =
        std::abs(at.first) < kLowConfidenceSlope * curve.scale / std::max(tau, 1e-300);
  }
  return result;
}

bool classify_regularity(const DecoherenceResult& result, double theta_reg) {
  if (!result.tau) throw RegularityError("classify_regularity: tau was never reached");
  return result.derivative_at_tau > theta_reg;
}

bool classify_regularity(const DecoherenceResult& result) {
  if (!result.tau) throw RegularityError("classify_regularity: tau was never reached");
  return classify_regularity(result, default_regularity_threshold(result.scale, *result.tau));
}

std::pair<double, double> tau_eps_derivatives(const ScalarCurve& curve,
                                              const DecoherenceResult& result) {
  if (!result.tau || !result.regular) {
    throw RegularityError("tau_eps_derivatives: fidelity level is not regular");
  }
  const double s = curve.scale;
  const double d1 = result.derivative_at_tau;
  const double d2 = result.second_derivative_at_tau;
  return {s / d1, -s * s * d2 / (d1 * d1 * d1)};
}

std::pair<double, double> tau_derivatives_at_zero(const ScalarCurve& curve) {
  const CurveSample at0 = curve.eval(0.0);
  if (!(at0.first > 0.0)) {
    throw RegularityError(
        "short-horizon approximation unavailable: initial slope is not positive");
  }
  const double s = curve.scale;
  return {s / at0.first, -s * s * at0.second / (at0.first * at0.first * at0.first)};
}

double tau_short_horizon(const ScalarCurve& curve, double epsilon) {
  const auto [d1, d2] = tau_derivatives_at_zero(curve);
  return d1 * epsilon + 0.5 * d2 * epsilon * epsilon;
}

}  // namespace qmem
