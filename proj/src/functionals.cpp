#include "qmem/functionals.hpp"

#include <cmath>

#include "qmem/parallel.hpp"

namespace qmem {

namespace {

struct FlowBlocks {
  RealMatrix transition;  // e^{tA}
  RealMatrix gramian;     // G(t)
};

// e^{tA} and G(t) together. The block exponential is taken at t / 2^k with
// |t A| small and then doubled via G(2s) = G(s) + e^{sA} G(s) e^{sA^T}, which
// avoids the growth of the e^{-sA^T} block at long horizons.
FlowBlocks flow_blocks(const OqhoModel& model, double t) {
  const Eigen::Index n = model.n();
  if (t == 0.0) {
    return {RealMatrix::Identity(n, n), RealMatrix::Zero(n, n)};
  }
  const RealMatrix& a = model.drift();
  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  double step = t;
  int doublings = 0;
  while (step * norm > 1.0 && doublings < 64) {
    step *= 0.5;
    ++doublings;
  }

  RealMatrix block = RealMatrix::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = a;
  block.topRightCorner(n, n) = model.diffusion();
  block.bottomRightCorner(n, n) = -a.transpose();
  const RealMatrix e = expm(RealMatrix(step * block));

  FlowBlocks out{e.topLeftCorner(n, n), e.topRightCorner(n, n) * e.topLeftCorner(n, n).transpose()};
  for (int k = 0; k < doublings; ++k) {
    out.gramian += out.transition * out.gramian * out.transition.transpose();
    out.transition = out.transition * out.transition;
  }
  out.gramian = symmetrize(out.gramian);
  return out;
}

}  // namespace

RealMatrix gramian(const OqhoModel& model, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw Error("gramian: time must be finite and >= 0");
  return flow_blocks(model, t).gramian;
}

DeltaSample delta_sample(const OqhoModel& model, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw Error("delta: time must be finite and >= 0");
  const Eigen::Index n = model.n();
  const RealMatrix& a = model.drift();
  const RealMatrix& p = model.p0();
  const RealMatrix& sigma = model.sigma_weight();

  const FlowBlocks flow = flow_blocks(model, t);
  const RealMatrix& e = flow.transition;
  const RealMatrix& g = flow.gramian;
  const RealMatrix alpha = e - RealMatrix::Identity(n, n);

  const RealMatrix ep = e * p;
  const RealMatrix aep = a * ep;
  const RealMatrix g_dot = a * g + g * a.transpose() + model.diffusion();

  DeltaSample out;
  if (t > 0.0) {
    out.value = frobenius_inner(sigma, alpha * p * alpha.transpose()) + frobenius_inner(sigma, g);
  }
  out.derivatives.first =
      frobenius_inner(sigma, 2.0 * symmetrize(aep * alpha.transpose()) + g_dot);
  out.derivatives.second = frobenius_inner(
      sigma, 2.0 * symmetrize(a * aep * alpha.transpose()) + 2.0 * aep * (a * e).transpose() +
                 a * g_dot + g_dot * a.transpose());
  return out;
}

double delta(const OqhoModel& model, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw Error("delta: time must be finite and >= 0");
  if (t == 0.0) return 0.0;
  const FlowBlocks flow = flow_blocks(model, t);
  const RealMatrix alpha = flow.transition - RealMatrix::Identity(model.n(), model.n());
  const RealMatrix& sigma = model.sigma_weight();
  return frobenius_inner(sigma, alpha * model.p0() * alpha.transpose()) +
         frobenius_inner(sigma, flow.gramian);
}

Derivatives delta_derivatives(const OqhoModel& model, double t) {
  return delta_sample(model, t).derivatives;
}

double delta_star(const OqhoModel& model) {
  const double value = (model.weight() * model.p0() * model.weight().transpose()).trace();
  if (!(value > 1e-14)) {
    throw DegenerateScaleError("delta_star: reference scale tr(F P F^T) vanishes");
  }
  return value;
}

SupResult delta_sup(const OqhoModel& model, double horizon, int grid_points) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw Error("delta_sup: horizon must be positive and finite");
  }
  grid_points = std::max(grid_points, 3);
  const double spacing = horizon / (grid_points - 1);

  SupResult best{0.0, 0.0};
  int best_index = 0;
  for (int i = 1; i < grid_points; ++i) {
    const double t = (i == grid_points - 1) ? horizon : i * spacing;
    const double v = delta(model, t);
    if (v > best.value) {
      best = {v, t};
      best_index = i;
    }
  }
  if (best_index == 0) return best;

  // Golden-section maximization on the two grid cells around the best node.
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = std::max(0.0, (best_index - 1) * spacing);
  double hi = std::min(horizon, (best_index + 1) * spacing);
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double f1 = delta(model, x1);
  double f2 = delta(model, x2);
  const double tol = 1e-8 * horizon;
  while (hi - lo > tol) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = delta(model, x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = delta(model, x1);
    }
  }
  const double t_star = 0.5 * (lo + hi);
  const double v_star = delta(model, t_star);
  if (v_star > best.value) best = {v_star, t_star};
  return best;
}

EvolvedState evolve_state_detailed(const Lindbladian& lind, const ComplexMatrix& sigma0, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw Error("evolve_state: time must be finite and >= 0");
  if (sigma0.rows() != lind.dim || sigma0.cols() != lind.dim) {
    throw DimensionError("evolve_state: state does not match the generator dimension");
  }
  ComplexMatrix raw = sigma0;
  if (t > 0.0) {
    raw = unvec(expm(ComplexMatrix(t * lind.matrix)) * vec(sigma0), lind.dim);
  }
  EvolvedState out;
  out.hermiticity_drift = (raw - raw.adjoint()).cwiseAbs().maxCoeff() * 0.5;
  out.sigma = hermitize(raw);
  return out;
}

ComplexMatrix evolve_state(const Lindbladian& lind, const ComplexMatrix& sigma0, double t) {
  return evolve_state_detailed(lind, sigma0, t).sigma;
}

GammaSample gamma_sample(const FiniteLevelModel& model, const Lindbladian& lind, double t) {
  const ComplexMatrix sigma = evolve_state(lind, model.sigma0(), t);
  const ComplexMatrix dev = sigma - model.sigma0();
  const ComplexMatrix l1 = lind.apply(sigma);
  const ComplexMatrix l2 = lind.apply(l1);
  GammaSample out;
  out.value = dev.squaredNorm();
  out.derivatives.first = 2.0 * frobenius_inner(dev, l1).real();
  out.derivatives.second = 2.0 * frobenius_inner(dev, l2).real() + 2.0 * l1.squaredNorm();
  return out;
}

double gamma(const FiniteLevelModel& model, const Lindbladian& lind, double t) {
  return (evolve_state(lind, model.sigma0(), t) - model.sigma0()).squaredNorm();
}

Derivatives gamma_derivatives(const FiniteLevelModel& model, const Lindbladian& lind, double t) {
  return gamma_sample(model, lind, t).derivatives;
}

double gamma_star(const FiniteLevelModel& model) { return model.sigma0().squaredNorm(); }

std::string_view to_string(TraceKind kind) {
  switch (kind) {
    case TraceKind::HeisenbergDelta:
      return "heisenberg-delta";
    case TraceKind::SchrodingerGamma:
      return "schrodinger-gamma";
  }
  return "unknown";
}

std::vector<double> uniform_grid(double t0, double t1, int points) {
  if (points < 1) throw Error("uniform_grid: need at least one point");
  if (!(t1 >= t0)) throw Error("uniform_grid: end precedes start");
  std::vector<double> out(static_cast<std::size_t>(points));
  if (points == 1) {
    out[0] = t0;
    return out;
  }
  const double spacing = (t1 - t0) / (points - 1);
  for (int i = 0; i < points; ++i) out[i] = t0 + i * spacing;
  out.back() = t1;
  return out;
}

DeviationTrace delta_trace(const OqhoModel& model, const std::vector<double>& times, int jobs) {
  DeviationTrace trace{times, {}, TraceKind::HeisenbergDelta};
  trace.values = parallel_map(times.size(), jobs, [&](std::size_t i) { return delta(model, times[i]); });
  return trace;
}

DeviationTrace gamma_trace(const FiniteLevelModel& model, const Lindbladian& lind,
                           const std::vector<double>& times, int jobs) {
  DeviationTrace trace{times, {}, TraceKind::SchrodingerGamma};
  trace.values =
      parallel_map(times.size(), jobs, [&](std::size_t i) { return gamma(model, lind, times[i]); });
  return trace;
}

}  // namespace qmem
