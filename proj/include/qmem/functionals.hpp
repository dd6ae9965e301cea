#pragma once

// Mean-square deviation functionals: the Heisenberg-picture Delta(t) of an
// OQHO (closed form via the controllability Gramian) and the
// Schrodinger-picture Gamma(t) = ||sigma(t) - sigma0||_HS^2 of a finite-level
// system, with their first two time derivatives.

#include <string_view>
#include <vector>

#include "qmem/models.hpp"

namespace qmem {

struct Derivatives {
  double first = 0.0;
  double second = 0.0;
};

/// G(t) = int_0^t e^{vA} B B^T e^{vA^T} dv, via one exponential of the block
/// matrix [[A, BB^T], [0, -A^T]].
RealMatrix gramian(const OqhoModel& model, double t);

/// Delta(t) = <Sigma, alpha P alpha^T> + <Sigma, G(t)> with alpha = e^{tA} - I.
double delta(const OqhoModel& model, double t);

/// Analytic first and second time derivatives of delta().
Derivatives delta_derivatives(const OqhoModel& model, double t);

/// Value and both derivatives from a single exponential evaluation.
struct DeltaSample {
  double value = 0.0;
  Derivatives derivatives;
};
DeltaSample delta_sample(const OqhoModel& model, double t);

/// Delta_* = tr(F P F^T). Throws DegenerateScaleError when <= 1e-14.
double delta_star(const OqhoModel& model);

struct SupResult {
  double value = 0.0;
  double argmax = 0.0;
};

/// max_{0<=t<=T} Delta(t): grid scan followed by golden-section refinement.
SupResult delta_sup(const OqhoModel& model, double horizon, int grid_points = 512);

struct EvolvedState {
  ComplexMatrix sigma;
  /// Max-entry anti-Hermitian part removed by the final Hermitization.
  double hermiticity_drift = 0.0;
};

/// sigma(t) = e^{tL}(sigma0), Hermitized.
EvolvedState evolve_state_detailed(const Lindbladian& lind, const ComplexMatrix& sigma0, double t);
ComplexMatrix evolve_state(const Lindbladian& lind, const ComplexMatrix& sigma0, double t);

/// Gamma(t) = Tr((sigma(t) - sigma0)^2).
double gamma(const FiniteLevelModel& model, const Lindbladian& lind, double t);

/// Gamma' = 2<g, L(s)>, Gamma'' = 2<g, L^2(s)> + 2||L(s)||^2, g = s - sigma0.
Derivatives gamma_derivatives(const FiniteLevelModel& model, const Lindbladian& lind, double t);

struct GammaSample {
  double value = 0.0;
  Derivatives derivatives;
};
GammaSample gamma_sample(const FiniteLevelModel& model, const Lindbladian& lind, double t);

/// Gamma_* = Tr(sigma0^2).
double gamma_star(const FiniteLevelModel& model);

enum class TraceKind { HeisenbergDelta, SchrodingerGamma };

std::string_view to_string(TraceKind kind);

struct DeviationTrace {
  std::vector<double> times;
  std::vector<double> values;
  TraceKind kind = TraceKind::HeisenbergDelta;
};

/// Evaluates the functional on `times`; `jobs > 1` spreads grid points over
/// worker threads, output order always follows `times`.
DeviationTrace delta_trace(const OqhoModel& model, const std::vector<double>& times, int jobs = 1);
DeviationTrace gamma_trace(const FiniteLevelModel& model, const Lindbladian& lind,
                           const std::vector<double>& times, int jobs = 1);

/// n points uniformly spaced on [t0, t1], endpoints included.
std::vector<double> uniform_grid(double t0, double t1, int points);

}  // namespace qmem
