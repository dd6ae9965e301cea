#pragma once

// Test-side reference computations. None of these call into the library's
// numerics; they use plain series, Simpson sums and RK4 so that agreement with
// the library is evidence rather than tautology.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "qmem/models.hpp"

namespace oracle {

using qmem::Complex;
using qmem::ComplexMatrix;
using qmem::RealMatrix;

// Taylor series with scaling and squaring.
template <class Mat>
Mat expm_series(const Mat& m) {
  const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (norm / std::ldexp(1.0, squarings) > 0.25) ++squarings;
  const Mat x = m / std::ldexp(1.0, squarings);
  Mat term = Mat::Identity(m.rows(), m.cols());
  Mat sum = term;
  for (int k = 1; k < 40; ++k) {
    term = term * x / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

// int_0^t e^{vA} Q e^{vA^T} dv by composite Simpson.
inline RealMatrix gramian_simpson(const RealMatrix& a, const RealMatrix& q, double t,
                                  int intervals = 2000) {
  RealMatrix sum = RealMatrix::Zero(a.rows(), a.rows());
  if (t == 0.0) return sum;
  const double h = t / intervals;
  const RealMatrix step = expm_series(RealMatrix(a * h));
  RealMatrix e = RealMatrix::Identity(a.rows(), a.rows());
  for (int i = 0; i <= intervals; ++i) {
    const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    sum += w * e * q * e.transpose();
    e = step * e;
  }
  return sum * h / 3.0;
}

// <F^T F, (e^{tA} - I) P (e^{tA} - I)^T + G(t)>.
inline double delta(const RealMatrix& a, const RealMatrix& b, const RealMatrix& f,
                    const RealMatrix& p, double t) {
  const RealMatrix alpha = expm_series(RealMatrix(a * t)) - RealMatrix::Identity(a.rows(), a.rows());
  const RealMatrix sigma = f.transpose() * f;
  const RealMatrix g = gramian_simpson(a, b * b.transpose(), t);
  return (sigma.cwiseProduct(alpha * p * alpha.transpose() + g)).sum();
}

// Symplectic block J_m, written out entry by entry.
inline RealMatrix block_j(int m) {
  RealMatrix j = RealMatrix::Zero(m, m);
  for (int k = 0; k < m; k += 2) {
    j(k, k + 1) = 1.0;
    j(k + 1, k) = -1.0;
  }
  return j;
}

// Lindblad action at operator level:
// -i[H, s] + sum_jk conj(W_jk) L_j s L_k - 1/2 {sum_jk W_jk L_j L_k, s},  W = I + iJ.
inline ComplexMatrix lindblad_apply(const ComplexMatrix& h, const std::vector<ComplexMatrix>& ls,
                                    const ComplexMatrix& s) {
  const Complex i(0.0, 1.0);
  const int m = static_cast<int>(ls.size());
  const RealMatrix j = block_j(m);
  ComplexMatrix out = -i * (h * s - s * h);
  ComplexMatrix k = ComplexMatrix::Zero(s.rows(), s.cols());
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      const Complex w((a == b) ? 1.0 : 0.0, j(a, b));
      if (w == Complex(0.0, 0.0)) continue;
      out += std::conj(w) * ls[a] * s * ls[b];
      k += w * ls[a] * ls[b];
    }
  }
  out -= 0.5 * (k * s + s * k);
  return out;
}

// Classical RK4 on the master equation.
inline ComplexMatrix evolve_rk4(const ComplexMatrix& h, const std::vector<ComplexMatrix>& ls,
                                const ComplexMatrix& s0, double t, int steps = 4000) {
  ComplexMatrix s = s0;
  const double dt = t / steps;
  for (int n = 0; n < steps; ++n) {
    const ComplexMatrix k1 = lindblad_apply(h, ls, s);
    const ComplexMatrix k2 = lindblad_apply(h, ls, s + 0.5 * dt * k1);
    const ComplexMatrix k3 = lindblad_apply(h, ls, s + 0.5 * dt * k2);
    const ComplexMatrix k4 = lindblad_apply(h, ls, s + dt * k3);
    s += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return s;
}

// (1/T) int_0^{span} e^{-t/T} f(t) dt by composite Simpson in u = t/T.
inline double discounted_simpson(const std::function<double(double)>& f, double horizon,
                                 double span_in_horizons = 60.0, int intervals = 6000) {
  const double h = span_in_horizons / intervals;
  double sum = 0.0;
  for (int i = 0; i <= intervals; ++i) {
    const double u = h * i;
    const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    sum += w * std::exp(-u) * f(u * horizon);
  }
  return sum * h / 3.0;
}

inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double second_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

inline double relative_error(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

// ---- random inputs ---------------------------------------------------------

class Random {
 public:
  explicit Random(unsigned seed) : gen_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen_); }
  int pick(std::initializer_list<int> choices) {
    std::uniform_int_distribution<std::size_t> d(0, choices.size() - 1);
    return *(choices.begin() + d(gen_));
  }

  RealMatrix matrix(int rows, int cols) {
    RealMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = normal();
    return m;
  }

  RealMatrix symmetric(int n) {
    const RealMatrix m = matrix(n, n);
    return 0.5 * (m + m.transpose());
  }

  // Positive definite with eigenvalues bounded away from zero.
  RealMatrix positive(int n) {
    const RealMatrix m = matrix(n, n);
    return m * m.transpose() / n + 0.2 * RealMatrix::Identity(n, n);
  }

  ComplexMatrix hermitian(int d) {
    ComplexMatrix m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = Complex(normal(), normal());
    return 0.5 * (m + m.adjoint());
  }

  ComplexMatrix density(int d) {
    ComplexMatrix m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = Complex(normal(), normal());
    ComplexMatrix rho = m * m.adjoint();
    return rho / rho.trace().real();
  }

  std::mt19937& engine() { return gen_; }

 private:
  std::mt19937 gen_;
};

// Physical-mode oscillator with canonical CCR and random energy/coupling.
inline qmem::OqhoModel random_oqho(Random& rng, int n, int m) {
  const RealMatrix theta = 0.5 * block_j(n);
  const RealMatrix r = 0.5 * rng.symmetric(n);
  const RealMatrix coupling = 0.7 * rng.matrix(m, n);
  const RealMatrix f = rng.matrix(n, n) + 2.0 * RealMatrix::Identity(n, n);
  const RealMatrix p = rng.positive(n);
  return qmem::build_oqho(theta, r, coupling, f, p);
}

inline qmem::FiniteLevelModel random_finite_level(Random& rng, int d, int m = 2) {
  std::vector<ComplexMatrix> ls;
  for (int k = 0; k < m; ++k) ls.push_back(0.6 * rng.hermitian(d));
  return qmem::build_finite_level(0.8 * rng.hermitian(d), ls, rng.density(d));
}

// ---- reference models -----------------------------------------------------

// A = -I, B = sqrt(2) I, F = I, P = I/2:
// Delta(t) = (1 - e^{-t})^2 + 2 (1 - e^{-2t}).
inline qmem::OqhoModel damped_pair() {
  const RealMatrix i2 = RealMatrix::Identity(2, 2);
  return qmem::build_oqho_raw(-i2, std::sqrt(2.0) * i2, i2, 0.5 * i2);
}

inline double damped_pair_delta(double t) {
  const double a = -std::expm1(-t);
  return a * a - 2.0 * std::expm1(-2.0 * t);
}

inline double damped_pair_discounted(double horizon) {
  const double tt = horizon;
  return 1.0 - 2.0 / (1.0 + tt) + 1.0 / (1.0 + 2.0 * tt) + 4.0 * tt / (1.0 + 2.0 * tt);
}

// Qubit dephasing: H0 = 0, L1 = sigma_z, L2 = 0, sigma0 = (I + sigma_x)/2.
// Gamma(t) = (1 - e^{-2t})^2 / 2.
inline qmem::FiniteLevelModel dephasing() {
  ComplexMatrix sz(2, 2), sx(2, 2);
  sz << 1, 0, 0, -1;
  sx << 0, 1, 1, 0;
  const ComplexMatrix zero = ComplexMatrix::Zero(2, 2);
  return qmem::build_finite_level(zero, {sz, zero},
                                  0.5 * (ComplexMatrix::Identity(2, 2) + sx));
}

inline double dephasing_gamma(double t) {
  const double a = -std::expm1(-2.0 * t);
  return 0.5 * a * a;
}

inline double dephasing_discounted(double horizon) {
  return 0.5 * (1.0 - 2.0 / (1.0 + 2.0 * horizon) + 1.0 / (1.0 + 4.0 * horizon));
}

// Two-parameter family with a strict interior maximum of tau at eps = 0.1:
// R(p) = R0 + p1 I + p2 X, M = 0.3 I, F = I, P = I/2 (maximum near (-0.25, -0.1)).
struct Family {
  RealMatrix theta;
  RealMatrix energy;
  RealMatrix coupling;
  RealMatrix weight;
  RealMatrix p0;
  std::vector<RealMatrix> directions_energy;
  std::vector<RealMatrix> directions_coupling;
};

inline Family two_parameter_family() {
  Family f;
  f.theta = 0.5 * block_j(2);
  f.energy.resize(2, 2);
  f.energy << 0.3, 0.1, 0.1, 0.2;
  f.coupling = 0.3 * RealMatrix::Identity(2, 2);
  f.weight = RealMatrix::Identity(2, 2);
  f.p0 = 0.5 * RealMatrix::Identity(2, 2);
  RealMatrix x(2, 2);
  x << 0, 1, 1, 0;
  f.directions_energy = {RealMatrix::Identity(2, 2), x};
  f.directions_coupling = {RealMatrix::Zero(2, 2), RealMatrix::Zero(2, 2)};
  return f;
}

}  // namespace oracle
