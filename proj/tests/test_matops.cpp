#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qmem/matops.hpp"

namespace qmem {
namespace {

GTEST_TEST(Expm, MatchesTaylorSeries) {
  oracle::Random rng(11);
  for (int n : {1, 2, 3, 5, 8}) {
    const RealMatrix m = 1.5 * rng.matrix(n, n);
    EXPECT_LE((expm(m) - oracle::expm_series(m)).norm(), 1e-11 * oracle::expm_series(m).norm());
  }
}

GTEST_TEST(Expm, ComplexMatchesTaylorSeries) {
  oracle::Random rng(12);
  const ComplexMatrix h = rng.hermitian(3);
  const ComplexMatrix m = Complex(0.2, -1.3) * h;
  EXPECT_LE((expm(m) - oracle::expm_series(m)).norm(), 1e-11 * expm(m).norm());
}

GTEST_TEST(Expm, DiagonalAndRotation) {
  RealMatrix d = RealMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = -2.0;
  const RealMatrix e = expm(d);
  EXPECT_NEAR(e(0, 0), std::exp(1.0), 1e-14);
  EXPECT_NEAR(e(1, 1), std::exp(-2.0), 1e-15);

  RealMatrix w(2, 2);
  w << 0, 1, -1, 0;
  const RealMatrix r = expm(RealMatrix(0.7 * w));
  EXPECT_NEAR(r(0, 0), std::cos(0.7), 1e-15);
  EXPECT_NEAR(r(0, 1), std::sin(0.7), 1e-15);
}

GTEST_TEST(Expm, RejectsBadInput) {
  EXPECT_THROW(expm(RealMatrix(RealMatrix::Zero(2, 3))), DimensionError);
  RealMatrix nan = RealMatrix::Zero(2, 2);
  nan(0, 1) = std::nan("");
  EXPECT_THROW(expm(nan), Error);
  EXPECT_THROW(expm(RealMatrix(1000.0 * RealMatrix::Identity(2, 2))), Error);
}

GTEST_TEST(Lyapunov, RealResidualVanishes) {
  oracle::Random rng(21);
  for (int n : {2, 3, 4, 6}) {
    RealMatrix a = rng.matrix(n, n);
    a -= (spectral_abscissa(a) + 0.5) * RealMatrix::Identity(n, n);
    const RealMatrix q = rng.positive(n);
    const RealMatrix x = solve_lyapunov(a, q);
    EXPECT_LE((a * x + x * a.transpose() + q).norm(), 1e-11 * q.norm());
    EXPECT_LE((x - x.transpose()).norm(), 1e-14 * x.norm());
    // Hurwitz A and Q > 0 give X > 0.
    EXPECT_GT(min_hermitian_eigenvalue(x), 0.0);
  }
}

GTEST_TEST(Lyapunov, MatchesGramianIntegral) {
  RealMatrix a(2, 2);
  a << -1.0, 0.5, -0.3, -0.8;
  const RealMatrix q = RealMatrix::Identity(2, 2);
  // X = int_0^inf e^{tA} Q e^{tA^T} dt, truncated where the integrand is ~e^{-40}.
  const RealMatrix x = oracle::gramian_simpson(a, q, 50.0, 20000);
  EXPECT_LE((solve_lyapunov(a, q) - x).norm(), 1e-9);
}

GTEST_TEST(Lyapunov, ComplexResidualVanishes) {
  oracle::Random rng(22);
  ComplexMatrix a = rng.hermitian(3) * Complex(0.3, 1.0);
  a -= Complex(spectral_abscissa(a) + 0.4, 0.0) * ComplexMatrix::Identity(3, 3);
  const ComplexMatrix q = rng.hermitian(3);
  const ComplexMatrix x = solve_lyapunov(a, q);
  EXPECT_LE((a * x + x * a.adjoint() + q).norm(), 1e-11 * q.norm());
  EXPECT_LE((x - x.adjoint()).norm(), 1e-13);
}

GTEST_TEST(Lyapunov, RejectsUnstable) {
  EXPECT_THROW(solve_lyapunov(RealMatrix(RealMatrix::Identity(2, 2)), RealMatrix(RealMatrix::Identity(2, 2))),
               StabilityError);
  EXPECT_THROW(solve_lyapunov(RealMatrix(RealMatrix::Zero(2, 2)), RealMatrix(RealMatrix::Identity(2, 2))),
               StabilityError);
}

GTEST_TEST(SpectralAbscissa, KnownSpectra) {
  RealMatrix a(2, 2);
  a << 0.0, 1.0, -1.0, 0.0;
  EXPECT_NEAR(spectral_abscissa(a), 0.0, 1e-15);
  a << -1.0, 5.0, 0.0, -3.0;
  EXPECT_NEAR(spectral_abscissa(a), -1.0, 1e-14);
}

GTEST_TEST(Vectorization, ColumnStackingIdentity) {
  oracle::Random rng(31);
  const ComplexMatrix a = rng.hermitian(3) + Complex(0, 1) * rng.hermitian(3);
  const ComplexMatrix b = rng.hermitian(3);
  const ComplexMatrix x = rng.hermitian(3) * Complex(1, 2);
  const ComplexVector lhs = vec(a * x * b);
  const ComplexVector rhs = kron(ComplexMatrix(b.transpose()), a) * vec(x);
  EXPECT_LE((lhs - rhs).norm(), 1e-12);
  EXPECT_EQ(unvec(vec(x), 3), x);
  // Column stacking: second entry is x(1, 0).
  EXPECT_EQ(vec(x)(1), x(1, 0));
}

GTEST_TEST(InnerProducts, FrobeniusAndHermitian) {
  RealMatrix x(2, 2), y(2, 2);
  x << 1, 2, 3, 4;
  y << 5, 6, 7, 8;
  EXPECT_DOUBLE_EQ(frobenius_inner(x, y), 70.0);
  ComplexMatrix u(1, 1), v(1, 1);
  u(0, 0) = Complex(0, 1);
  v(0, 0) = Complex(1, 0);
  // <u, v> = Tr(u^* v) = -i.
  EXPECT_EQ(frobenius_inner(u, v), Complex(0, -1));
  EXPECT_EQ(symmetrize(x), RealMatrix((x + x.transpose()) / 2));
}

}  // namespace
}  // namespace qmem
