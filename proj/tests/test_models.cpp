#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qmem/functionals.hpp"
#include "qmem/models.hpp"

namespace qmem {
namespace {

RealMatrix theta2() { return 0.5 * oracle::block_j(2); }

GTEST_TEST(Oqho, ClosedSystemHasZeroDriftAndDispersion) {
  const RealMatrix z = RealMatrix::Zero(2, 2);
  const RealMatrix i2 = RealMatrix::Identity(2, 2);
  const OqhoModel model = build_oqho(theta2(), z, z, i2, 0.5 * i2);
  EXPECT_EQ(model.drift(), z);
  EXPECT_EQ(model.dispersion(), z);
}

GTEST_TEST(Oqho, HandMultipliedDriftAndDispersion) {
  const RealMatrix i2 = RealMatrix::Identity(2, 2);
  const OqhoModel model = build_oqho(theta2(), RealMatrix::Zero(2, 2), i2, i2, 0.5 * i2);
  EXPECT_LE((model.drift() + i2).norm(), 1e-15);
  RealMatrix b(2, 2);
  b << 0, 1, -1, 0;
  EXPECT_LE((model.dispersion() - b).norm(), 1e-15);
  EXPECT_EQ(model.sigma_weight(), i2);
  EXPECT_DOUBLE_EQ(delta_star(model), 1.0);
}

GTEST_TEST(Oqho, FormulaOnRandomInputs) {
  oracle::Random rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = rng.pick({2, 4});
    const int m = rng.pick({2, 4});
    const RealMatrix theta = 0.5 * oracle::block_j(n);
    const RealMatrix r = rng.symmetric(n);
    const RealMatrix coupling = rng.matrix(m, n);
    const OqhoModel model =
        build_oqho(theta, r, coupling, RealMatrix::Identity(n, n), RealMatrix::Identity(n, n));
    const RealMatrix j = oracle::block_j(m);
    EXPECT_LE((model.drift() - 2.0 * theta * (r + coupling.transpose() * j * coupling)).norm(), 1e-13);
    EXPECT_LE((model.dispersion() - 2.0 * theta * coupling.transpose()).norm(), 1e-13);
  }
}

GTEST_TEST(Oqho, ValidationNamesTheField) {
  const RealMatrix i2 = RealMatrix::Identity(2, 2);
  const RealMatrix z = RealMatrix::Zero(2, 2);
  auto field_of = [](auto&& fn) -> std::string {
    try {
      fn();
    } catch (const ValidationError& e) {
      return e.field();
    }
    return "";
  };
  RealMatrix r(2, 2);
  r << 0, 1, 0, 0;
  EXPECT_EQ(field_of([&] { build_oqho(theta2(), r, z, i2, i2); }), "R");
  RealMatrix f(2, 2);
  f << 1, 1, 1, 1;
  EXPECT_EQ(field_of([&] { build_oqho(theta2(), z, z, f, i2); }), "F");
  EXPECT_EQ(field_of([&] { build_oqho(theta2(), z, z, i2, RealMatrix(-i2)); }), "P");
  EXPECT_EQ(field_of([&] { build_oqho(RealMatrix(i2), z, z, i2, i2); }), "theta");
  const RealMatrix i3 = RealMatrix::Identity(3, 3);
  EXPECT_THROW(build_oqho(RealMatrix::Zero(3, 3), i3, RealMatrix::Zero(2, 3), i3, i3), ValidationError);
  EXPECT_THROW(build_oqho(theta2(), z, RealMatrix::Zero(3, 2), i2, i2), ValidationError);
}

GTEST_TEST(Oqho, UncertaintyViolationIsOnlyAWarning) {
  const RealMatrix i2 = RealMatrix::Identity(2, 2);
  const RealMatrix z = RealMatrix::Zero(2, 2);
  // P + i Theta >= 0 needs P >= I/2 here; 0.1 I violates it.
  const OqhoModel model = build_oqho(theta2(), z, z, i2, 0.1 * i2);
  EXPECT_FALSE(model.warnings().empty());
  EXPECT_TRUE(build_oqho(theta2(), z, z, i2, 0.5 * i2).warnings().empty());
}

GTEST_TEST(Oqho, RawModeShapes) {
  const RealMatrix i2 = RealMatrix::Identity(2, 2);
  EXPECT_NO_THROW(oracle::damped_pair());
  EXPECT_NO_THROW(build_oqho_raw(RealMatrix::Zero(2, 2), RealMatrix::Zero(2, 2), i2, i2));
  EXPECT_THROW(build_oqho_raw(-i2, RealMatrix::Zero(3, 2), i2, i2), DimensionError);
  EXPECT_FALSE(oracle::damped_pair().is_physical());
}

GTEST_TEST(Oqho, RawRefitReproducesDelta) {
  oracle::Random rng(4);
  const OqhoModel phys = oracle::random_oqho(rng, 4, 2);
  const OqhoModel raw = build_oqho_raw(phys.drift(), phys.dispersion(), phys.weight(), phys.p0());
  for (double t : uniform_grid(0.0, 2.0, 21)) {
    const double a = delta(phys, t);
    EXPECT_LE(std::abs(a - delta(raw, t)), 1e-12 * std::max(1.0, a));
  }
}

GTEST_TEST(ItoMatrix, HermitianWithEigenvaluesZeroAndTwo) {
  for (int m : {2, 4, 6}) {
    const ComplexMatrix omega = ito_matrix(m);
    EXPECT_LE((omega - omega.adjoint()).norm(), 0.0);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(omega);
    for (int k = 0; k < m; ++k) {
      const double ev = es.eigenvalues()(k);
      EXPECT_LT(std::min(std::abs(ev), std::abs(ev - 2.0)), 1e-14);
    }
  }
}

GTEST_TEST(FiniteLevel, Validation) {
  const ComplexMatrix z = ComplexMatrix::Zero(2, 2);
  ComplexMatrix rho = ComplexMatrix::Identity(2, 2) * 0.5;
  EXPECT_NO_THROW(build_finite_level(z, {z, z}, rho));
  EXPECT_THROW(build_finite_level(z, {z}, rho), ValidationError);  // odd coupling count
  ComplexMatrix nonherm = z;
  nonherm(0, 1) = 1.0;
  EXPECT_THROW(build_finite_level(nonherm, {z, z}, rho), ValidationError);
  EXPECT_THROW(build_finite_level(z, {nonherm, z}, rho), ValidationError);
  EXPECT_THROW(build_finite_level(z, {z, z}, ComplexMatrix(2.0 * rho)), ValidationError);
  ComplexMatrix neg(2, 2);
  neg << 1.5, 0, 0, -0.5;
  EXPECT_THROW(build_finite_level(z, {z, z}, neg), ValidationError);
}

GTEST_TEST(Lindbladian, ZeroModelGivesZeroGenerator) {
  const ComplexMatrix z = ComplexMatrix::Zero(2, 2);
  const Lindbladian lind =
      assemble_lindbladian(build_finite_level(z, {z, z}, ComplexMatrix::Identity(2, 2) * 0.5));
  EXPECT_EQ(lind.matrix.norm(), 0.0);
}

GTEST_TEST(Lindbladian, DephasingContractsCoherence) {
  const Lindbladian lind = assemble_lindbladian(oracle::dephasing());
  ComplexMatrix sx(2, 2);
  sx << 0, 1, 1, 0;
  EXPECT_LE((lind.apply(sx) + 2.0 * sx).norm(), 1e-14);
}

GTEST_TEST(Lindbladian, PureHamiltonianSpectrum) {
  const double omega = 1.7;
  ComplexMatrix h(2, 2);
  h << omega / 2, 0, 0, -omega / 2;
  const ComplexMatrix z = ComplexMatrix::Zero(2, 2);
  const Lindbladian lind =
      assemble_lindbladian(build_finite_level(h, {z, z}, ComplexMatrix::Identity(2, 2) * 0.5));
  Eigen::ComplexEigenSolver<ComplexMatrix> es(lind.matrix);
  std::vector<double> im;
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(es.eigenvalues()(k).real(), 0.0, 1e-14);
    im.push_back(es.eigenvalues()(k).imag());
  }
  std::sort(im.begin(), im.end());
  EXPECT_NEAR(im[0], -omega, 1e-14);
  EXPECT_NEAR(im[1], 0.0, 1e-14);
  EXPECT_NEAR(im[2], 0.0, 1e-14);
  EXPECT_NEAR(im[3], omega, 1e-14);
}

GTEST_TEST(Lindbladian, MatchesOperatorLevelFormula) {
  oracle::Random rng(5);
  for (int d : {2, 3, 4}) {
    const FiniteLevelModel model = oracle::random_finite_level(rng, d, rng.pick({2, 4}));
    const Lindbladian lind = assemble_lindbladian(model);
    const ComplexMatrix x = rng.hermitian(d) + Complex(0, 1) * rng.hermitian(d);
    const ComplexMatrix want = oracle::lindblad_apply(model.hamiltonian(), model.couplings(), x);
    EXPECT_LE((lind.apply(x) - want).norm(), 1e-12 * std::max(1.0, want.norm()));
  }
}

GTEST_TEST(Lindbladian, TraceAnnihilatingHermiticityPreservingAndAdjoint) {
  oracle::Random rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    const int d = rng.pick({2, 3});
    const Lindbladian lind = assemble_lindbladian(oracle::random_finite_level(rng, d));
    EXPECT_LE((lind.adjoint_matrix - lind.matrix.adjoint()).norm(), 1e-10);
    const ComplexVector id = vec(ComplexMatrix::Identity(d, d));
    EXPECT_LE((id.adjoint() * lind.matrix).norm(), 1e-10);
    for (int k = 0; k < 100; ++k) {
      const ComplexMatrix x = rng.hermitian(d);
      const ComplexMatrix lx = lind.apply(x);
      EXPECT_LE(std::abs(lx.trace()), 1e-10);
      EXPECT_LE((lx - lx.adjoint()).norm(), 1e-10);
    }
    for (int k = 0; k < 20; ++k) {
      const ComplexMatrix x = rng.hermitian(d);
      const ComplexMatrix y = rng.hermitian(d);
      const Complex lhs = frobenius_inner(lind.apply_adjoint(x), y);
      const Complex rhs = frobenius_inner(x, lind.apply(y));
      EXPECT_LE(std::abs(lhs - rhs), 1e-10 * std::max(1.0, std::abs(rhs)));
    }
  }
}

}  // namespace
}  // namespace qmem
