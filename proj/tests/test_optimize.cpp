#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qmem/functionals.hpp"
#include "qmem/optimize.hpp"

namespace qmem {
namespace {

constexpr double kEps = 0.1;

ParamMap family_map() {
  const oracle::Family f = oracle::two_parameter_family();
  return ParamMap(f.theta, f.energy, f.coupling, f.weight, f.p0, f.directions_energy,
                  f.directions_coupling);
}

// M(p) = (1 + p) M0 with R = 0: damping rate (0.3 (1 + p))^2.
ParamMap damping_map(const RealMatrix& energy = RealMatrix::Zero(2, 2)) {
  const oracle::Family f = oracle::two_parameter_family();
  return ParamMap(f.theta, energy, f.coupling, f.weight, f.p0, {RealMatrix::Zero(2, 2)},
                  {f.coupling});
}

ParamMap zero_direction_map() {
  const oracle::Family f = oracle::two_parameter_family();
  return ParamMap(f.theta, f.energy, f.coupling, f.weight, f.p0, {RealMatrix::Zero(2, 2)},
                  {RealMatrix::Zero(2, 2)});
}

RealVector vec2(double a, double b) {
  RealVector v(2);
  v << a, b;
  return v;
}

double tau_of(const ParamMap& map, const RealVector& p) { return *tau_at(map, p, kEps); }

GTEST_TEST(ParamMap, AffineAndValidated) {
  const ParamMap map = family_map();
  const RealVector p = vec2(0.2, -0.3);
  const oracle::Family f = oracle::two_parameter_family();
  EXPECT_LE((map.energy_at(p) - (f.energy + 0.2 * f.directions_energy[0] - 0.3 * f.directions_energy[1])).norm(), 1e-15);
  EXPECT_EQ(map.coupling_at(p), f.coupling);
  EXPECT_FALSE(map.is_trivial());
  EXPECT_TRUE(zero_direction_map().is_trivial());

  RealMatrix skew(2, 2);
  skew << 0, 1, -1, 0;
  EXPECT_THROW(ParamMap(f.theta, f.energy, f.coupling, f.weight, f.p0, {skew}, {f.coupling}), ValidationError);
  EXPECT_THROW(ParamMap(f.theta, f.energy, f.coupling, f.weight, f.p0, {skew, skew}, {f.coupling}),
               ValidationError);
  EXPECT_THROW(ParamMap::from_model(oracle::damped_pair(), {RealMatrix::Identity(2, 2)}, {}), ValidationError);
  // An omitted coupling list holds M fixed.
  const OqhoModel base = build_oqho(f.theta, f.energy, f.coupling, f.weight, f.p0);
  EXPECT_EQ(ParamMap::from_model(base, f.directions_energy, {}).size(), 2);
}

GTEST_TEST(Objective, Tags) {
  EXPECT_EQ(objective_from_string("tau-max"), Objective::TauMax);
  EXPECT_EQ(objective_from_string("delta-sup-min"), Objective::DeltaSupMin);
  EXPECT_EQ(objective_from_string("discounted-min"), Objective::DiscountedMin);
  EXPECT_EQ(to_string(Objective::DiscountedMin), "discounted-min");
  EXPECT_THROW(objective_from_string("tau-min"), ValidationError);
}

GTEST_TEST(Gradients, ZeroDirectionsGiveZero) {
  const ParamMap map = zero_direction_map();
  const RealVector p = RealVector::Zero(1);
  EXPECT_EQ(grad_delta_p(map, p, 0.7).norm(), 0.0);
  EXPECT_EQ(grad_tau(map, p, kEps).norm(), 0.0);
  EXPECT_EQ(hessian_tau(map, p, kEps).norm(), 0.0);
}

GTEST_TEST(Gradients, DampingSigns) {
  const ParamMap map = damping_map();
  const RealVector p = RealVector::Zero(1);
  const double t = 0.5;
  const double g = grad_delta_p(map, p, t)(0);
  const double up = delta(map.model_at(RealVector::Constant(1, 0.01)), t);
  const double down = delta(map.model_at(RealVector::Constant(1, -0.01)), t);
  EXPECT_GT(up, down);
  EXPECT_GT(g, 0.0);
  EXPECT_LT(grad_tau(map, p, kEps)(0), 0.0);
}

GTEST_TEST(Gradients, TauGradientAndHessianMatchFiniteDifferences) {
  const ParamMap map = family_map();
  oracle::Random rng(50);
  int checked = 0;
  while (checked < 10) {
    const RealVector p = vec2(rng.uniform(-0.5, 0.3), rng.uniform(-0.4, 0.3));
    const auto tau = tau_at(map, p, kEps);
    if (!tau) continue;
    const RealVector g = grad_tau(map, p, kEps);
    const RealMatrix h = hessian_tau(map, p, kEps);
    EXPECT_EQ(h, h.transpose());

    const double step = 1e-4;
    RealVector fd(2);
    RealMatrix fdh(2, 2);
    for (int i = 0; i < 2; ++i) {
      RealVector e = RealVector::Zero(2);
      e(i) = step;
      fd(i) = (tau_of(map, p + e) - tau_of(map, p - e)) / (2.0 * step);
    }
    const double hs = 1e-3;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        RealVector ei = RealVector::Zero(2), ej = RealVector::Zero(2);
        ei(i) = hs;
        ej(j) = hs;
        fdh(i, j) = (tau_of(map, p + ei + ej) - tau_of(map, p + ei - ej) - tau_of(map, p - ei + ej) +
                     tau_of(map, p - ei - ej)) /
                    (4.0 * hs * hs);
      }
    }
    EXPECT_LE((g - fd).norm(), 1e-3 * std::max(fd.norm(), 1e-3)) << "p = " << p.transpose();
    EXPECT_LE((h - fdh).norm(), 1e-2 * fdh.norm()) << "p = " << p.transpose();
    ++checked;
  }
}

GTEST_TEST(Gradients, OneParameterHessianMatchesSecondDifference) {
  const ParamMap map = damping_map(oracle::two_parameter_family().energy);
  for (double x : {-0.2, 0.0, 0.3}) {
    const RealVector p = RealVector::Constant(1, x);
    const double h = hessian_tau(map, p, kEps)(0, 0);
    const double fd = oracle::second_difference(
        [&](double y) { return tau_of(map, RealVector::Constant(1, y)); }, x, 1e-3);
    EXPECT_LE(oracle::relative_error(h, fd), 1e-2);
  }
}

GTEST_TEST(MaximizeTau, ZeroDirectionsConvergeImmediately) {
  const ParamMap map = zero_direction_map();
  const OptimizationReport r = maximize_tau(map, RealVector::Zero(1), kEps);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_EQ(r.p_final, r.p_init);
  const DualityRecord d = verify_duality(map, r.p_final, kEps);
  EXPECT_TRUE(d.passed());
  EXPECT_TRUE(d.degenerate);
}

GTEST_TEST(MaximizeTau, TwoParameterFamily) {
  const ParamMap map = family_map();
  const RealVector p0 = RealVector::Zero(2);
  const OptimizationReport r = maximize_tau(map, p0, kEps);
  ASSERT_TRUE(r.converged) << r.message;
  EXPECT_LT(r.trace.back().gradient_norm, 1e-6);
  EXPECT_GE(tau_of(map, r.p_final), tau_of(map, p0));
  for (std::size_t k = 1; k < r.trace.size(); ++k)
    EXPECT_GE(r.trace[k].value, r.trace[k - 1].value - 1e-12);
  // Interior maximum located with scipy during design: (-0.25, -0.1), tau 0.565626.
  EXPECT_NEAR(r.p_final(0), -0.25, 1e-4);
  EXPECT_NEAR(r.p_final(1), -0.1, 1e-4);
  EXPECT_NEAR(r.final_value(), 0.565626, 1e-5);
  EXPECT_TRUE(r.interior);

  const DualityRecord d = verify_duality(map, r.p_final, kEps);
  EXPECT_TRUE(d.stationary) << d.grad_norm;
  EXPECT_TRUE(d.curvature_ok) << d.hessian_min_eigenvalue;
  EXPECT_FALSE(d.degenerate);

  oracle::Random rng(51);
  const RealVector off = r.p_final + 0.1 * vec2(rng.normal(), rng.normal());
  EXPECT_FALSE(verify_duality(map, off, kEps).stationary);

  const OptimizationReport again = maximize_tau(map, p0, kEps);
  ASSERT_EQ(again.trace.size(), r.trace.size());
  for (std::size_t k = 0; k < r.trace.size(); ++k) {
    EXPECT_EQ(again.trace[k].value, r.trace[k].value);
    EXPECT_EQ(again.trace[k].p, r.trace[k].p);
  }
}

GTEST_TEST(MaximizeTau, StartWithoutCrossingIsAnError) {
  const ParamMap map = family_map();
  OptimizerSettings s;
  s.t_cap = 1e-3;
  EXPECT_THROW(maximize_tau(map, RealVector::Zero(2), kEps, s), Error);
}

GTEST_TEST(MinimizeDeltaSup, WeakestDampingOnTheBound) {
  const ParamMap map = damping_map();
  OptimizerSettings s;
  s.lower = {-0.5};
  s.upper = {0.5};
  const OptimizationReport r = minimize_delta_sup(map, RealVector::Zero(1), 1.0, s);
  EXPECT_TRUE(r.converged) << r.message;
  EXPECT_NEAR(r.p_final(0), -0.5, 1e-12);
  EXPECT_FALSE(r.interior);
  EXPECT_EQ(r.active_bounds, std::vector<int>{-1});
  for (std::size_t k = 1; k < r.trace.size(); ++k)
    EXPECT_LE(r.trace[k].value, r.trace[k - 1].value + 1e-12);
  // Two-point check of the monotonicity the optimum relies on.
  EXPECT_LT(delta_sup(map.model_at(RealVector::Constant(1, -0.5)), 1.0).value,
            delta_sup(map.model_at(RealVector::Constant(1, -0.4)), 1.0).value);

  const OptimizationReport z = minimize_delta_sup(zero_direction_map(), RealVector::Zero(1), 1.0);
  EXPECT_TRUE(z.converged);
  EXPECT_EQ(z.iterations, 1);
}

GTEST_TEST(MinimizeDiscounted, DecreasesAndGradientMatches) {
  const ParamMap map = damping_map();
  OptimizerSettings s;
  s.lower = {-0.5};
  s.upper = {0.5};
  const double horizon = 1.0;
  const OptimizationReport r = minimize_discounted(map, RealVector::Zero(1), horizon, s);
  EXPECT_TRUE(r.converged) << r.message;
  EXPECT_LE(r.final_value(), r.trace.front().value);
  const double g = grad_discounted_p(map, r.p_final, horizon)(0);
  const double fd = oracle::central_difference(
      [&](double x) { return discounted_delta_ale(map.model_at(RealVector::Constant(1, x)), horizon).value; },
      r.p_final(0), 1e-4);
  EXPECT_LE(oracle::relative_error(g, fd), 1e-3);

  EXPECT_TRUE(minimize_discounted(zero_direction_map(), RealVector::Zero(1), horizon).converged);
}

GTEST_TEST(MinimizeDiscounted, InadmissibleStartThrows) {
  RealMatrix r(2, 2);
  r << 1, 0, 0, -1;  // J R has eigenvalues +-1: abscissa 1 - 0.09.
  EXPECT_THROW(minimize_discounted(damping_map(r), RealVector::Zero(1), 10.0), HorizonError);
}

}  // namespace
}  // namespace qmem
