#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "pspectral/oracle.hpp"

using namespace pspectral;

TEST(SecondOrder, AgreesWithPruefer) {
  const Params pr(2.0, 3.0, -1.0, 3.0);
  for (double a : {-1.0, 0.0, 0.5}) {
    const ModelSolution s = solve_model(Family::cosh, a, pr);
    const SecondOrderSolution o = shoot_second_order(Family::cosh, a, pr);
    ASSERT_TRUE(s.finite());
    ASSERT_TRUE(o.finite);
    EXPECT_NEAR(o.delta, s.delta(), 1e-7);
    EXPECT_NEAR(o.m, s.m(), 1e-7);
  }
}

TEST(SecondOrder, AgreesWithPrueferOnAllFamilies) {
  for (double p : {1.5, 2.0, 3.0}) {
    const Params pr(p, 3.0, -1.0, 10.0);
    for (Family f : {Family::sinh, Family::exp, Family::cosh}) {
      for (double a : {0.0, 0.8}) {
        const ModelSolution s = solve_model(f, a, pr);
        const SecondOrderSolution o = shoot_second_order(f, a, pr);
        ASSERT_EQ(s.finite(), o.finite);
        EXPECT_NEAR(o.delta / s.delta(), 1.0, 1e-7) << family_index(f) << " p = " << p << " a = " << a;
        EXPECT_NEAR(o.m / s.m(), 1.0, 1e-7) << family_index(f) << " p = " << p << " a = " << a;
      }
    }
  }
}

TEST(SecondOrder, HarmonicOscillatorInFlatLimit) {
  const Params pr(2.0, 3.0, -1e-14, 4.0);
  const SecondOrderSolution o = shoot_second_order(Family::cosh, 0.3, pr);
  ASSERT_TRUE(o.finite);
  EXPECT_NEAR(o.delta, std::numbers::pi / 2.0, 1e-8);
  EXPECT_NEAR(o.m, 1.0, 1e-8);
}

TEST(SecondOrder, OddModelHasUnitMaximum) {
  for (double p : {1.5, 2.0, 3.0}) {
    const Params pr(p, 4.0, -1.0, 5.0);
    const SecondOrderSolution o = shoot_second_order(Family::cosh, -find_abar(pr).a_bar, pr);
    ASSERT_TRUE(o.finite);
    EXPECT_NEAR(o.m, 1.0, 1e-7);
  }
}

TEST(SecondOrder, OverdampedModelIsInfinite) {
  const Params pr(2.0, 4.0, -1.0, 0.5);
  EXPECT_FALSE(shoot_second_order(Family::exp, 0.0, pr).finite);
  EXPECT_FALSE(solve_model(Family::exp, 0.0, pr).finite());
}

TEST(FiniteVolume, FlatLimitConvergesQuadratically) {
  const double d = 2.0;
  const double exact = std::pow(std::numbers::pi / d, 2);
  const double e1 = std::fabs(fd_eigenvalue_p2(3.0, -1e-12, d, 200) - exact);
  const double e2 = std::fabs(fd_eigenvalue_p2(3.0, -1e-12, d, 400) - exact);
  EXPECT_LT(e1 / exact, 1e-4);
  EXPECT_NEAR(e1 / e2, 4.0, 0.1);
}

TEST(FiniteVolume, MeshRefinementIsSecondOrder) {
  const double l2 = fd_eigenvalue_p2(2.0, -1.0, std::numbers::pi, 2000);
  const double l4 = fd_eigenvalue_p2(2.0, -1.0, std::numbers::pi, 4000);
  const double l8 = fd_eigenvalue_p2(2.0, -1.0, std::numbers::pi, 8000);
  EXPECT_NEAR((l2 - l4) / (l4 - l8), 4.0, 0.2);
  const double extrapolated = l8 + (l8 - l4) / 3.0;
  const double lb = lambda_bar(2.0, -1.0, std::numbers::pi, 2.0).value;
  EXPECT_LT(std::fabs(extrapolated - lb) / lb, 1e-8);
  EXPECT_LT(std::fabs(l4 - lb) / lb, 1e-4);
}

TEST(FiniteVolume, InvalidInput) {
  EXPECT_THROW(fd_eigenvalue_p2(2.0, -1.0, 1.0, 99), std::invalid_argument);
  EXPECT_THROW(fd_eigenvalue_p2(2.0, 1.0, 1.0, 1000), std::invalid_argument);
}

TEST(GradientComparison, ReflexiveCase) {
  const Params pr(2.5, 3.0, -1.0, 6.0);
  const ModelSolution s = solve_model(Family::sinh, 0.4, pr);
  const GradientReport rep = check_gradient_comparison(s, s, 100);
  EXPECT_TRUE(rep.applicable);
  EXPECT_TRUE(rep.passed);
  EXPECT_LE(std::fabs(rep.max_excess), 1e-10);
}

TEST(GradientComparison, ShiftedModelAgainstOddModel) {
  for (double p : {1.5, 2.0, 3.0}) {
    const Params pr(p, 3.0, -1.0, 8.0);
    const double abar = find_abar(pr).a_bar;
    const ModelSolution top = solve_model(Family::cosh, -abar, pr);
    for (double a : {-abar + 0.2, 0.0, 1.0}) {
      const ModelSolution s = solve_model(Family::cosh, a, pr);
      ASSERT_LT(s.m(), 1.0);
      const GradientReport rep = check_gradient_comparison(s, top, 200);
      EXPECT_TRUE(rep.applicable);
      EXPECT_TRUE(rep.passed) << "p = " << p << " a = " << a << " excess " << rep.max_excess;
    }
  }
}

TEST(GradientComparison, ContainmentViolatedIsNotApplicable) {
  const Params pr(2.0, 3.0, -1.0, 8.0);
  const ModelSolution top = solve_model(Family::cosh, -find_abar(pr).a_bar, pr);
  const ModelSolution low = solve_model(Family::cosh, 0.5, pr);
  const GradientReport rep = check_gradient_comparison(top, low, 50);
  EXPECT_FALSE(rep.applicable);
  EXPECT_FALSE(rep.passed);
}

TEST(MaximaFit, UnitMaximumIsOddModel) {
  const Params pr(2.0, 3.0, -1.0, 6.0);
  const auto fit = check_maxima_fit(pr, 1.0);
  ASSERT_TRUE(fit);
  EXPECT_EQ(fit->family, Family::cosh);
  EXPECT_NEAR(fit->a, -find_abar(pr).a_bar, 1e-12);
}

TEST(MaximaFit, AroundLimitingMaximum) {
  const Params pr(2.0, 3.0, -1.0, 6.0);
  const double m2 = limiting_maximum(pr);
  const auto above = check_maxima_fit(pr, m2 + 1e-3);
  const auto below = check_maxima_fit(pr, m2 - 1e-3);
  ASSERT_TRUE(above);
  ASSERT_TRUE(below);
  EXPECT_EQ(above->family, Family::cosh);
  EXPECT_EQ(below->family, Family::sinh);
  EXPECT_NEAR(solve_model(above->family, above->a, pr).m(), m2 + 1e-3, 1e-9);
  EXPECT_NEAR(solve_model(below->family, below->a, pr).m(), m2 - 1e-3, 1e-9);
  const auto exact = check_maxima_fit(pr, m2);
  ASSERT_TRUE(exact);
  EXPECT_EQ(exact->family, Family::exp);
}

TEST(MaximaFit, BelowSmallestMaximumIsNotFound) {
  const Params pr(2.0, 3.0, -1.0, 6.0);
  const double m0 = solve_model(Family::sinh, 0.0, pr).m();
  EXPECT_FALSE(check_maxima_fit(pr, 0.5 * m0));
  const auto at = check_maxima_fit(pr, m0 * (1.0 + 1e-6));
  ASSERT_TRUE(at);
  EXPECT_EQ(at->family, Family::sinh);
  EXPECT_THROW(check_maxima_fit(pr, 0.0), std::invalid_argument);
  EXPECT_THROW(check_maxima_fit(pr, 1.5), std::invalid_argument);
}

TEST(MaximaFit, OverdampedUsesFamilyThree) {
  for (double p : {1.5, 2.0, 3.0}) {
    const double alpha_bar = alpha_critical(p, 3.0, -1.0).alpha_bar;
    const Params pr(p, 3.0, -1.0, lambda_from_alpha(p, 0.6 * alpha_bar));
    const auto fit = check_maxima_fit(pr, 0.5);
    ASSERT_TRUE(fit);
    EXPECT_EQ(fit->family, Family::cosh);
    EXPECT_NEAR(solve_model(Family::cosh, fit->a, pr).m(), 0.5, 1e-9);
  }
}

TEST(MaximaLimits, ApproachLimitMonotonically) {
  for (const Params& pr : {Params(2.0, 3.0, -1.0, 6.0), Params(3.0, 2.0, -0.5, 5.0)}) {
    const double c = pr.sqrt_neg_k();
    const double m2 = limiting_maximum(pr);
    double gap3 = kInfinity, gap1 = kInfinity;
    for (double s : {1.0, 2.0, 4.0, 8.0, 16.0}) {
      const double g3 = std::fabs(solve_model(Family::cosh, s / c, pr).m() - m2);
      const double g1 = std::fabs(solve_model(Family::sinh, s / c, pr).m() - m2);
      EXPECT_LT(g3, gap3);
      EXPECT_LT(g1, gap1);
      gap3 = g3;
      gap1 = g1;
    }
    EXPECT_LT(gap3, 1e-3);
    EXPECT_LT(gap1, 1e-3);
  }
}
