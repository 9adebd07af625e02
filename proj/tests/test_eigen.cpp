#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "pspectral/eigen.hpp"
#include "pspectral/oracle.hpp"

using namespace pspectral;

namespace {

// lambda_bar(n = 2, k = -1, d = pi, p = 2) from a 20-digit Taylor-series shooting
// of phi' = sqrt(lambda) + tanh(t) cos(phi) sin(phi), phi(0) = 0, phi(pi/2) = pi/2 (mpmath).
constexpr double kLambdaBarP2 = 0.66005861989747039;

}  // namespace

TEST(ShootPhase, FlatLimitIsLinear) {
  for (double p : {1.5, 2.0, 4.0}) {
    const Params pr(p, 3.0, -1e-14, 2.0);
    EXPECT_NEAR(shoot_phase(pr, 0.8), pr.alpha() * 0.8, 1e-11);
  }
  EXPECT_THROW(shoot_phase(Params(2, 2, -1, 1), 0.0), std::invalid_argument);
}

TEST(ShootPhase, ReachesQuarterPeriodAtAbar) {
  for (double p : {1.5, 2.0, 3.0}) {
    const Params pr(p, 3.0, -1.0, 5.0);
    const double abar = find_abar(pr).a_bar;
    EXPECT_NEAR(shoot_phase(pr, abar), 0.5 * pi_p(pr.exponent()), 1e-10);
  }
}

TEST(ShootPhase, IncreasingInLambda) {
  for (double p : {1.5, 2.0, 3.0}) {
    double prev = -kInfinity;
    for (int j = 0; j < 20; ++j) {
      const double lambda = 0.05 * std::pow(1.4, j);
      const double phi = shoot_phase(Params(p, 3.0, -1.0, lambda), 1.2);
      EXPECT_GT(phi, prev) << "p = " << p << " lambda = " << lambda;
      prev = phi;
    }
  }
}

TEST(LambdaBar, FrozenReferenceAtP2) {
  const EigenEstimate e = lambda_bar(2.0, -1.0, std::numbers::pi, 2.0);
  EXPECT_NEAR(e.value, kLambdaBarP2, 1e-10 * kLambdaBarP2);
  EXPECT_LE(e.residual, 1e-9);
  EXPECT_LE(e.bracket_lo, e.value);
  EXPECT_GE(e.bracket_hi, e.value);
  EXPECT_GT(e.iterations, 0u);
}

TEST(LambdaBar, BracketStraddlesRoot) {
  for (double p : {1.5, 2.0, 3.0}) {
    for (double d : {0.5, 2.0, 6.0}) {
      const EigenEstimate e = lambda_bar(3.0, -1.0, d, p);
      const double half = 0.5 * pi_p(PExponent(p));
      EXPECT_LE(shoot_phase(Params(p, 3.0, -1.0, e.bracket_lo), d / 2) - half, 1e-12);
      EXPECT_GE(shoot_phase(Params(p, 3.0, -1.0, e.bracket_hi), d / 2) - half, -1e-12);
      EXPECT_LE(e.residual, 1e-9);
      EXPECT_LE((e.bracket_hi - e.bracket_lo) / e.value, 1e-10 * 1.0001);
      EXPECT_LE(e.value, flat_lambda(p, d));
    }
  }
}

TEST(LambdaBar, FlatLimit) {
  for (double p : {1.5, 2.0, 3.0, 6.0}) {
    for (double n : {2.0, 5.0}) {
      for (double d : {1.0, std::numbers::pi}) {
        const double lb = lambda_bar(n, -1e-8, d, p).value;
        EXPECT_LE(std::fabs(lb - flat_lambda(p, d)) / lb, 1e-3);
      }
    }
  }
  EXPECT_EQ(lambda_bar(1.0, -1.0, 2.0, 3.0).value, flat_lambda(3.0, 2.0));
}

TEST(LambdaBar, MatchesFiniteVolumeOracle) {
  for (double n : {2.0, 3.0}) {
    for (double d : {1.0, std::numbers::pi}) {
      const double lb = lambda_bar(n, -1.0, d, 2.0).value;
      EXPECT_LE(std::fabs(lb - fd_eigenvalue_p2(n, -1.0, d, 4000)) / lb, 1e-4);
    }
  }
}

TEST(LambdaBar, MonotoneInDiameterAndCurvature) {
  for (double p : {1.5, 3.0}) {
    double prev = kInfinity;
    for (int j = 0; j < 20; ++j) {
      const double v = lambda_bar(3.0, -1.0, 0.5 + 0.3 * j, p).value;
      EXPECT_LE(v, prev * (1.0 + 1e-10));
      prev = v;
    }
    prev = 0.0;
    for (int j = 0; j < 20; ++j) {
      const double v = lambda_bar(3.0, -4.0 + 0.2 * j, 2.0, p).value;
      EXPECT_GE(v, prev * (1.0 - 1e-10));
      prev = v;
    }
  }
}

TEST(LambdaBar, DecreasesWithDimension) {
  // Observed direction of the n-dependence at fixed k < 0, confirmed by the
  // finite-volume eigenvalue at p = 2 (see README).
  double prev = kInfinity;
  for (double n : {1.0, 1.5, 2.0, 3.0, 5.0, 8.0}) {
    const double v = lambda_bar(n, -1.0, 2.0, 2.0).value;
    EXPECT_LT(v, prev);
    EXPECT_NEAR(v, fd_eigenvalue_p2(n, -1.0, 2.0, 4000), 1e-4 * v);
    prev = v;
  }
  prev = kInfinity;
  for (double n : {1.0, 2.0, 4.0}) {
    const double v = lambda_bar(n, -1.0, 2.0, 2.5).value;
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(LambdaBar, AgreesWithFullIntervalModel) {
  for (double p : {1.5, 2.0, 3.0}) {
    for (double d : {1.0, 3.0}) {
      const double lb = lambda_bar(3.0, -1.0, d, p).value;
      const Params pr(p, 3.0, -1.0, lb);
      const double abar = find_abar(pr).a_bar;
      const ModelSolution s = solve_model(Family::cosh, -abar, pr);
      EXPECT_NEAR(s.delta(), d, 1e-8);
      EXPECT_NEAR(2.0 * abar, d, 1e-8);
    }
  }
}

TEST(LambdaBar, InvalidInputAndBracketFailure) {
  EXPECT_THROW(lambda_bar(2.0, 1.0, 1.0, 2.0), std::invalid_argument);
  EXPECT_THROW(lambda_bar(2.0, -1.0, 0.0, 2.0), std::invalid_argument);
  EXPECT_THROW(lambda_bar(2.0, -1.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(lambda_bar(3.0, -1.0, 200.0, 2.0), NumericalError);
}

TEST(DeltaBar, BelowJensenBoundAndRoundTrip) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> P(1.3, 5.0), N(1.0, 6.0), K(-3.0, -0.05), L(-2.0, 3.0);
  for (int i = 0; i < 8; ++i) {
    const double p = P(rng), n = N(rng), k = K(rng), lambda = std::exp(L(rng));
    const EigenEstimate db = delta_bar(n, k, lambda, p);
    const Params pr(p, n, k, lambda);
    EXPECT_LT(db.value, pi_p(pr.exponent()) / pr.alpha());
    EXPECT_LE(db.residual, 1e-9);
    EXPECT_NEAR(lambda_bar(n, k, db.value, p).value, lambda, 1e-6 * lambda);
  }
}

TEST(DeltaBar, OtherFamiliesExceedJensenBound) {
  const Params pr(2.5, 3.0, -1.0, 9.0);
  ASSERT_GT(pr.alpha(), alpha_critical(2.5, 3.0, -1.0).alpha_bar);
  const double jensen = pi_p(pr.exponent()) / pr.alpha();
  const double db = delta_bar(3.0, -1.0, 9.0, 2.5).value;
  EXPECT_LT(db, jensen);
  for (double a : {0.0, 0.3, 1.0, 4.0}) {
    EXPECT_GT(solve_model(Family::sinh, a, pr).delta(), jensen);
    EXPECT_GT(solve_model(Family::exp, a, pr).delta(), jensen);
  }
}

TEST(DiameterMinimality, ReportMargins) {
  const Params pr(2.0, 3.0, -1.0, 6.0);
  const double abar = find_abar(pr).a_bar;
  std::vector<double> grid{-abar - 0.5, -abar - 0.1, -abar - 0.01, -abar, -abar + 0.01, -abar + 0.1, -abar + 0.5};
  const DiameterReport rep = verify_diameter_minimality(pr, grid);
  EXPECT_TRUE(rep.passed);
  EXPECT_NEAR(rep.delta_bar, 2.0 * abar, 1e-15);
  ASSERT_EQ(rep.rows.size(), grid.size());
  EXPECT_TRUE(rep.rows[3].at_abar);
  EXPECT_NEAR(rep.rows[3].delta, 2.0 * abar, 1e-8);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (j != 3) {
      EXPECT_GT(rep.rows[j].margin, 0.0);
    }
  }
  EXPECT_GT(rep.rows[0].margin, rep.rows[1].margin);
  EXPECT_GT(rep.rows[1].margin, rep.rows[2].margin);
  EXPECT_GT(rep.rows[6].margin, rep.rows[5].margin);
  EXPECT_GT(rep.rows[5].margin, rep.rows[4].margin);
}
