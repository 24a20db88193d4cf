#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "srd/distributions.hpp"
#include "srd/truncation_oracle.hpp"

using namespace srd;

TEST(DistributionSpec, FactoriesValidate) {
  EXPECT_THROW(DistributionSpec::gaussian(0.0, 0.0), domain_error);
  EXPECT_THROW(DistributionSpec::uniform(-1.0, 1.0), domain_error);
  EXPECT_THROW(DistributionSpec::point_mass(2.0, 1.0, 0.5), domain_error);
  EXPECT_THROW(DistributionSpec::point_mass(0.5, 1.0, 1.0), domain_error);
  EXPECT_THROW(DistributionSpec::sliced_gaussian(0.0, 1.0), domain_error);
  EXPECT_NO_THROW(DistributionSpec::point_mass(1.0, 1.0, 0.5));
  EXPECT_EQ(DistributionSpec::sliced_gaussian(1.0, 1.0).kind(), DistributionKind::sliced_gaussian);
  EXPECT_FALSE(DistributionSpec::point_mass_limit(0.2, 1.0).has_density());
  EXPECT_TRUE(DistributionSpec::uniform(0.0, 1.0).has_density());
}

TEST(Moments, SlicedPowerUsesHalfNormalMean) {
  const double b = 0.7;
  const auto d = DistributionSpec::sliced_gaussian(b, 2.0);
  const double s = std::sqrt(2.0);
  EXPECT_NEAR(moments(d).second_moment, b * b + 2.0 * b * s * std::sqrt(2.0 / pi) + 2.0, 1e-14);
  const auto p = DistributionSpec::sliced_gaussian_with_power(b, 3.0);
  EXPECT_NEAR(moments(p).second_moment, 3.0, 1e-12);
}

TEST(Truncate, BetaOneIsIdentity) {
  for (const auto& d : {DistributionSpec::gaussian(0.3, 2.0), DistributionSpec::uniform(0.5, 1.0),
                        DistributionSpec::point_mass(0.2, 1.0, 0.1), DistributionSpec::sliced_gaussian(1.0, 1.0)}) {
    const auto t = truncate(d, 1.0);
    const auto m = moments(d);
    EXPECT_EQ(t.mean, m.mean);
    EXPECT_EQ(t.variance, m.variance);
  }
}

TEST(Truncate, RejectsBadBeta) {
  const auto d = DistributionSpec::gaussian(0.0, 1.0);
  EXPECT_THROW(truncate(d, 0.0), domain_error);
  EXPECT_THROW(truncate(d, 1.5), domain_error);
}

TEST(Truncate, GaussianHalfMass) {
  // |Z| <= 0.6744897501960817 holds with probability one half.
  const auto t = truncate(DistributionSpec::gaussian(0.0, 1.0), 0.5);
  EXPECT_NEAR(t.threshold, 0.674489750196081743, 1e-13);
  const double tt = t.threshold;
  const double r = 1.0 - 2.0 * tt * std::exp(-0.5 * tt * tt) / std::sqrt(2.0 * pi) / 0.5;
  EXPECT_NEAR(t.variance, r, 1e-13);
}

TEST(Truncate, SecondMomentNonDecreasingInBeta) {
  for (const auto& d : {DistributionSpec::gaussian(0.0, 1.0), DistributionSpec::gaussian(1.5, 1.0),
                        DistributionSpec::uniform(2.0, 1.0), DistributionSpec::point_mass(0.2, 1.0, 0.1),
                        DistributionSpec::sliced_gaussian(0.5, 1.0)}) {
    double prev = 0.0;
    for (double beta = 0.01; beta <= 1.0; beta += 0.01) {
      const double m2 = truncate(d, beta).second_moment();
      EXPECT_GE(m2, prev - 1e-12) << describe(d) << " beta=" << beta;
      prev = m2;
    }
  }
}

TEST(Truncate, UniformPiecewiseMean) {
  const auto d = DistributionSpec::uniform(2.0, 1.0);  // support 2 +- sqrt(3)
  const double half = std::sqrt(3.0);
  for (double beta : {0.05, 0.3, 0.8}) {
    const auto t = truncate(d, beta);
    EXPECT_NEAR(t.mean, std::max(0.0, 2.0 - (1.0 - beta) * half), 1e-14);
    EXPECT_NEAR(t.variance, beta * beta, 1e-14);
  }
}

TEST(Truncate, PointMassMatchesAtomBookkeeping) {
  const double b2 = 0.3, gamma = 1.0;
  for (double eps : {0.05, 0.3}) {
    const double c2 = (gamma - (1.0 - eps) * b2) / eps;
    const auto d = DistributionSpec::point_mass(b2, gamma, eps);
    for (double beta : {0.1, 1.0 - eps, 0.97, 0.999}) {
      const double outer = std::max(0.0, beta - (1.0 - eps));
      const double expect = ((beta - outer) * b2 + outer * c2) / beta;
      EXPECT_NEAR(truncate(d, beta).second_moment(), expect, 1e-13);
      EXPECT_FALSE(truncate(d, beta).diff_entropy.has_value());
    }
  }
  // eps -> 0 limit keeps only the inner atoms.
  EXPECT_EQ(truncate(DistributionSpec::point_mass_limit(0.2, 1.0), 0.999).variance, 0.2);
}

TEST(Truncate, ClosedFormsMatchQuadratureOracle) {
  for (const auto& d : {DistributionSpec::gaussian(0.0, 3.0), DistributionSpec::gaussian(0.8, 1.0),
                        DistributionSpec::uniform(0.0, 1.0), DistributionSpec::uniform(1.9, 0.5),
                        DistributionSpec::sliced_gaussian(0.4, 2.0)}) {
    for (double beta : {0.002, 0.2, 0.6, 0.95}) {
      const auto t = truncate(d, beta);
      const auto q = truncate_oracle(d, beta, OracleMethod::quadrature, 0).value;
      const double scale = std::max(1.0, t.second_moment());
      EXPECT_NEAR(t.mean, q.mean, 1e-8 * scale) << describe(d) << " beta=" << beta;
      EXPECT_NEAR(t.variance, q.variance, 1e-8 * scale) << describe(d) << " beta=" << beta;
      EXPECT_NEAR(*t.diff_entropy, *q.diff_entropy, 1e-8 * std::max(1.0, std::abs(*t.diff_entropy)))
          << describe(d) << " beta=" << beta;
      EXPECT_NEAR(t.threshold, q.threshold, 1e-8 * std::max(1.0, t.threshold));
    }
  }
}

TEST(Truncate, ClosedFormsMatchMonteCarloOracle) {
  const auto d = DistributionSpec::sliced_gaussian(1.0, 1.0);
  const auto t = truncate(d, 0.3);
  const auto mc = truncate_oracle(d, 0.3, OracleMethod::montecarlo, 200000, 11);
  EXPECT_NEAR(t.variance, mc.value.variance, 4.0 * mc.variance_error);
  EXPECT_NEAR(t.mean, mc.value.mean, 4.0 * mc.mean_error);
}

TEST(TruncationOracle, QuadratureNeedsDensity) {
  EXPECT_THROW(truncate_oracle(DistributionSpec::point_mass(0.2, 1.0, 0.1), 0.5, OracleMethod::quadrature, 0),
               domain_error);
}

TEST(Truncate, GaussianSmallBetaApproachesPiOverSix) {
  const auto t = truncate(DistributionSpec::gaussian(0.0, 1.0), 1e-4);
  EXPECT_NEAR(t.variance / 1e-8, pi / 6.0, 1e-6);
}

TEST(DecayRate, PerFamily) {
  EXPECT_EQ(decay_rate(DistributionSpec::gaussian(0.0, 1.0)).L, 1.0);
  EXPECT_EQ(decay_rate(DistributionSpec::uniform(std::sqrt(2.3), 1.0)).L, 1.0);
  EXPECT_EQ(decay_rate(DistributionSpec::uniform(2.0, 1.0)).L, 0.0);
  EXPECT_EQ(decay_rate(DistributionSpec::point_mass_limit(0.2, 1.0)).L, 0.0);
  EXPECT_EQ(decay_rate(DistributionSpec::sliced_gaussian(1.0, 1.0)).L, 0.0);
}

TEST(ScaleToPower, HitsTargetAndKeepsShape) {
  const double omega = 0.05;
  for (const auto& d : {DistributionSpec::gaussian(1.0, 2.0), DistributionSpec::uniform(1.0, 1.0),
                        DistributionSpec::point_mass(0.2, 1.0, 0.3), DistributionSpec::sliced_gaussian(0.5, 1.0)}) {
    const auto s = scale_to_power(d, omega, 7.0);
    EXPECT_NEAR(omega * moments(s).second_moment, 7.0, 1e-12) << describe(d);
    EXPECT_EQ(s.kind(), d.kind());
  }
}

TEST(DrawValue, NeverZeroAndMatchesSecondMoment) {
  std::mt19937_64 rng(5);
  const auto d = DistributionSpec::point_mass(0.25, 1.0, 0.2);
  double s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = draw_value(d, rng);
    ASSERT_NE(x, 0.0);
    s2 += x * x;
  }
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
  EXPECT_THROW(draw_value(DistributionSpec::point_mass_limit(0.2, 1.0), rng), domain_error);
}

TEST(Truncate, PowerNeverRisesAndEntropyPowerBelowVariance) {
  for (const auto& d : {DistributionSpec::gaussian(0.0, 2.0), DistributionSpec::gaussian(1.2, 0.5),
                        DistributionSpec::uniform(0.0, 1.0), DistributionSpec::uniform(2.5, 1.0),
                        DistributionSpec::sliced_gaussian(0.7, 1.0)}) {
    const double power = moments(d).second_moment;
    double prev_t = 0.0;
    for (double beta = 0.02; beta < 1.0; beta += 0.02) {
      const auto t = truncate(d, beta);
      EXPECT_LE(t.second_moment(), power * (1.0 + 1e-12));
      EXPECT_LE(std::exp(2.0 * *t.diff_entropy) / (2.0 * pi * e), t.variance * (1.0 + 1e-12))
          << describe(d) << " beta=" << beta;
      EXPECT_GT(t.threshold, prev_t) << describe(d) << " beta=" << beta;
      prev_t = t.threshold;
    }
  }
}

TEST(Truncate, PowerRatioStaysBracketed) {
  for (const auto& d : {DistributionSpec::gaussian(0.0, 1.0), DistributionSpec::uniform(0.0, 1.0),
                        DistributionSpec::uniform(3.0, 1.0), DistributionSpec::point_mass_limit(0.2, 1.0),
                        DistributionSpec::sliced_gaussian(1.0, 1.0)}) {
    const double l = decay_rate(d).L;
    const double m2 = moments(d).second_moment;
    double lo = INFINITY;
    double hi = 0.0;
    for (int i = 0; i < 50; ++i) {
      const double beta = std::pow(10.0, -3.0 + 3.0 * i / 49.0);
      const double r = truncate(d, beta).second_moment() / m2 / std::pow(beta, 2.0 * l);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    EXPECT_GT(lo, 0.0) << describe(d);
    EXPECT_TRUE(std::isfinite(hi)) << describe(d);
    EXPECT_LT(hi / lo, 100.0) << describe(d);
  }
}
