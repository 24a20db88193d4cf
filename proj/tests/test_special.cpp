#include <gtest/gtest.h>

#include <cmath>

#include "srd/special.hpp"

using namespace srd;

TEST(QFunction, ReferenceValues) {
  EXPECT_DOUBLE_EQ(q_function(0.0), 0.5);
  // mpmath, 30 digits
  EXPECT_NEAR(q_function(1.0), 0.158655253931457051, 1e-16);
  EXPECT_NEAR(q_function(-1.0), 1.0 - 0.158655253931457051, 1e-15);
}

TEST(QFunction, InverseRoundTrip) {
  for (double p : {1e-300, 1e-100, 1e-20, 1e-8, 1e-3, 0.1, 0.3, 0.5, 0.7, 0.9, 0.999, 1 - 1e-9}) {
    const double x = q_inverse(p);
    EXPECT_NEAR(q_function(x) / p, 1.0, 1e-12) << "p=" << p;
  }
}

TEST(QFunction, InverseRejectsOutsideUnitInterval) {
  EXPECT_THROW(q_inverse(0.0), domain_error);
  EXPECT_THROW(q_inverse(1.0), domain_error);
  EXPECT_THROW(q_inverse(-0.2), domain_error);
  EXPECT_THROW(q_inverse(std::nan("")), domain_error);
}

TEST(CentralQuantile, MassMatchesBeta) {
  for (double beta : {1e-12, 1e-6, 1e-3, 0.01, 0.1, 0.49, 0.5, 0.9, 0.999999}) {
    const double t = central_normal_quantile(beta);
    EXPECT_NEAR(std::erf(t / std::sqrt(2.0)) / beta, 1.0, 1e-12) << "beta=" << beta;
  }
}

TEST(CentralQuantile, SmallBetaKeepsRelativePrecision) {
  // t ~ beta sqrt(pi/2) as beta -> 0
  EXPECT_NEAR(central_normal_quantile(1e-10) / (1e-10 * std::sqrt(pi / 2.0)), 1.0, 1e-12);
}

TEST(TruncatedSecondMoment, LimitsAndContinuity) {
  EXPECT_EQ(normal_truncated_second_moment(0.0), 0.0);
  EXPECT_EQ(normal_truncated_second_moment(INFINITY), 1.0);
  // t^2/3 as t -> 0
  EXPECT_NEAR(normal_truncated_second_moment(1e-4) / (1e-8 / 3.0), 1.0, 1e-8);
  const double below = normal_truncated_second_moment(0.5 - 1e-12);
  const double above = normal_truncated_second_moment(0.5);
  EXPECT_NEAR(below, above, 1e-12);
  EXPECT_THROW(normal_truncated_second_moment(-1.0), domain_error);
}

TEST(TruncatedSecondMoment, IncreasingInThreshold) {
  double prev = 0.0;
  for (double t = 0.01; t < 5.0; t *= 1.3) {
    const double r = normal_truncated_second_moment(t);
    EXPECT_GT(r, prev);
    EXPECT_LT(r, 1.0);
    prev = r;
  }
}
