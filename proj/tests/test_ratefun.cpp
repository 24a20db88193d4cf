#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "srd/ratefun.hpp"

using namespace srd;

namespace {

// Reference values from a 30-digit mpmath evaluation of the defining formulas.
struct InfoCase {
  double r;
  double gamma;
  double g;
};

const std::vector<InfoCase> kInfoG = {
    {0.5, 1.0, 0.158383797120075862},  {0.5, 10.0, 0.541577909283245098},
    {0.5, 100.0, 1.07948313506259920}, {0.5, 1e6, 3.37716493463005486},
    {1.0, 1.0, 0.290228819434550872},  {1.0, 10.0, 0.943833030734767995},
    {1.0, 100.0, 1.90012674404964631}, {2.0, 1.0, 0.494367164976291692},
    {2.0, 10.0, 1.39023104683129712},  {2.0, 100.0, 2.50068324692239638},
};

const std::vector<double> kRates = {0.01, 0.05, 0.1, 0.25, 0.5, 0.9, 1.0, 1.1, 2.0, 4.0};
const std::vector<double> kGammas = {0.0, 1e-6, 0.01, 0.1, 1.0, 10.0, 100.0, 1e4, 1e6};

}  // namespace

TEST(BinaryEntropy, Values) {
  EXPECT_DOUBLE_EQ(binary_entropy(0.5), std::log(2.0));
  EXPECT_EQ(binary_entropy(0.0), 0.0);
  EXPECT_EQ(binary_entropy(1.0), 0.0);
  EXPECT_NEAR(binary_entropy(0.1), 0.325082973391448240, 1e-15);
  EXPECT_THROW(binary_entropy(1.1), domain_error);
  EXPECT_THROW(binary_entropy(-0.1), domain_error);
}

TEST(RateR, Values) {
  EXPECT_NEAR(rate_R(0.1, 0.1), 0.237632341816669312, 1e-15);
  EXPECT_NEAR(rate_R(0.1, 0.0), binary_entropy(0.1), 1e-15);
  EXPECT_EQ(rate_R(0.1, 0.9), 0.0);
  EXPECT_EQ(rate_R(0.1, 0.95), 0.0);
  EXPECT_THROW(rate_R(0.6, 0.1), domain_error);
}

TEST(RateR, NonIncreasingAndContinuousAtEnd) {
  for (double omega : {1e-4, 0.01, 0.1, 0.25, 0.5}) {
    double prev = rate_R(omega, 0.0);
    for (int i = 1; i <= 1000; ++i) {
      const double a = i / 1000.0;
      const double r = rate_R(omega, a);
      EXPECT_LE(r, prev + 1e-15);
      EXPECT_GE(r, 0.0);
      prev = r;
    }
    EXPECT_NEAR(rate_R(omega, 1.0 - omega - 1e-9), 0.0, 1e-6);
  }
}

TEST(Delta, Values) {
  EXPECT_EQ(delta(1.0), 1.0);
  EXPECT_NEAR(delta(0.5), 2.0, 1e-15);
  EXPECT_NEAR(delta(0.9), 1.29154966501488388, 1e-14);
  EXPECT_NEAR(delta(1e-9), std::exp(1.0), 1e-8);
  EXPECT_NEAR(delta(1.0 - 1e-12), 1.0, 1e-9);
  EXPECT_THROW(delta(0.0), domain_error);
  EXPECT_THROW(delta(1.01), domain_error);
}

TEST(Xi, Values) {
  EXPECT_EQ(xi(2.0, 0.0), 0.0);
  EXPECT_NEAR(xi(1.0, 1.0), (3.0 - std::sqrt(5.0)) / 2.0, 1e-15);
  EXPECT_NEAR(xi(4.0, 1.0), 3.0 - std::sqrt(5.0), 1e-15);
}

TEST(InfoG, ReferenceValues) {
  for (const auto& c : kInfoG) EXPECT_NEAR(info_G(c.r, c.gamma) / c.g, 1.0, 1e-13) << c.r << " " << c.gamma;
  EXPECT_EQ(info_G(0.5, 0.0), 0.0);
}

TEST(InfoV, ReferenceValues) {
  EXPECT_NEAR(info_V(0.5, 10.0), 0.530792491811482416, 1e-14);
  EXPECT_NEAR(info_V(0.5, 1e6), 3.37716477441605250, 1e-13);
  EXPECT_NEAR(info_V(1.0, 1.0), 0.156630843759111417, 1e-15);
  EXPECT_NEAR(info_V(2.0, 1.0), 0.452416220777224013, 1e-15);
  EXPECT_NEAR(info_V(1.0, 10.0), 0.771520236204667262, 1e-14);
  EXPECT_NEAR(info_V(1.0, 3.0), 0.5 * std::log1p(3.0 / std::exp(1.0)), 1e-15);
  EXPECT_EQ(info_V(0.7, 0.0), 0.0);
}

TEST(InfoV, RatioToInfoG) {
  EXPECT_LT(info_V(0.5, 10.0) / info_G(0.5, 10.0), 1.0);
  EXPECT_GT(info_V(0.5, 1e6) / info_G(0.5, 1e6), 0.99);
  EXPECT_GT(info_V(0.5, 1e8) / info_G(0.5, 1e8), 0.999);
}

TEST(InfoFunctions, OrderingAndMonotonicityOnGrid) {
  int jensen_failures = 0;
  for (double r : kRates) {
    double prev_g = 0.0;
    double prev_v = 0.0;
    for (double g : kGammas) {
      const double G = info_G(r, g);
      const double V = info_V(r, g);
      ASSERT_TRUE(std::isfinite(G) && std::isfinite(V));
      EXPECT_GE(V, 0.0);
      EXPECT_GE(G, prev_g - 1e-15) << r << " " << g;
      EXPECT_GE(V, prev_v - 1e-15) << r << " " << g;
      EXPECT_LE(V, G * (1.0 + 1e-12) + 1e-300) << r << " " << g;
      EXPECT_LE(G, r * std::log1p(g) * (1.0 + 1e-12) + 1e-300) << r << " " << g;
      jensen_failures += G > 0.5 * r * std::log1p(g) * (1.0 + 1e-12) + 1e-300;
      EXPECT_GE(V, std::min(r, 1.0) * 0.5 * std::log1p(g / std::exp(1.0)) * (1.0 - 1e-12));
      prev_g = G;
      prev_v = V;
    }
  }
  // The sharper form G <= (r/2) log(1+gamma) also holds on the whole grid.
  EXPECT_EQ(jensen_failures, 0);
}

TEST(InfoG, IncreasingInRate) {
  for (double g : {0.1, 1.0, 100.0}) {
    double prev = 0.0;
    for (double r = 0.01; r < 20.0; r *= 1.2) {
      const double v = info_G(r, g);
      EXPECT_GT(v, prev);
      prev = v;
    }
  }
}

TEST(SourceFunctionals, ZeroMeanGaussianHasThetaOne) {
  const auto s = source_functionals(0.1, DistributionSpec::gaussian(0.0, 4.0));
  EXPECT_NEAR(s.theta, 1.0, 1e-14);
  EXPECT_NEAR(s.power, 0.4, 1e-15);
  EXPECT_NEAR(s.variance, 0.4, 1e-15);
}

TEST(SourceFunctionals, ZeroMeanUniformTheta) {
  const auto s = source_functionals(0.2, DistributionSpec::uniform(0.0, 3.0));
  EXPECT_NEAR(s.theta, 0.70259797829182993, 1e-14);
}

TEST(SourceFunctionals, PointMassHasNoEntropyPower) {
  const auto s = source_functionals(0.1, DistributionSpec::point_mass_limit(0.2, 5.0));
  EXPECT_EQ(s.entropy_power, 0.0);
  EXPECT_EQ(s.theta, 0.0);
}

TEST(SourceFunctionals, VarianceChainAndThetaRange) {
  for (double omega : {1e-4, 0.1, 0.5})
    for (const auto& d : {DistributionSpec::gaussian(0.0, 1.0), DistributionSpec::gaussian(2.0, 1.0),
                          DistributionSpec::uniform(0.0, 1.0), DistributionSpec::uniform(3.0, 1.0),
                          DistributionSpec::point_mass(0.2, 1.0, 0.1), DistributionSpec::sliced_gaussian(1.0, 1.0)}) {
      const auto s = source_functionals(omega, d);
      EXPECT_LE((1.0 - omega) * s.power, s.variance * (1.0 + 1e-14));
      EXPECT_LE(s.variance, s.power * (1.0 + 1e-14));
      EXPECT_GE(s.theta, 0.0);
      EXPECT_LE(s.theta, 1.0 + 1e-14);
      EXPECT_LE(s.entropy_power, s.variance * (1.0 + 1e-14));
      if (d.kind() != DistributionKind::gaussian || d.get_if<Gaussian>()->mean != 0.0) {
        EXPECT_LT(s.theta, 1.0);
      }
    }
}

TEST(RateRHamming, DocumentedAlternative) {
  EXPECT_NEAR(rate_R_hamming(0.1, 0.05), binary_entropy(0.1) - binary_entropy(0.05), 1e-15);
}
