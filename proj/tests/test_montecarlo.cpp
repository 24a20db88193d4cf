#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "srd/montecarlo.hpp"

using namespace srd;

TEST(MpLogdet, CloseToLimitAtModerateSize) {
  for (double r : {0.5, 2.0}) {
    const auto est = mp_logdet({120, r, 10.0, 20, 3});
    EXPECT_LT(est.relative_gap, 0.03) << r;
    EXPECT_EQ(est.trials, 20);
    EXPECT_EQ(est.rejected, 0);
    EXPECT_NEAR(est.target, info_G(r, 10.0), 1e-15);
  }
}

TEST(MpLogdet, ZeroGammaIsZero) {
  const auto est = mp_logdet({50, 1.0, 0.0, 4, 1});
  EXPECT_EQ(est.mean, 0.0);
  EXPECT_EQ(est.std_error, 0.0);
}

TEST(MpLogdet, DeterministicForSeed) {
  const auto a = mp_logdet({40, 1.0, 1.0, 6, 42});
  const auto b = mp_logdet({40, 1.0, 1.0, 6, 42});
  const auto c = mp_logdet({40, 1.0, 1.0, 6, 43});
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_NE(a.mean, c.mean);
}

TEST(DetPower, Targets) {
  EXPECT_NEAR(det_power_target(1.0), std::exp(-1.0), 1e-16);
  EXPECT_NEAR(det_power_target(2.0), 2.0 / std::exp(1.0), 1e-15);
  EXPECT_THROW(det_power_target(0.5), domain_error);
}

TEST(DetPower, LogDomainMatchesDirectDeterminant) {
  const auto a = det_power({30, 2.0, 0.0, 5, 9});
  const auto b = det_power_direct({30, 2.0, 0.0, 5, 9});
  EXPECT_NEAR(a.mean, b.mean, 1e-12);
}

TEST(DetPower, ApproachesLimit) {
  const auto est = det_power({150, 2.0, 0.0, 10, 5});
  EXPECT_LT(est.relative_gap, 0.03);
  EXPECT_THROW(det_power({150, 0.5, 0.0, 10, 5}), domain_error);
}

TEST(RankDeficiency, GaussianNeverSingularRademacherDecays) {
  EXPECT_EQ(rank_deficiency(16, 0.5, EntryLaw::gaussian, 50, 1), 0.0);
  const double small = rank_deficiency(8, 0.5, EntryLaw::rademacher, 400, 2);
  const double large = rank_deficiency(24, 0.5, EntryLaw::rademacher, 400, 2);
  EXPECT_GT(small, 0.3);
  EXPECT_LT(large, small);
}

TEST(Counting, NTildeMatchesBruteForce) {
  // n=6, k=2, alpha=0.5: one swap allowed, 1 + 2*4 = 9
  EXPECT_EQ(n_tilde(6, 2, 0.5), 9);
  EXPECT_EQ(n_tilde(10, 3, 0.0), 1);
  std::vector<std::uint32_t> all;
  detail::lex_supports(9, 3, 0, 0, all);
  for (double alpha : {0.0, 0.34, 0.67, 1.0}) {
    std::size_t ball = 0;
    for (auto s : all) ball += support_distortion(all.front(), s) <= alpha + 1e-12;
    EXPECT_EQ(n_tilde(9, 3, alpha), ball) << alpha;
  }
  EXPECT_EQ(n_tilde(9, 3, 1.0), binomial(9, 3));
  EXPECT_EQ(n_tilde(8, 2, 0.5), 13);
  EXPECT_THROW(n_tilde(80, 4, 0.5), domain_error);
}

TEST(Counting, LogCountSwitchesToFloatingPoint) {
  const auto small = log_n_tilde(40, 10, 0.3);
  EXPECT_TRUE(small.exact);
  const auto big = log_n_tilde(200, 40, 0.3);
  EXPECT_FALSE(big.exact);
  EXPECT_TRUE(std::isfinite(big.value));
  EXPECT_NEAR(log_n_tilde(64, 16, 0.5).value, std::log(n_tilde(64, 16, 0.5).convert_to<double>()), 1e-12);
}

TEST(Covering, SmallBracket) {
  const auto b = covering_bracket(10, 2, 0.5);
  EXPECT_EQ(b.lower, 3);
  EXPECT_GE(b.upper, 3u);
  EXPECT_EQ(b.upper, b.cover.size());
}

TEST(Covering, CoverReallyCovers) {
  const int n = 12;
  const int k = 3;
  const double alpha = 0.34;
  const auto b = covering_bracket(n, k, alpha);
  std::vector<std::uint32_t> all;
  detail::lex_supports(n, k, 0, 0, all);
  for (auto s : all) {
    bool hit = false;
    for (auto c : b.cover) hit = hit || support_distortion(c, s) <= alpha + 1e-12;
    ASSERT_TRUE(hit);
  }
  EXPECT_GE(b.upper, b.lower);
}

TEST(Covering, DeterministicAndBudgeted) {
  EXPECT_EQ(covering_bracket(12, 4, 0.5).cover, covering_bracket(12, 4, 0.5).cover);
  EXPECT_THROW(covering_bracket(24, 12, 0.5), budget_error);
}

TEST(SupportDistortion, Values) {
  EXPECT_EQ(support_distortion(0b0111u, 0b0111u), 0.0);
  EXPECT_NEAR(support_distortion(0b0111u, 0b1011u), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(support_distortion(0b0011u, 0b1100u), 1.0);
}

TEST(PowerRatio, GaussianPiOverSix) {
  const auto r = power_ratio_scan(DistributionSpec::gaussian(0.0, 1.0), {1e-3});
  EXPECT_NEAR(r[0].second / (pi / 6.0), 1.0, 1e-3);
}

TEST(PowerRatio, FloorLawsTendToFloorPower) {
  const auto r = power_ratio_scan(DistributionSpec::uniform(3.0, 1.0), {1e-4});
  const double half = std::sqrt(3.0);
  EXPECT_NEAR(r[0].second, (3.0 - half) * (3.0 - half) / 10.0, 1e-3);
}
