#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "pseudopop/errors.hpp"
#include "pseudopop/estimators.hpp"
#include "support.hpp"

namespace pseudopop {
namespace {

// N = 6 hand fixture: three subjects per group.
const std::vector<double> kY{1.0, 4.0, 2.0, 10.0, 6.0, 8.0};
const std::vector<std::size_t> kGroup{0, 0, 0, 1, 1, 1};
const std::vector<double> kWt{0.5, 1.5, 1.0, 2.0, 0.25, 0.75};

TEST(Estimators, HandFixtureByHand) {
  // Group 1: sum w = 3, sum w y = 0.5 + 6 + 2 = 8.5.
  EXPECT_NEAR(weighted_group_mean(kY, kGroup, kWt, 0), 8.5 / 3.0, 1e-12);
  // sum w y^2 = 0.5 + 24 + 4 = 28.5.
  const double m = 8.5 / 3.0;
  EXPECT_NEAR(weighted_group_sd(kY, kGroup, kWt, 0), std::sqrt(28.5 / 3.0 - m * m), 1e-12);
  // Sorted group-1 values 1, 2, 4 with weights 0.5, 1, 1.5 -> CDF 1/6, 1/2, 1.
  const std::vector<double> grid{0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
  const auto cdf = weighted_group_cdf(kY, kGroup, kWt, 0, grid);
  const std::vector<double> expected{0.0, 1.0 / 6.0, 0.5, 0.5, 1.0, 1.0};
  for (std::size_t k = 0; k < grid.size(); ++k) EXPECT_NEAR(cdf[k], expected[k], 1e-12);
  EXPECT_DOUBLE_EQ(weighted_group_median(kY, kGroup, kWt, 0), 2.0);
}

TEST(Estimators, HandFixtureAgainstOracle) {
  for (std::size_t z = 0; z < 2; ++z) {
    const auto ref = oracle::weighted_stats(kY, kGroup, kWt, z);
    EXPECT_NEAR(weighted_group_mean(kY, kGroup, kWt, z), ref.mean, 1e-12);
    EXPECT_NEAR(weighted_group_sd(kY, kGroup, kWt, z), ref.sd, 1e-12);
    EXPECT_NEAR(weighted_group_median(kY, kGroup, kWt, z), oracle::weighted_median(kY, kGroup, kWt, z), 1e-12);
    for (double t : {0.5, 2.0, 6.0, 7.9, 8.0, 11.0}) {
      EXPECT_NEAR(weighted_group_cdf(kY, kGroup, kWt, z, std::vector<double>{t})[0],
                  oracle::weighted_cdf(kY, kGroup, kWt, z, t), 1e-12);
    }
  }
}

TEST(Estimators, UniformWeightsMatchUnweightedStatistics) {
  const std::vector<double> ones(6, 1.0);
  // Group 2: 10, 6, 8 -> mean 8, divide-by-n variance 8/3.
  EXPECT_NEAR(weighted_group_mean(kY, kGroup, ones, 1), 8.0, 1e-12);
  EXPECT_NEAR(weighted_group_sd(kY, kGroup, ones, 1), std::sqrt(8.0 / 3.0), 1e-12);
  // CDF 1/3 at 6 and 2/3 at 8 tie for closest to 0.5; the smaller wins.
  EXPECT_DOUBLE_EQ(weighted_group_median(kY, kGroup, ones, 1), 6.0);
}

TEST(Estimators, MedianTieGoesToSmallerValue) {
  const std::vector<double> y{1.0, 2.0, 3.0, 4.0};
  const std::vector<std::size_t> g(4, 0);
  const std::vector<double> w(4, 1.0);
  // CDF at 2 is exactly 0.5; at 1 and 3 it is 0.25 and 0.75.
  EXPECT_DOUBLE_EQ(weighted_group_median(y, g, w, 0), 2.0);
  const std::vector<double> y2{5.0, 1.0};
  const std::vector<std::size_t> g2(2, 0);
  const std::vector<double> w2(2, 1.0);
  // CDF 0.5 at 1 and 1.0 at 5.
  EXPECT_DOUBLE_EQ(weighted_group_median(y2, g2, w2, 0), 1.0);
}

TEST(Estimators, ScaleInvariant) {
  std::vector<double> scaled = kWt;
  for (auto& w : scaled) w *= 37.5;
  EXPECT_NEAR(weighted_group_mean(kY, kGroup, scaled, 0), weighted_group_mean(kY, kGroup, kWt, 0), 1e-12);
  EXPECT_NEAR(weighted_group_sd(kY, kGroup, scaled, 1), weighted_group_sd(kY, kGroup, kWt, 1), 1e-12);
}

TEST(Estimators, EmptyGroupThrows) {
  EXPECT_THROW(weighted_group_mean(kY, kGroup, kWt, 2), EmptyGroup);
  EXPECT_THROW(weighted_group_median(kY, kGroup, kWt, 2), EmptyGroup);
}

TEST(Estimators, ConstantGroupHasZeroSd) {
  const std::vector<double> y{0.1, 0.1, 0.1};
  const std::vector<std::size_t> g(3, 0);
  const std::vector<double> w{0.3, 1.7, 2.2};
  bool clamped = false;
  EXPECT_GE(weighted_group_sd(y, g, w, 0, &clamped), 0.0);
  EXPECT_LT(weighted_group_sd(y, g, w, 0), 1e-8);
}

TEST(Estimators, FeaturesShapeAndMeanDifference) {
  Dataset d;
  d.n_studies = 1;
  d.n_groups = 2;
  d.study.assign(6, 0);
  d.group = kGroup;
  d.covariates = Matrix(6, 1, 0.0);
  d.outcomes = Matrix(6, 2);
  for (std::size_t i = 0; i < 6; ++i) {
    d.outcomes(i, 0) = kY[i];
    d.outcomes(i, 1) = -2.0 * kY[i];
  }
  const auto f = estimate_features(d, kWt);
  EXPECT_EQ(f.moments.n_groups(), 2u);
  EXPECT_EQ(f.moments.n_outcomes(), 2u);
  ASSERT_EQ(f.other.pairs.size(), 1u);
  const double diff = weighted_group_mean(kY, kGroup, kWt, 0) - weighted_group_mean(kY, kGroup, kWt, 1);
  EXPECT_NEAR(f.other(0, 0), diff, 1e-12);
  EXPECT_NEAR(f.other(1, 0), -2.0 * diff, 1e-12);
  EXPECT_NEAR(f.moments(Moment::Sd, 1, 1), 2.0 * f.moments(Moment::Sd, 1, 0), 1e-12);
}

TEST(Estimators, ThreeGroupsGivePairwiseDifferences) {
  const auto pairs = group_pairs(3);
  ASSERT_EQ(pairs.size(), 3u);
  EXPECT_EQ(pairs[0], (std::pair<std::size_t, std::size_t>{0, 1}));
  EXPECT_EQ(pairs[2], (std::pair<std::size_t, std::size_t>{1, 2}));
}

TEST(Estimators, SdRatio) {
  MomentsArray m(2, 1);
  m(Moment::Sd, 0, 0) = 3.0;
  m(Moment::Sd, 1, 0) = 1.5;
  EXPECT_DOUBLE_EQ(sd_ratio(m, 0, 1, 0), 2.0);
  m(Moment::Sd, 1, 0) = 0.0;
  EXPECT_THROW(sd_ratio(m, 0, 1, 0), ZeroDenominator);
}

TEST(Estimators, FeatureRegistry) {
  FeatureRegistry reg;
  EXPECT_TRUE(reg.contains("mean"));
  EXPECT_TRUE(reg.contains("sd"));
  EXPECT_NEAR(reg.evaluate("mean", kY, kGroup, kWt, 0), weighted_group_mean(kY, kGroup, kWt, 0), 1e-12);
  EXPECT_NEAR(reg.evaluate("sd", kY, kGroup, kWt, 1), weighted_group_sd(kY, kGroup, kWt, 1), 1e-12);
  reg.add_cdf_at(2.0);
  EXPECT_NEAR(reg.evaluate("cdf@2", kY, kGroup, kWt, 0), 0.5, 1e-12);
  reg.add("second_moment", {{[](double y) { return y * y; }}, [](std::span<const double> m) { return m[0]; }});
  EXPECT_NEAR(reg.evaluate("second_moment", kY, kGroup, kWt, 0), 28.5 / 3.0, 1e-12);
  EXPECT_THROW(reg.evaluate("kurtosis", kY, kGroup, kWt, 0), ValidationError);
}

}  // namespace
}  // namespace pseudopop
