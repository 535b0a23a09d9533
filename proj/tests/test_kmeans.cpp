#include <gtest/gtest.h>

#include <random>

#include "pseudopop/errors.hpp"
#include "pseudopop/kmeans.hpp"

namespace pseudopop {
namespace {

Matrix blobs(std::size_t per, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 0.3);
  const double centers[3][2] = {{0.0, 0.0}, {5.0, 5.0}, {-5.0, 4.0}};
  Matrix x(3 * per, 2);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < per; ++i) {
      x(c * per + i, 0) = centers[c][0] + normal(rng);
      x(c * per + i, 1) = centers[c][1] + normal(rng);
    }
  }
  return x;
}

double sq_dist(const Matrix& a, std::size_t i, const Matrix& b, std::size_t k) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.cols(); ++c) s += (a(i, c) - b(k, c)) * (a(i, c) - b(k, c));
  return s;
}

TEST(KMeans, RecoversSeparatedBlobs) {
  const Matrix x = blobs(40, 1);
  const auto r = kmeans(x, 3, 7);
  ASSERT_EQ(r.counts.size(), 3u);
  for (auto c : r.counts) EXPECT_EQ(c, 40u);
  for (std::size_t b = 0; b < 3; ++b) {
    for (std::size_t i = 1; i < 40; ++i) EXPECT_EQ(r.assignment[b * 40 + i], r.assignment[b * 40]);
  }
}

TEST(KMeans, TraceIsMonotoneAndAssignmentsNearest) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(200, 4);
  for (std::size_t i = 0; i < 200; ++i) {
    for (std::size_t c = 0; c < 4; ++c) x(i, c) = normal(rng);
  }
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto r = kmeans(x, 8, seed);
    for (std::size_t t = 1; t < r.wcss_trace.size(); ++t) {
      EXPECT_LE(r.wcss_trace[t], r.wcss_trace[t - 1] + 1e-9);
    }
    std::size_t total = 0;
    for (auto c : r.counts) {
      EXPECT_GT(c, 0u);
      total += c;
    }
    EXPECT_EQ(total, 200u);
    for (std::size_t i = 0; i < 200; ++i) {
      const double own = sq_dist(x, i, r.centers, r.assignment[i]);
      for (std::size_t k = 0; k < 8; ++k) EXPECT_LE(own, sq_dist(x, i, r.centers, k) + 1e-9);
    }
    EXPECT_NEAR(r.wcss(), wcss_for_centers(x, r.centers), 1e-8);
  }
}

TEST(KMeans, SeedDeterminism) {
  const Matrix x = blobs(20, 2);
  const auto a = kmeans(x, 4, 11);
  const auto b = kmeans(x, 4, 11);
  EXPECT_EQ(a.assignment, b.assignment);
  EXPECT_EQ(a.wcss_trace, b.wcss_trace);
}

TEST(KMeans, TooFewDistinctRows) {
  Matrix x(10, 2);
  for (std::size_t i = 0; i < 10; ++i) x(i, 0) = static_cast<double>(i % 2);
  EXPECT_THROW(kmeans(x, 3, 1), ValidationError);
  EXPECT_NO_THROW(kmeans(x, 2, 1));
}

}  // namespace
}  // namespace pseudopop
