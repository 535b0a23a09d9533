#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pseudopop/matrix.hpp"

namespace pseudopop {

struct KMeansResult {
  Matrix centers;                      // Q x p
  std::vector<std::size_t> assignment; // row -> cluster
  std::vector<std::size_t> counts;     // rows per cluster, all > 0
  std::vector<double> wcss_trace;      // within-cluster sum of squares after each assignment step
  int iterations = 0;

  double wcss() const { return wcss_trace.empty() ? 0.0 : wcss_trace.back(); }
};

/// Lloyd's algorithm from a k-means++ start. A cluster that loses all its
/// points is reseeded with the point farthest from its current center.
/// Throws ValidationError if X has fewer than Q distinct rows.
KMeansResult kmeans(const Matrix& x, std::size_t n_clusters, std::uint64_t seed, int max_iter = 100);

/// Within-cluster sum of squares of `x` for nearest-center assignment.
double wcss_for_centers(const Matrix& x, const Matrix& centers);

}  // namespace pseudopop
