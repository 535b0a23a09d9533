#include "pseudopop/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "pseudopop/errors.hpp"
#include "pseudopop/random.hpp"

namespace pseudopop {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    acc += diff * diff;
  }
  return acc;
}

std::pair<std::size_t, double> nearest(const Matrix& centers, std::span<const double> point) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.rows(); ++c) {
    const double dist = squared_distance(centers.row(c), point);
    if (dist < best_d) {
      best_d = dist;
      best = c;
    }
  }
  return {best, best_d};
}

}  // namespace

double wcss_for_centers(const Matrix& x, const Matrix& centers) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) total += nearest(centers, x.row(i)).second;
  return total;
}

KMeansResult kmeans(const Matrix& x, std::size_t n_clusters, std::uint64_t seed, int max_iter) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  if (n_clusters == 0 || n_clusters > n) throw ValidationError("number of clusters must be in [1, rows]");
  Rng rng(seed);

  // k-means++ seeding.
  KMeansResult out;
  out.centers = Matrix(n_clusters, p);
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  const std::size_t start = first(rng);
  std::copy_n(x.row(start).begin(), p, out.centers.row(0).begin());
  std::vector<double> closest(n);
  for (std::size_t i = 0; i < n; ++i) closest[i] = squared_distance(x.row(i), out.centers.row(0));
  for (std::size_t c = 1; c < n_clusters; ++c) {
    const double total = std::accumulate(closest.begin(), closest.end(), 0.0);
    if (!(total > 0.0)) throw ValidationError("fewer distinct covariate rows than clusters");
    const std::size_t pick = sample_categorical(closest, rng);
    std::copy_n(x.row(pick).begin(), p, out.centers.row(c).begin());
    for (std::size_t i = 0; i < n; ++i) {
      closest[i] = std::min(closest[i], squared_distance(x.row(i), out.centers.row(c)));
    }
  }

  out.assignment.assign(n, n_clusters);
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    std::vector<double> dist(n);
    double wcss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto [c, d2] = nearest(out.centers, x.row(i));
      changed = changed || c != out.assignment[i];
      out.assignment[i] = c;
      dist[i] = d2;
      wcss += d2;
    }
    out.counts.assign(n_clusters, 0);
    for (auto c : out.assignment) ++out.counts[c];

    // Reseed empty clusters with the point farthest from its center.
    for (std::size_t c = 0; c < n_clusters; ++c) {
      if (out.counts[c] != 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (out.counts[out.assignment[i]] > 1 && (far == n || dist[i] > dist[far])) far = i;
      }
      if (far == n) throw ValidationError("fewer distinct covariate rows than clusters");
      --out.counts[out.assignment[far]];
      wcss -= dist[far];
      dist[far] = 0.0;
      out.assignment[far] = c;
      out.counts[c] = 1;
      std::copy_n(x.row(far).begin(), p, out.centers.row(c).begin());
      changed = true;
    }
    out.wcss_trace.push_back(wcss);
    out.iterations = iter + 1;

    // Update step.
    Matrix sums(n_clusters, p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto s = sums.row(out.assignment[i]);
      const auto xi = x.row(i);
      for (std::size_t j = 0; j < p; ++j) s[j] += xi[j];
    }
    for (std::size_t c = 0; c < n_clusters; ++c) {
      for (std::size_t j = 0; j < p; ++j) out.centers(c, j) = sums(c, j) / static_cast<double>(out.counts[c]);
    }
    if (!changed && iter > 0) break;
  }
  return out;
}

}  // namespace pseudopop
