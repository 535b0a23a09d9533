#include "pseudopop/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pseudopop/errors.hpp"

namespace pseudopop {

namespace {

void check_lengths(std::span<const double> y, std::span<const std::size_t> group, std::span<const double> wt) {
  if (y.size() != group.size() || y.size() != wt.size()) {
    throw DimensionMismatch("outcome, group and weight vectors differ in length");
  }
}

// Weighted group means of several transforms in one pass.
std::vector<double> weighted_transform_means(std::span<const double> y, std::span<const std::size_t> group,
                                             std::span<const double> wt, std::size_t z,
                                             const std::vector<std::function<double(double)>>& phi) {
  check_lengths(y, group, wt);
  std::vector<double> acc(phi.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (group[i] != z) continue;
    total += wt[i];
    for (std::size_t m = 0; m < phi.size(); ++m) acc[m] += wt[i] * phi[m](y[i]);
  }
  if (!(total > 0.0)) throw EmptyGroup(z);
  for (auto& a : acc) a /= total;
  return acc;
}

}  // namespace

double weighted_group_mean(std::span<const double> y, std::span<const std::size_t> group,
                           std::span<const double> wt, std::size_t z) {
  check_lengths(y, group, wt);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (group[i] != z) continue;
    num += wt[i] * y[i];
    den += wt[i];
  }
  if (!(den > 0.0)) throw EmptyGroup(z);
  return num / den;
}

double weighted_group_sd(std::span<const double> y, std::span<const std::size_t> group,
                         std::span<const double> wt, std::size_t z, bool* clamped) {
  check_lengths(y, group, wt);
  double m1 = 0.0;
  double m2 = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (group[i] != z) continue;
    m1 += wt[i] * y[i];
    m2 += wt[i] * y[i] * y[i];
    den += wt[i];
  }
  if (!(den > 0.0)) throw EmptyGroup(z);
  m1 /= den;
  m2 /= den;
  const double radicand = m2 - m1 * m1;
  if (clamped) *clamped = radicand < 0.0;
  return std::sqrt(std::max(0.0, radicand));
}

std::vector<double> weighted_group_cdf(std::span<const double> y, std::span<const std::size_t> group,
                                       std::span<const double> wt, std::size_t z, std::span<const double> grid) {
  check_lengths(y, group, wt);
  std::vector<std::pair<double, double>> members;
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (group[i] != z) continue;
    members.emplace_back(y[i], wt[i]);
    total += wt[i];
  }
  if (members.empty() || !(total > 0.0)) throw EmptyGroup(z);
  std::sort(members.begin(), members.end());
  std::vector<double> cdf(grid.size());
  std::size_t k = 0;
  double acc = 0.0;
  for (std::size_t m = 0; m < grid.size(); ++m) {
    while (k < members.size() && members[k].first <= grid[m]) acc += members[k++].second;
    cdf[m] = k == members.size() ? 1.0 : acc / total;
  }
  return cdf;
}

double weighted_group_median(std::span<const double> y, std::span<const std::size_t> group,
                             std::span<const double> wt, std::size_t z) {
  check_lengths(y, group, wt);
  std::vector<double> grid;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (group[i] == z) grid.push_back(y[i]);
  }
  if (grid.empty()) throw EmptyGroup(z);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  const auto cdf = weighted_group_cdf(y, group, wt, z, grid);
  constexpr double kTieSlack = 1e-12;
  std::size_t best = 0;
  double best_gap = std::abs(cdf[0] - 0.5);
  for (std::size_t m = 1; m < grid.size(); ++m) {
    const double gap = std::abs(cdf[m] - 0.5);
    if (gap < best_gap - kTieSlack) {
      best = m;
      best_gap = gap;
    }
  }
  return grid[best];
}

std::vector<std::pair<std::size_t, std::size_t>> group_pairs(std::size_t n_groups) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < n_groups; ++a) {
    for (std::size_t b = a + 1; b < n_groups; ++b) pairs.emplace_back(a, b);
  }
  return pairs;
}

Features estimate_features(const Dataset& d, std::span<const double> wt) {
  if (wt.size() != d.n_subjects()) throw DimensionMismatch("weight vector length differs from N");
  const std::size_t k = d.n_groups;
  const std::size_t l_count = d.n_outcomes();
  Features f;
  f.moments = MomentsArray(k, l_count);
  f.other.pairs = group_pairs(k);
  f.other.mean_diffs.assign(l_count * f.other.pairs.size(), 0.0);
  for (std::size_t l = 0; l < l_count; ++l) {
    const auto y = d.outcomes.column(l);
    for (std::size_t z = 0; z < k; ++z) {
      bool clamped = false;
      f.moments(Moment::Mean, z, l) = weighted_group_mean(y, d.group, wt, z);
      f.moments(Moment::Sd, z, l) = weighted_group_sd(y, d.group, wt, z, &clamped);
      f.moments(Moment::Median, z, l) = weighted_group_median(y, d.group, wt, z);
      f.sd_clamped = f.sd_clamped || clamped;
    }
    for (std::size_t p = 0; p < f.other.pairs.size(); ++p) {
      const auto [a, b] = f.other.pairs[p];
      f.other.mean_diffs[l * f.other.pairs.size() + p] =
          f.moments(Moment::Mean, a, l) - f.moments(Moment::Mean, b, l);
    }
  }
  return f;
}

double sd_ratio(const MomentsArray& moments, std::size_t a, std::size_t b, std::size_t l) {
  const double denom = moments(Moment::Sd, b, l);
  if (!(denom > 0.0)) throw ZeroDenominator("standard deviation of group " + std::to_string(b + 1) + " is zero");
  return moments(Moment::Sd, a, l) / denom;
}

FeatureRegistry::FeatureRegistry() {
  add("mean", {{[](double y) { return y; }}, [](std::span<const double> t) { return t[0]; }});
  add("sd", {{[](double y) { return y; }, [](double y) { return y * y; }},
             [](std::span<const double> t) { return std::sqrt(std::max(0.0, t[1] - t[0] * t[0])); }});
}

void FeatureRegistry::add(const std::string& name, FeatureSpec spec) {
  if (spec.phi.empty() || !spec.psi) throw ValidationError("feature '" + name + "' needs transforms and a reducer");
  specs_[name] = std::move(spec);
}

void FeatureRegistry::add_cdf_at(double point) {
  add("cdf@" + format_double(point),
      {{[point](double y) { return y <= point ? 1.0 : 0.0; }}, [](std::span<const double> t) { return t[0]; }});
}

double FeatureRegistry::evaluate(const std::string& name, std::span<const double> y,
                                 std::span<const std::size_t> group, std::span<const double> wt,
                                 std::size_t z) const {
  const auto it = specs_.find(name);
  if (it == specs_.end()) throw ValidationError("unknown feature '" + name + "'");
  const auto means = weighted_transform_means(y, group, wt, z, it->second.phi);
  return it->second.psi(means);
}

}  // namespace pseudopop
