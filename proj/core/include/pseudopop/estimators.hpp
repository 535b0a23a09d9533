#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pseudopop/dataset.hpp"

namespace pseudopop {

// Weighted within-group estimators. `group` holds 0-based labels, `wt` the
// balancing weights (any positive scale: every estimator is a ratio).

double weighted_group_mean(std::span<const double> y, std::span<const std::size_t> group,
                           std::span<const double> wt, std::size_t z);

/// sqrt(max(0, m2 - m1^2)). `clamped`, when given, reports whether rounding
/// produced a negative radicand that was set to zero.
double weighted_group_sd(std::span<const double> y, std::span<const std::size_t> group,
                         std::span<const double> wt, std::size_t z, bool* clamped = nullptr);

/// Weighted CDF of group z evaluated at each (ascending) grid point.
std::vector<double> weighted_group_cdf(std::span<const double> y, std::span<const std::size_t> group,
                                       std::span<const double> wt, std::size_t z, std::span<const double> grid);

/// Grid point (distinct observed group-z values) whose weighted CDF is
/// closest to 0.5; ties go to the smaller value.
double weighted_group_median(std::span<const double> y, std::span<const std::size_t> group,
                             std::span<const double> wt, std::size_t z);

enum class Moment : std::size_t { Mean = 0, Sd = 1, Median = 2 };

/// 3 x K x L array of (mean, sd, median) per group and outcome.
class MomentsArray {
 public:
  MomentsArray() = default;
  MomentsArray(std::size_t n_groups, std::size_t n_outcomes)
      : n_groups_(n_groups), n_outcomes_(n_outcomes), values_(3 * n_groups * n_outcomes, 0.0) {}

  std::size_t n_groups() const noexcept { return n_groups_; }
  std::size_t n_outcomes() const noexcept { return n_outcomes_; }

  double& operator()(Moment m, std::size_t z, std::size_t l) { return values_[index(m, z, l)]; }
  double operator()(Moment m, std::size_t z, std::size_t l) const { return values_[index(m, z, l)]; }

  bool operator==(const MomentsArray&) const = default;

 private:
  std::size_t index(Moment m, std::size_t z, std::size_t l) const noexcept {
    return (l * n_groups_ + z) * 3 + static_cast<std::size_t>(m);
  }
  std::size_t n_groups_ = 0;
  std::size_t n_outcomes_ = 0;
  std::vector<double> values_;
};

/// Group mean differences, one row per outcome and one column per group pair
/// (a, b), a < b, in lexicographic order. For K = 2 this is the L-vector
/// mean(group 1) - mean(group 2).
struct OtherFeatures {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<double> mean_diffs;  // L x pairs, row-major

  double operator()(std::size_t l, std::size_t pair) const { return mean_diffs[l * pairs.size() + pair]; }
  bool operator==(const OtherFeatures&) const = default;
};

std::vector<std::pair<std::size_t, std::size_t>> group_pairs(std::size_t n_groups);

struct Features {
  MomentsArray moments;
  OtherFeatures other;
  bool sd_clamped = false;
  bool operator==(const Features&) const = default;
};

Features estimate_features(const Dataset& d, std::span<const double> wt);

/// sd(a, l) / sd(b, l). Throws ZeroDenominator when sd(b, l) == 0.
double sd_ratio(const MomentsArray& moments, std::size_t a, std::size_t b, std::size_t l);

/// User-extensible weighted feature: group means of the transforms `phi`
/// reduced by `psi`. Covers any smooth function of weighted moments.
struct FeatureSpec {
  std::vector<std::function<double(double)>> phi;
  std::function<double(std::span<const double>)> psi;
};

class FeatureRegistry {
 public:
  /// Registry preloaded with "mean" and "sd".
  FeatureRegistry();

  void add(const std::string& name, FeatureSpec spec);
  bool contains(const std::string& name) const { return specs_.count(name) != 0; }

  double evaluate(const std::string& name, std::span<const double> y, std::span<const std::size_t> group,
                  std::span<const double> wt, std::size_t z) const;

  /// Registers "cdf@<point>" for a CDF evaluated at `point`.
  void add_cdf_at(double point);

 private:
  std::map<std::string, FeatureSpec> specs_;
};

}  // namespace pseudopop
