#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pseudopop/dataset.hpp"
#include "pseudopop/estimators.hpp"
#include "pseudopop/random.hpp"
#include "pseudopop/weights.hpp"

namespace pseudopop {

/// N rows drawn with replacement, redrawn while any (study, group) cell is
/// empty. With `stratified`, rows are drawn within each cell instead, which
/// keeps the cell counts fixed. Throws ResampleExhausted.
Dataset resample(const Dataset& d, Rng& rng, int max_redraws = 100, bool stratified = false);

struct CausalOptions {
  BalancingOptions balancing;  // method, theta, FLEXOR settings, seed
  int B = 100;
  int max_redraws = 100;
  bool stratified = false;
  unsigned threads = 1;  // bootstrap replicates; 0 = all cores
  /// Replicate indices to run; defaults to 0..B-1. Replicate b always uses
  /// the stream derive_seed(seed, kStreamBootstrap, b).
  std::optional<std::vector<std::size_t>> replicate_ids;
};

/// Bootstrap replicates that completed, in replicate-index order.
struct BootstrapResult {
  std::size_t n_requested = 0;
  std::size_t n_failed = 0;
  std::vector<std::size_t> replicate_ids;
  std::vector<Features> replicates;
  std::vector<double> collated_ess;  // percent ESS per replicate

  std::size_t b_effective() const noexcept { return replicates.size(); }

  /// Values of one moment / mean difference across replicates.
  std::vector<double> moment_samples(Moment m, std::size_t z, std::size_t l) const;
  std::vector<double> mean_diff_samples(std::size_t l, std::size_t pair = 0) const;
};

struct CausalResult {
  WeightsResult weights;
  Features features;
  BootstrapResult bootstrap;
  Method method = Method::IC;
};

/// Point estimates on the full data plus B bootstrap replicates of the whole
/// pipeline (MPS fit, weights, features).
CausalResult causal_estimate(const Dataset& d, const CausalOptions& options);

/// Same, for several methods at once: each resample and each MPS fit is
/// shared by all methods. `options.balancing.method` is ignored.
std::vector<CausalResult> causal_estimate(const Dataset& d, std::span<const Method> methods,
                                          const CausalOptions& options);

/// Linear-interpolation quantile between order statistics at
/// h = (n - 1) p (0-based).
double quantile(std::span<const double> samples, double p);

/// Equal-tailed percentile interval at confidence `level` in (0, 1).
std::pair<double, double> percentile_ci(std::span<const double> samples, double level);

/// Sample standard deviation (n - 1 denominator).
double sample_sd(std::span<const double> samples);

}  // namespace pseudopop
