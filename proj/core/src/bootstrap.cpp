#include "pseudopop/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pseudopop/errors.hpp"
#include "pseudopop/parallel.hpp"

namespace pseudopop {

namespace {

bool all_cells_filled(const Dataset& d) {
  for (const auto& row : cell_counts(d)) {
    if (std::find(row.begin(), row.end(), 0u) != row.end()) return false;
  }
  return true;
}

struct Replicate {
  bool ok = false;
  std::vector<Features> features;  // per method
  std::vector<double> ess;         // per method
};

}  // namespace

Dataset resample(const Dataset& d, Rng& rng, int max_redraws, bool stratified) {
  const std::size_t n = d.n_subjects();
  std::vector<std::size_t> rows(n);
  if (stratified) {
    std::vector<std::vector<std::size_t>> cells(d.n_studies * d.n_groups);
    for (std::size_t i = 0; i < n; ++i) cells[d.study[i] * d.n_groups + d.group[i]].push_back(i);
    std::size_t k = 0;
    for (const auto& members : cells) {
      if (members.empty()) continue;
      std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
      for (std::size_t m = 0; m < members.size(); ++m) rows[k++] = members[pick(rng)];
    }
    return d.subset(rows);
  }
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (int attempt = 0; attempt < max_redraws; ++attempt) {
    for (auto& r : rows) r = pick(rng);
    Dataset out = d.subset(rows);
    if (all_cells_filled(out)) return out;
  }
  throw ResampleExhausted(max_redraws);
}

std::vector<double> BootstrapResult::moment_samples(Moment m, std::size_t z, std::size_t l) const {
  std::vector<double> v;
  v.reserve(replicates.size());
  for (const auto& f : replicates) v.push_back(f.moments(m, z, l));
  return v;
}

std::vector<double> BootstrapResult::mean_diff_samples(std::size_t l, std::size_t pair) const {
  std::vector<double> v;
  v.reserve(replicates.size());
  for (const auto& f : replicates) v.push_back(f.other(l, pair));
  return v;
}

std::vector<CausalResult> causal_estimate(const Dataset& d, std::span<const Method> methods,
                                          const CausalOptions& options) {
  if (options.B < 1) throw ValidationError("B must be at least 1");
  if (methods.empty()) throw ValidationError("no weighting method requested");
  validate(d);
  auto method_options = [&](Method m, std::uint64_t seed, unsigned threads) {
    BalancingOptions o = options.balancing;
    o.method = m;
    o.seed = seed;
    o.threads = threads;
    return o;
  };
  for (Method m : methods) check_balancing_options(d, method_options(m, 0, 1));

  const std::uint64_t seed = options.balancing.seed;
  const auto estimator = softmax_mps_estimator(options.balancing.mps);

  std::vector<CausalResult> results(methods.size());
  const MpsMatrix mps = estimator(d);
  for (std::size_t k = 0; k < methods.size(); ++k) {
    results[k].method = methods[k];
    results[k].weights = weights_from_mps(d, mps, method_options(methods[k], seed, options.threads));
    results[k].features = estimate_features(d, results[k].weights.wt);
  }

  std::vector<std::size_t> ids = options.replicate_ids.value_or(std::vector<std::size_t>{});
  if (!options.replicate_ids) {
    ids.resize(static_cast<std::size_t>(options.B));
    std::iota(ids.begin(), ids.end(), 0);
  }
  std::vector<Replicate> reps(ids.size());
  parallel_for(ids.size(), options.threads, [&](std::size_t r) {
    const std::uint64_t rep_seed = derive_seed(seed, kStreamBootstrap, ids[r]);
    Rng rng(rep_seed);
    Replicate& rep = reps[r];
    try {
      const Dataset boot = resample(d, rng, options.max_redraws, options.stratified);
      const MpsMatrix boot_mps = estimator(boot);
      for (Method m : methods) {
        const auto w = weights_from_mps(boot, boot_mps, method_options(m, rep_seed, 1));
        rep.features.push_back(estimate_features(boot, w.wt));
        rep.ess.push_back(w.percent_ess);
      }
      rep.ok = true;
    } catch (const ResampleExhausted&) {
    } catch (const ConvergenceError&) {
    }
  });

  for (std::size_t k = 0; k < methods.size(); ++k) {
    auto& boot = results[k].bootstrap;
    boot.n_requested = ids.size();
    for (std::size_t r = 0; r < ids.size(); ++r) {
      if (!reps[r].ok) {
        ++boot.n_failed;
        continue;
      }
      boot.replicate_ids.push_back(ids[r]);
      boot.replicates.push_back(reps[r].features[k]);
      boot.collated_ess.push_back(reps[r].ess[k]);
    }
  }
  return results;
}

CausalResult causal_estimate(const Dataset& d, const CausalOptions& options) {
  const Method m = options.balancing.method;
  return std::move(causal_estimate(d, std::span<const Method>(&m, 1), options).front());
}

double quantile(std::span<const double> samples, double p) {
  if (samples.empty()) throw ValidationError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("quantile probability must lie in [0, 1]");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::pair<double, double> percentile_ci(std::span<const double> samples, double level) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("confidence level must lie in (0, 1)");
  if (samples.size() < 2) throw ValidationError("percentile interval needs at least 2 samples");
  const double tail = (1.0 - level) / 2.0;
  return {quantile(samples, tail), quantile(samples, 1.0 - tail)};
}

double sample_sd(std::span<const double> samples) {
  if (samples.size() < 2) return 0.0;
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(samples.size() - 1));
}

}  // namespace pseudopop
