#include <benchmark/benchmark.h>

#include <random>

#include "pseudopop/bootstrap.hpp"
#include "pseudopop/flexor.hpp"
#include "pseudopop/mps.hpp"
#include "pseudopop/weights.hpp"

namespace {

using namespace pseudopop;

Dataset make_data(std::size_t j, std::size_t n, std::size_t p) {
  Rng rng(42);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> study(0, j - 1);
  std::uniform_int_distribution<std::size_t> group(0, 1);
  Dataset d;
  d.n_studies = j;
  d.n_groups = 2;
  d.covariates = Matrix(n, p);
  d.outcomes = Matrix(n, 1);
  d.study.resize(n);
  d.group.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    d.study[i] = i < 2 * j ? i / 2 : study(rng);
    d.group[i] = i < 2 * j ? i % 2 : group(rng);
    for (std::size_t c = 0; c < p; ++c) d.covariates(i, c) = normal(rng);
    d.outcomes(i, 0) = normal(rng) + static_cast<double>(d.group[i]);
  }
  assign_default_names(d);
  return d;
}

void BM_FitMps(benchmark::State& state) {
  const Dataset d = make_data(static_cast<std::size_t>(state.range(0)), 500, 10);
  for (auto _ : state) benchmark::DoNotOptimize(fit_mps(d));
}
BENCHMARK(BM_FitMps)->Arg(3)->Arg(7)->Unit(benchmark::kMillisecond);

void BM_FlexorEss(benchmark::State& state) {
  const std::size_t j = static_cast<std::size_t>(state.range(0));
  const Dataset d = make_data(j, 2000, 5);
  const MpsMatrix mps = predict_mps(fit_mps(d), d);
  const std::vector<double> theta{0.6, 0.4};
  const FlexorObjective objective(d, mps, theta);
  const std::vector<double> gamma(j, 1.0 / static_cast<double>(j));
  for (auto _ : state) benchmark::DoNotOptimize(objective.ess(gamma));
}
BENCHMARK(BM_FlexorEss)->Arg(3)->Arg(7);

void BM_EstimateFlexor(benchmark::State& state) {
  const Dataset d = make_data(7, 500, 5);
  const MpsMatrix mps = predict_mps(fit_mps(d), d);
  const std::vector<double> theta{0.6, 0.4};
  for (auto _ : state) benchmark::DoNotOptimize(estimate_flexor(d, mps, theta, 5, 0.001, 0.999, 1));
}
BENCHMARK(BM_EstimateFlexor)->Unit(benchmark::kMillisecond);

void BM_Bootstrap(benchmark::State& state) {
  const Dataset d = make_data(3, 300, 5);
  CausalOptions opts;
  opts.balancing.method = Method::IGO;
  opts.balancing.seed = 1;
  opts.B = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(causal_estimate(d, opts));
}
BENCHMARK(BM_Bootstrap)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
