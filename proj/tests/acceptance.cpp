// Acceptance run: one PASS / FAIL / SKIP line per criterion, exit status 1 if
// anything failed. Criterion numbers given as arguments restrict the run;
// "--known-failure N" still prints a FAIL for N but leaves the exit status alone.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "oracles.hpp"
#include "pseudopop/bootstrap.hpp"
#include "pseudopop/errors.hpp"
#include "pseudopop/estimators.hpp"
#include "pseudopop/flexor.hpp"
#include "pseudopop/mps.hpp"
#include "pseudopop/simgen.hpp"
#include "pseudopop/weights.hpp"
#include "support.hpp"

namespace {

using namespace pseudopop;

enum class Status { Pass, Fail, Skip };

struct Outcome {
  Status status = Status::Fail;
  std::string detail;
};

Outcome verdict(bool ok, std::string detail) { return {ok ? Status::Pass : Status::Fail, std::move(detail)}; }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1. Constant covariates on a balanced design: every method is the identity.
Outcome trivial_uniform() {
  const Dataset d = testing::constant_balanced(2, 2, 20);
  double worst_ess = 0.0;
  double worst_wt = 0.0;
  for (Method m : {Method::IC, Method::IGO, Method::FLEXOR}) {
    BalancingOptions o;
    o.method = m;
    o.natural_group_prop = GroupPrevalence({0.5, 0.5});
    o.seed = 1;
    const auto r = balancing_weights(d, o);
    worst_ess = std::max(worst_ess, std::abs(r.percent_ess - 100.0));
    for (double w : r.wt) worst_wt = std::max(worst_wt, std::abs(w - 1.0));
  }
  return verdict(worst_ess <= 1e-6 && worst_wt <= 1e-8,
                 "max |percentESS - 100| " + fmt("%.2e", worst_ess) + ", max |wt - 1| " + fmt("%.2e", worst_wt));
}

// 2. Analytic MPS gradient against central differences.
Outcome mps_gradient() {
  constexpr double kLambda = 1e-4;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Dataset d = testing::random_dataset(2, 2, 25, 4, 1, seed);
    std::mt19937_64 rng(seed + 100);
    std::normal_distribution<double> normal(0.0, 0.5);
    MpsModel model = MpsModel::zeros(2, 2, 4, kLambda);
    std::vector<double> coef(model.coefficients.data().begin(), model.coefficients.data().end());
    for (auto& c : coef) c = normal(rng);
    std::copy(coef.begin(), coef.end(), model.coefficients.data().begin());
    const auto analytic = nll_and_gradient(model, d);
    const auto numeric = oracle::numeric_gradient(coef, d, kLambda, 1e-5);
    for (std::size_t k = 0; k < coef.size(); ++k) {
      const double a = analytic.gradient.data()[k];
      worst = std::max(worst, std::abs(a - numeric[k]) / std::max(1.0, std::abs(numeric[k])));
    }
  }
  return verdict(worst < 1e-5, "max relative error " + fmt("%.2e", worst));
}

// 3. FLEXOR against a fine grid over gamma_1 (J = 2).
Outcome flexor_grid() {
  double worst = 0.0;
  bool monotone = true;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Dataset d = testing::random_dataset(2, 2, 30 + 3 * seed, 2, 1, 300 + seed);
    const auto mps = testing::random_mps(d, 400 + seed, 1.5);
    std::mt19937_64 rng(seed);
    const double t = std::uniform_real_distribution<double>(0.2, 0.8)(rng);
    const std::vector<double> theta{t, 1.0 - t};
    const auto sol = estimate_flexor(d, mps, theta, 40, 0.001, 0.999, seed);
    const double grid = oracle::grid_best_j2(theta, mps, d, 0.001, 1e-3);
    worst = std::max(worst, std::abs(sol.ess - grid) / grid);
    for (std::size_t k = 1; k < sol.ess_trace.size(); ++k) {
      if (sol.ess_trace[k] < sol.ess_trace[k - 1] - 1e-12) monotone = false;
    }
  }
  return verdict(worst <= 1e-4 && monotone, "max relative gap to grid " + fmt("%.2e", worst) +
                                                 (monotone ? ", traces nondecreasing" : ", trace decreased"));
}

// 4. With uniform theta, IGO is a feasible FLEXOR point.
Outcome uniform_theta_dominance() {
  double worst = 1e300;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t j = 2 + seed % 4;
    const Dataset d = testing::random_dataset(j, 2, 40 + 5 * seed, 2, 1, 500 + seed);
    const auto mps = testing::random_mps(d, 600 + seed, 1.0 + 0.1 * static_cast<double>(seed % 5));
    BalancingOptions o;
    o.natural_group_prop = GroupPrevalence({0.5, 0.5});
    o.seed = seed;
    o.method = Method::FLEXOR;
    const double flexor = weights_from_mps(d, mps, o).percent_ess;
    o.method = Method::IGO;
    const double igo = weights_from_mps(d, mps, o).percent_ess;
    worst = std::min(worst, flexor - igo);
  }
  return verdict(worst >= -1e-6, "min FLEXOR - IGO percent ESS " + fmt("%.3g", worst));
}

// 5. Desk-scale simulation study.
Outcome simulation_study() {
  const auto start = std::chrono::steady_clock::now();
  SimConfig cfg;
  cfg.seed = 1;
  StudyOptions opts;
  opts.replicates = 25;
  opts.B = 50;
  opts.seed = 1;
  opts.threads = 0;
  const auto rows = run_study(cfg, opts);
  const double minutes =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 60.0;

  std::map<std::size_t, std::map<Method, StudyRow>> by_rep;
  for (const auto& r : rows) by_rep[r.replicate][r.method] = r;
  int ess_wins = 0;
  int bias_wins = 0;
  int sd_wins = 0;
  for (auto& [rep, m] : by_rep) {
    const auto& f = m.at(Method::FLEXOR);
    const auto& ic = m.at(Method::IC);
    const auto& igo = m.at(Method::IGO);
    ess_wins += f.percent_ess > std::max(ic.percent_ess, igo.percent_ess);
    bias_wins += f.abs_bias < std::min(ic.abs_bias, igo.abs_bias);
    sd_wins += f.boot_sd < std::min(ic.boot_sd, igo.boot_sd);
  }
  const double n = static_cast<double>(by_rep.size());
  const double ess_rate = ess_wins / n;
  const double bias_rate = bias_wins / n;
  const double sd_rate = sd_wins / n;
  std::ostringstream detail;
  detail << "FLEXOR best ESS in " << ess_wins << "/" << by_rep.size() << ", lowest |bias| in " << bias_wins << "/"
         << by_rep.size() << ", lowest bootstrap SD in " << sd_wins << "/" << by_rep.size() << " ("
         << fmt("%.1f", minutes) << " min)";
  return verdict(ess_rate >= 0.9 && bias_rate >= 0.7 && sd_rate >= 0.7, detail.str());
}

// 6. Demo dataset, when supplied.
Outcome demo_reproduction() {
  const char* path = std::getenv("PSEUDOPOP_DEMO_CSV");
  if (path == nullptr || !std::filesystem::exists(path)) {
    return {Status::Skip, "set PSEUDOPOP_DEMO_CSV to the demo export to run"};
  }
  const Dataset d = load_dataset(path);
  CausalOptions o;
  o.balancing.method = Method::FLEXOR;
  o.balancing.natural_group_prop = GroupPrevalence({0.8888889, 0.1111111}, true);
  o.balancing.num_random = 25;
  o.balancing.seed = 1;
  o.B = 100;
  o.threads = 0;
  const auto r = causal_estimate(d, o);
  const double ess = r.weights.percent_ess;
  bool ok = ess >= 32.0 && ess <= 37.0 && d.n_groups == 2 && d.n_outcomes() >= 3;
  std::string detail = "percent ESS " + fmt("%.4f", ess);
  for (std::size_t l = 1; l < std::min<std::size_t>(3, d.n_outcomes()); ++l) {
    const auto [lo, hi] = percentile_ci(r.bootstrap.mean_diff_samples(l), 0.95);
    detail += ", Y" + std::to_string(l + 1) + " " + cli::format_estimate(r.features.other(l, 0), lo, hi);
    ok = ok && hi < 0.0;
  }
  return verdict(ok, detail);
}

// 7. Weighted estimators on a hand fixture.
Outcome estimator_oracle() {
  const std::vector<double> y{1, 4, 2, 10, 6, 8};
  const std::vector<std::size_t> g{0, 0, 0, 1, 1, 1};
  const std::vector<double> wt{0.5, 1.5, 1, 2, 0.25, 0.75};
  const std::vector<double> ones(6, 1.0);
  double worst = 0.0;
  auto track = [&](double a, double b) { worst = std::max(worst, std::abs(a - b)); };
  for (std::size_t z = 0; z < 2; ++z) {
    for (const auto* w : {&wt, &ones}) {
      const auto ref = oracle::weighted_stats(y, g, *w, z);
      track(weighted_group_mean(y, g, *w, z), ref.mean);
      track(weighted_group_sd(y, g, *w, z), ref.sd);
      track(weighted_group_median(y, g, *w, z), oracle::weighted_median(y, g, *w, z));
      for (double t : {0.5, 2.0, 6.0, 7.9, 8.0, 11.0}) {
        track(weighted_group_cdf(y, g, *w, z, std::vector<double>{t})[0], oracle::weighted_cdf(y, g, *w, z, t));
      }
    }
  }
  // Unweighted divide-by-n statistics for group 2 (10, 6, 8).
  track(weighted_group_mean(y, g, ones, 1), 8.0);
  track(weighted_group_sd(y, g, ones, 1), std::sqrt(8.0 / 3.0));
  return verdict(worst <= 1e-12, "max abs error " + fmt("%.2e", worst));
}

// 8. Thread count never changes the estimate output.
Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path() / "pseudopop_acceptance";
  std::filesystem::create_directories(dir);
  const auto data = (dir / "data.csv").string();
  write_dataset(testing::random_dataset(4, 2, 160, 3, 2, 8), data);
  auto run = [&](const std::string& threads) {
    const auto out = (dir / ("t" + threads + ".json")).string();
    std::ostringstream sink;
    const int code = cli::run({"pseudopop", "estimate", "--input", data, "--method", "FLEXOR",
                               "--natural-group-prop", "0.6,0.4", "--num-random", "10", "--B", "20", "--seed", "1",
                               "--threads", threads, "--output", out},
                              sink, sink);
    std::ifstream in(out, std::ios::binary);
    std::ostringstream text;
    text << in.rdbuf();
    return std::make_pair(code, text.str());
  };
  const auto one = run("1");
  const auto eight = run("8");
  std::filesystem::remove_all(dir);
  const bool ok = one.first == 0 && eight.first == 0 && !one.second.empty() && one.second == eight.second;
  return verdict(ok, "threads 1 vs 8: " + std::string(ok ? "byte-identical" : "outputs differ or failed") + " (" +
                         std::to_string(one.second.size()) + " bytes)");
}

// 9. Realized R^2 of the outcome on its signal.
Outcome r_squared() {
  SimConfig cfg;
  cfg.seed = 1;
  const SimBase base = make_sim_base(cfg);
  double lo = 1.0;
  double hi = 0.0;
  for (std::uint64_t r = 0; r < 20; ++r) {
    // Regenerate on empty cells, as the study does.
    std::optional<Dataset> generated;
    for (std::uint64_t attempt = 0; !generated; ++attempt) {
      Rng rng(derive_seed(derive_seed(9, kStreamSimulation, r), kStreamSimulation, attempt));
      try {
        generated = gen_dataset(base, cfg, rng).first;
      } catch (const EmptyCell&) {
        if (attempt == 19) throw;
      }
    }
    const Dataset& d = *generated;
    const std::size_t n = d.n_subjects();
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = d.covariates.row(i);
      s[i] = static_cast<double>(d.group[i] + 1) * std::accumulate(x.begin(), x.end(), 0.0);
    }
    const double ms = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(n);
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) my += d.outcomes(i, 0);
    my /= static_cast<double>(n);
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = s[i] - ms;
      const double b = d.outcomes(i, 0) - my;
      sxy += a * b;
      sxx += a * a;
      syy += b * b;
    }
    const double r2 = sxy * sxy / (sxx * syy);
    lo = std::min(lo, r2);
    hi = std::max(hi, r2);
  }
  return verdict(lo >= 0.85 && hi <= 0.93, "realized R^2 range [" + fmt("%.4f", lo) + ", " + fmt("%.4f", hi) + "]");
}

// 10. Percentile intervals.
Outcome bootstrap_ci() {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  const auto [lo, hi] = percentile_ci(v, 0.95);
  bool ok = std::abs(lo - 3.475) <= 1e-12 && std::abs(hi - 97.525) <= 1e-12;
  std::mt19937_64 rng(10);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> s(5 + 7 * t);
    for (auto& x : s) x = normal(rng);
    const auto wide = percentile_ci(s, 0.95);
    const auto narrow = percentile_ci(s, 0.90);
    ok = ok && wide.first <= narrow.first && narrow.second <= wide.second;
  }
  return verdict(ok, "1..100 at 95%: (" + fmt("%.15g", lo) + ", " + fmt("%.15g", hi) + "), nesting on 50 vectors");
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::size_t> selected;
  std::vector<std::size_t> known;
  for (int a = 1; a < argc; ++a) {
    if (std::string(argv[a]) == "--known-failure" && a + 1 < argc) {
      known.push_back(std::strtoul(argv[++a], nullptr, 10));
    } else {
      selected.push_back(std::strtoul(argv[a], nullptr, 10));
    }
  }
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"trivial-uniform identity", trivial_uniform},
      {"MPS gradient check", mps_gradient},
      {"FLEXOR grid oracle", flexor_grid},
      {"uniform-theta dominance", uniform_theta_dominance},
      {"desk-scale simulation study", simulation_study},
      {"demo dataset reproduction", demo_reproduction},
      {"estimator oracle", estimator_oracle},
      {"thread determinism", determinism},
      {"R^2 calibration", r_squared},
      {"bootstrap CI sanity", bootstrap_ci},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), k + 1) == selected.end()) continue;
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {Status::Fail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.status == Status::Pass ? "PASS" : o.status == Status::Skip ? "SKIP" : "FAIL";
    const bool tolerated = std::find(known.begin(), known.end(), k + 1) != known.end();
    failures += o.status == Status::Fail && !tolerated;
    std::printf("%s %zu %s: %s%s\n", tag, k + 1, criteria[k].first, o.detail.c_str(),
                o.status == Status::Fail && tolerated ? " [known failure]" : "");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
