#include "pseudopop/flexor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "pseudopop/errors.hpp"
#include "pseudopop/parallel.hpp"

namespace pseudopop {

namespace {

double kish(double sum, double sum_sq) { return sum * sum / sum_sq; }

// Brent's derivative-free minimizer on [lo, hi]: golden-section steps with
// parabolic interpolation when it is safe. Returns the abscissa.
double brent_minimize(const std::function<double(double)>& f, double lo, double hi, double tol) {
  constexpr double kGolden = 0.3819660112501051;
  double a = lo;
  double b = hi;
  double x = a + kGolden * (b - a);
  double w = x;
  double v = x;
  double fx = f(x);
  double fw = fx;
  double fv = fx;
  double d = 0.0;
  double e = 0.0;
  for (int iter = 0; iter < 100; ++iter) {
    const double mid = 0.5 * (a + b);
    const double tol1 = tol * std::abs(x) + 1e-12;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - mid) <= tol2 - 0.5 * (b - a)) break;
    bool golden = true;
    if (std::abs(e) > tol1) {
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double e_prev = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_prev) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = x < mid ? tol1 : -tol1;
        golden = false;
      }
    }
    if (golden) {
      e = (x < mid ? b : a) - x;
      d = kGolden * e;
    }
    const double u = std::abs(d) >= tol1 ? x + d : x + (d > 0.0 ? tol1 : -tol1);
    const double fu = f(u);
    if (fu <= fx) {
      (u < x ? b : a) = x;
      v = w;
      fv = fw;
      w = x;
      fw = fx;
      x = u;
      fx = fu;
    } else {
      (u < x ? a : b) = u;
      if (fu <= fw || w == x) {
        v = w;
        fv = fw;
        w = u;
        fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u;
        fv = fu;
      }
    }
  }
  return x;
}

}  // namespace

FlexorObjective::FlexorObjective(const Dataset& d, const MpsMatrix& mps, std::span<const double> theta)
    : n_studies_(d.n_studies), study_(d.study) {
  const std::size_t n = d.n_subjects();
  const std::size_t k = d.n_groups;
  if (theta.size() != k) {
    throw DimensionMismatch("theta has " + std::to_string(theta.size()) + " entries, dataset has " +
                            std::to_string(k) + " groups");
  }
  if (mps.n_subjects() != n || mps.n_studies != d.n_studies || mps.n_groups != k) {
    throw DimensionMismatch("MPS matrix does not match the dataset");
  }
  own_.resize(n);
  spread_.assign(n_studies_ * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    own_[i] = theta[d.group[i]] / mps(i, d.study[i], d.group[i]);
    for (std::size_t s = 0; s < n_studies_; ++s) {
      double acc = 0.0;
      for (std::size_t z = 0; z < k; ++z) acc += theta[z] * theta[z] / mps(i, s, z);
      spread_[s * n + i] = acc;
    }
  }
}

std::vector<double> FlexorObjective::unnormalized(std::span<const double> gamma) const {
  const std::size_t n = study_.size();
  std::vector<double> rho(n);
  for (std::size_t i = 0; i < n; ++i) {
    double denom = 0.0;
    for (std::size_t s = 0; s < n_studies_; ++s) denom += gamma[s] * gamma[s] * spread_[s * n + i];
    rho[i] = gamma[study_[i]] * own_[i] / denom;
  }
  return rho;
}

double FlexorObjective::ess(std::span<const double> gamma) const {
  const auto rho = unnormalized(gamma);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double r : rho) {
    sum += r;
    sum_sq += r * r;
  }
  return kish(sum, sum_sq);
}

class FlexorObjective::PairScan {
 public:
  PairScan(const FlexorObjective& obj, std::vector<double> gamma) : obj_(obj), gamma_(std::move(gamma)) {
    const std::size_t n = obj_.study_.size();
    denom_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t s = 0; s < obj_.n_studies_; ++s) denom_[i] += gamma_[s] * gamma_[s] * obj_.spread_[s * n + i];
    }
    value_ = value_after(0, 1 % obj_.n_studies_, 0.0);
  }

  const std::vector<double>& gamma() const noexcept { return gamma_; }
  double value() const noexcept { return value_; }

  // ESS after moving t from study b to study a.
  double value_after(std::size_t a, std::size_t b, double t) const {
    const std::size_t n = obj_.study_.size();
    const double ga = gamma_[a] + t;
    const double gb = gamma_[b] - t;
    const double da = ga * ga - gamma_[a] * gamma_[a];
    const double db = gb * gb - gamma_[b] * gamma_[b];
    const double* spread_a = obj_.spread_.data() + a * n;
    const double* spread_b = obj_.spread_.data() + b * n;
    scratch_ = gamma_;
    scratch_[a] = ga;
    scratch_[b] = gb;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = scratch_[obj_.study_[i]] * obj_.own_[i] / (denom_[i] + da * spread_a[i] + db * spread_b[i]);
      sum += r;
      sum_sq += r * r;
    }
    return kish(sum, sum_sq);
  }

  void apply(std::size_t a, std::size_t b, double t, double new_value) {
    const std::size_t n = obj_.study_.size();
    const double ga = gamma_[a] + t;
    const double gb = gamma_[b] - t;
    const double da = ga * ga - gamma_[a] * gamma_[a];
    const double db = gb * gb - gamma_[b] * gamma_[b];
    for (std::size_t i = 0; i < n; ++i) {
      denom_[i] += da * obj_.spread_[a * n + i] + db * obj_.spread_[b * n + i];
    }
    gamma_[a] = ga;
    gamma_[b] = gb;
    value_ = new_value;
  }

 private:
  const FlexorObjective& obj_;
  std::vector<double> gamma_;
  std::vector<double> denom_;
  mutable std::vector<double> scratch_;
  double value_ = 0.0;
};

double optimized_ess(std::span<const double> gamma, std::span<const double> theta, const MpsMatrix& mps,
                     const Dataset& d) {
  if (gamma.size() != d.n_studies) throw DimensionMismatch("gamma length differs from the number of studies");
  return FlexorObjective(d, mps, theta).ess(gamma);
}

void check_gamma_box(std::size_t n_studies, double gamma_min, double gamma_max) {
  const double j = static_cast<double>(n_studies);
  if (!(gamma_min >= 0.0) || !(gamma_max <= 1.0) || !(gamma_min < gamma_max)) {
    throw NoFeasibleGamma("gamma bounds must satisfy 0 <= gammaMin < gammaMax <= 1");
  }
  // A single study always gets gamma = 1, whatever the box.
  if (n_studies > 1 && (gamma_min * j > 1.0 || gamma_max * j < 1.0)) {
    throw NoFeasibleGamma("no probability vector of length " + std::to_string(n_studies) + " lies in [" +
                          std::to_string(gamma_min) + ", " + std::to_string(gamma_max) + "]^J");
  }
}

namespace {

// Cyclic pairwise-coordinate ascent from `start`; each pair move is a 1-D
// maximization over its feasible interval.
std::vector<double> maximize_over_gamma(const FlexorObjective& obj, std::vector<double> start, double gamma_min,
                                        double gamma_max, const FlexorOptions& options) {
  const std::size_t j = obj.n_studies();
  FlexorObjective::PairScan scan(obj, std::move(start));
  for (int sweep = 0; sweep < options.max_inner; ++sweep) {
    const double before = scan.value();
    for (std::size_t a = 0; a + 1 < j; ++a) {
      for (std::size_t b = a + 1; b < j; ++b) {
        const auto& g = scan.gamma();
        const double lo = std::max(gamma_min - g[a], g[b] - gamma_max);
        const double hi = std::min(gamma_max - g[a], g[b] - gamma_min);
        if (!(hi - lo > 1e-14)) continue;
        auto neg = [&](double t) { return -scan.value_after(a, b, t); };
        const double t_star = brent_minimize(neg, lo, hi, 1e-9);
        double best_t = 0.0;
        double best = scan.value();
        for (double t : {t_star, lo, hi}) {
          const double v = scan.value_after(a, b, t);
          if (v > best) {
            best = v;
            best_t = t;
          }
        }
        if (best_t != 0.0) scan.apply(a, b, best_t, best);
      }
    }
    if (scan.value() / before - 1.0 < options.inner_tol) break;
  }
  auto gamma = scan.gamma();
  for (auto& v : gamma) v = std::clamp(v, gamma_min, gamma_max);
  return gamma;
}

}  // namespace

FlexorSolution flexor_2step(std::span<const double> gamma_start, const FlexorObjective& objective,
                            double gamma_min, double gamma_max, const FlexorOptions& options) {
  const std::size_t j = objective.n_studies();
  check_gamma_box(j, gamma_min, gamma_max);
  if (gamma_start.size() != j) throw DimensionMismatch("gamma_start length differs from the number of studies");

  FlexorSolution sol;
  sol.gamma.assign(gamma_start.begin(), gamma_start.end());
  sol.ess_trace.push_back(objective.ess(sol.gamma));
  if (j == 1) {
    sol.gamma = {1.0};
    sol.ess = objective.ess(sol.gamma);
    sol.ess_trace.push_back(sol.ess);
    sol.n_outer_iters = 1;
    return sol;
  }

  double q_new = 0.0;
  for (int outer = 0; outer < options.max_outer; ++outer) {
    const double q_old = q_new;
    // Tilting step is closed form inside the objective; this is the gamma step.
    auto candidate = maximize_over_gamma(objective, sol.gamma, gamma_min, gamma_max, options);
    const double q_candidate = objective.ess(candidate);
    if (q_candidate >= sol.ess_trace.back()) {
      sol.gamma = std::move(candidate);
      q_new = q_candidate;
    } else {
      q_new = sol.ess_trace.back();
    }
    sol.ess_trace.push_back(q_new);
    sol.n_outer_iters = outer + 1;
    if (q_old > 0.0 && q_new / q_old - 1.0 < options.outer_tol) break;
  }
  sol.ess = sol.ess_trace.back();
  return sol;
}

FlexorSolution flexor_2step(std::span<const double> gamma_start, std::span<const double> theta,
                            const MpsMatrix& mps, const Dataset& d, double gamma_min, double gamma_max,
                            const FlexorOptions& options) {
  return flexor_2step(gamma_start, FlexorObjective(d, mps, theta), gamma_min, gamma_max, options);
}

std::vector<double> sample_gamma_start(std::size_t n_studies, double gamma_min, double gamma_max, Rng& rng) {
  check_gamma_box(n_studies, gamma_min, gamma_max);
  constexpr int kMaxRejections = 10000;
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    auto g = sample_simplex(n_studies, rng);
    if (std::all_of(g.begin(), g.end(), [&](double v) { return v >= gamma_min && v <= gamma_max; })) return g;
  }
  // Narrow boxes: start from the uniform vector (always feasible here) and
  // move a random feasible amount of mass between random study pairs.
  std::vector<double> g(n_studies, 1.0 / static_cast<double>(n_studies));
  if (n_studies < 2) return g;
  std::uniform_int_distribution<std::size_t> pick(0, n_studies - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t step = 0; step < n_studies; ++step) {
    const std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    if (a == b) b = (a + 1) % n_studies;
    const double lo = std::max(gamma_min - g[a], g[b] - gamma_max);
    const double hi = std::min(gamma_max - g[a], g[b] - gamma_min);
    if (hi <= lo) continue;
    const double t = lo + unit(rng) * (hi - lo);
    g[a] += t;
    g[b] -= t;
  }
  return g;
}

FlexorSolution estimate_flexor(const Dataset& d, const MpsMatrix& mps, std::span<const double> theta,
                               int num_random, double gamma_min, double gamma_max, std::uint64_t seed,
                               const FlexorOptions& options, unsigned threads) {
  if (num_random < 1) throw ValidationError("num.random must be at least 1");
  check_gamma_box(d.n_studies, gamma_min, gamma_max);
  const FlexorObjective objective(d, mps, theta);
  std::vector<FlexorSolution> runs(static_cast<std::size_t>(num_random));
  parallel_for(runs.size(), threads, [&](std::size_t t) {
    Rng rng(derive_seed(seed, kStreamFlexor, t));
    const auto start = sample_gamma_start(d.n_studies, gamma_min, gamma_max, rng);
    runs[t] = flexor_2step(start, objective, gamma_min, gamma_max, options);
    runs[t].restart_index = static_cast<int>(t);
  });
  std::size_t best = 0;
  for (std::size_t t = 1; t < runs.size(); ++t) {
    if (runs[t].ess > runs[best].ess) best = t;
  }
  return runs[best];
}

}  // namespace pseudopop
