#include "pseudopop/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <ostream>

#include "pseudopop/bootstrap.hpp"
#include "pseudopop/errors.hpp"
#include "pseudopop/flexor.hpp"
#include "pseudopop/parallel.hpp"

namespace pseudopop {

namespace {

// Floor applied to true propensities before they are inverted.
constexpr double kTruthFloor = 1e-12;

double row_sum(std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0); }

double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

std::vector<std::size_t> draw_rows(std::size_t count, std::size_t n_rows, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, n_rows - 1);
  std::vector<std::size_t> rows(count);
  for (auto& r : rows) r = pick(rng);
  return rows;
}

// Draws (study, group) for each row from the true MPS; returns false if some
// cell stays empty.
bool draw_memberships(const SimTruth& truth, const Matrix& x, std::vector<std::size_t>& study,
                      std::vector<std::size_t>& group, Rng& rng) {
  const std::size_t k = truth.n_groups;
  std::vector<std::size_t> counts(truth.n_studies * k, 0);
  study.resize(x.rows());
  group.resize(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto probs = true_mps_row(truth, x.row(i));
    const std::size_t c = sample_categorical(probs, rng);
    study[i] = c / k;
    group[i] = c % k;
    ++counts[c];
  }
  return std::find(counts.begin(), counts.end(), 0u) == counts.end();
}

}  // namespace

Matrix default_base_covariates(std::uint64_t seed) {
  constexpr std::size_t kRows = 450;
  constexpr std::size_t kContinuous = 20;
  constexpr std::size_t kBinary = 10;
  constexpr double kMeans[] = {-0.3, 0.2, 0.6, 1.0};
  constexpr double kRates[] = {0.2, 0.4, 0.6, 0.8};
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> latent(0, 3);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix x(kRows, kContinuous + kBinary);
  for (std::size_t i = 0; i < kRows; ++i) {
    const std::size_t c = latent(rng);
    for (std::size_t j = 0; j < kContinuous; ++j) x(i, j) = kMeans[c] + noise(rng);
    for (std::size_t j = 0; j < kBinary; ++j) x(i, kContinuous + j) = unit(rng) < kRates[c] ? 1.0 : 0.0;
  }
  return x;
}

void validate(const SimConfig& cfg) {
  if (cfg.n_groups != 2) throw ValidationError("the simulation design supports exactly K = 2 groups");
  if (cfg.n_studies == 0 || cfg.n_outcomes == 0 || cfg.n_subjects == 0 || cfg.n_clusters == 0 ||
      cfg.natural_pop_size == 0) {
    throw ValidationError("simulation counts must be positive");
  }
  if (!(cfg.r_squared > 0.0 && cfg.r_squared < 1.0)) throw ValidationError("r_squared must lie in (0, 1)");
  if (!cfg.base_covariates.empty() && cfg.n_clusters > cfg.base_covariates.rows()) {
    throw ValidationError("more clusters than base covariate rows");
  }
}

SimBase make_sim_base(const SimConfig& cfg) {
  validate(cfg);
  SimBase base;
  base.covariates = cfg.base_covariates.empty() ? default_base_covariates() : cfg.base_covariates;
  base.clusters = kmeans(base.covariates, cfg.n_clusters, derive_seed(cfg.seed, kStreamSimulation, 0xC1));
  base.members.resize(cfg.n_clusters);
  for (std::size_t i = 0; i < base.covariates.rows(); ++i) base.members[base.clusters.assignment[i]].push_back(i);
  return base;
}

std::vector<double> true_mps_row(const SimTruth& truth, std::span<const double> x) {
  const double total = row_sum(x);
  const double v = total / truth.natural_mean_sum;
  const double u = total / truth.sample_mean_sum;
  const double group2 = logistic(truth.omega0 + truth.omega1 * v);
  const double group_prob[2] = {1.0 - group2, group2};
  const std::size_t j = truth.n_studies;
  std::vector<double> row(j * 2);
  std::vector<double> logits(j);
  for (std::size_t z = 0; z < 2; ++z) {
    // log(delta_{s|z} / delta_{1|z}) = s * z * omega1 * u for s >= 2 (1-based s, z).
    for (std::size_t s = 0; s < j; ++s) {
      logits[s] = s == 0 ? 0.0 : static_cast<double>((s + 1) * (z + 1)) * truth.omega1 * u;
    }
    const double top = *std::max_element(logits.begin(), logits.end());
    double norm = 0.0;
    for (auto& l : logits) {
      l = std::exp(l - top);
      norm += l;
    }
    for (std::size_t s = 0; s < j; ++s) row[s * 2 + z] = logits[s] / norm * group_prob[z];
  }
  return row;
}

std::pair<Dataset, SimTruth> gen_dataset(const SimBase& base, const SimConfig& cfg, Rng& rng) {
  validate(cfg);
  const Matrix& bx = base.covariates;
  SimTruth truth;
  truth.n_studies = cfg.n_studies;
  truth.n_groups = cfg.n_groups;
  truth.omega1 = cfg.omega1;
  truth.group_effect = cfg.group_effect;

  // (1) Natural population: counts of each base row among N0 draws.
  truth.pi = sample_simplex(base.members.size(), rng);
  std::discrete_distribution<std::size_t> cluster(truth.pi.begin(), truth.pi.end());
  std::vector<double> row_count(bx.rows(), 0.0);
  for (std::size_t i = 0; i < cfg.natural_pop_size; ++i) {
    const auto& members = base.members[cluster(rng)];
    std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
    row_count[members[pick(rng)]] += 1.0;
  }
  std::vector<double> sums(bx.rows());
  for (std::size_t r = 0; r < bx.rows(); ++r) sums[r] = row_sum(bx.row(r));
  const double n0 = static_cast<double>(cfg.natural_pop_size);
  truth.natural_mean_sum = std::inner_product(row_count.begin(), row_count.end(), sums.begin(), 0.0) / n0;
  if (!(std::abs(truth.natural_mean_sum) > 1e-12)) {
    throw BisectionFailure("natural-population covariate sums average to zero");
  }
  truth.theta = sample_simplex(cfg.n_groups, rng);

  auto mean_group2 = [&](double omega0) {
    double acc = 0.0;
    for (std::size_t r = 0; r < bx.rows(); ++r) {
      if (row_count[r] > 0.0) acc += row_count[r] * logistic(omega0 + cfg.omega1 * sums[r] / truth.natural_mean_sum);
    }
    return acc / n0;
  };
  const double target = truth.theta[1];
  double lo = -1.0;
  double hi = 1.0;
  for (int widen = 0; mean_group2(lo) > target || mean_group2(hi) < target; ++widen) {
    if (widen == 60) throw BisectionFailure("cannot bracket the group-propensity intercept");
    lo *= 2.0;
    hi *= 2.0;
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double gap = mean_group2(mid) - target;
    if (std::abs(gap) <= 1e-12 || hi - lo < 1e-15) {
      lo = hi = mid;
      break;
    }
    (gap < 0.0 ? lo : hi) = mid;
  }
  truth.omega0 = 0.5 * (lo + hi);
  truth.natural_group2_fraction = mean_group2(truth.omega0);
  if (std::abs(truth.natural_group2_fraction - target) > 1e-8) {
    throw BisectionFailure("group-propensity calibration did not reach 1e-8");
  }

  // (2) Sample covariates.
  const auto rows = draw_rows(cfg.n_subjects, bx.rows(), rng);
  Dataset d;
  d.n_studies = cfg.n_studies;
  d.n_groups = cfg.n_groups;
  d.covariates = Matrix(cfg.n_subjects, bx.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy_n(bx.row(rows[i]).begin(), bx.cols(), d.covariates.row(i).begin());
  }
  double sample_total = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) sample_total += sums[rows[i]];
  truth.sample_mean_sum = sample_total / static_cast<double>(rows.size());
  if (!(std::abs(truth.sample_mean_sum) > 1e-12)) throw BisectionFailure("sample covariate sums average to zero");

  // (3) Memberships, redrawn until every (study, group) cell is filled.
  bool filled = false;
  for (int attempt = 0; attempt < cfg.max_membership_redraws && !filled; ++attempt) {
    filled = draw_memberships(truth, d.covariates, d.study, d.group, rng);
  }
  if (!filled) {
    const auto counts = cell_counts(d);
    for (std::size_t s = 0; s < d.n_studies; ++s) {
      for (std::size_t z = 0; z < d.n_groups; ++z) {
        if (counts[s][z] == 0) throw EmptyCell(s + 1, z + 1);
      }
    }
  }

  // (4) Outcomes with noise variance calibrated to the target R^2.
  std::vector<double> signal(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double multiplier = cfg.group_effect ? static_cast<double>(d.group[i] + 1) : 1.0;
    signal[i] = multiplier * sums[rows[i]];
  }
  const double mean_signal = std::accumulate(signal.begin(), signal.end(), 0.0) / static_cast<double>(signal.size());
  double var_signal = 0.0;
  for (double s : signal) var_signal += (s - mean_signal) * (s - mean_signal);
  var_signal /= static_cast<double>(signal.size());
  truth.tau2 = var_signal * (1.0 - cfg.r_squared) / cfg.r_squared;
  std::normal_distribution<double> noise(0.0, std::sqrt(truth.tau2));
  d.outcomes = Matrix(rows.size(), cfg.n_outcomes);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t l = 0; l < cfg.n_outcomes; ++l) d.outcomes(i, l) = signal[i] + 50.0 + noise(rng);
  }
  assign_default_names(d);
  return {std::move(d), std::move(truth)};
}

std::pair<Dataset, SimTruth> gen_dataset(const SimConfig& cfg, Rng& rng) {
  return gen_dataset(make_sim_base(cfg), cfg, rng);
}

TrueWate true_wate(const SimBase& base, const SimTruth& truth, Method method, std::span<const double> gamma,
                   std::span<const double> theta, std::size_t mc_size, Rng& rng) {
  if (mc_size == 0) throw ValidationError("Monte-Carlo size must be positive");
  const auto rows = draw_rows(mc_size, base.covariates.rows(), rng);
  std::vector<double> eta(mc_size);
  std::vector<double> effect(mc_size);
  double eta_total = 0.0;
  double weighted = 0.0;
  for (std::size_t m = 0; m < mc_size; ++m) {
    const auto x = base.covariates.row(rows[m]);
    auto delta = true_mps_row(truth, x);
    floor_probabilities(delta, kTruthFloor);
    eta[m] = tilting(method, delta, gamma, theta);
    // E[Y | z = 1, x] - E[Y | z = 2, x] = (1 - 2) * sum(x) under the outcome model.
    effect[m] = truth.group_effect ? -row_sum(x) : 0.0;
    eta_total += eta[m];
    weighted += eta[m] * effect[m];
  }
  TrueWate out;
  out.value = weighted / eta_total;
  double ss = 0.0;
  for (std::size_t m = 0; m < mc_size; ++m) {
    const double dev = eta[m] * (effect[m] - out.value);
    ss += dev * dev;
  }
  out.mc_se = std::sqrt(ss) / eta_total;
  return out;
}

std::vector<double> flexor_truth_gamma(const SimBase& base, const SimTruth& truth, std::size_t mc_size,
                                       int num_random, double gamma_min, double gamma_max, Rng& rng) {
  const auto rows = draw_rows(mc_size, base.covariates.rows(), rng);
  Dataset aux;
  aux.n_studies = truth.n_studies;
  aux.n_groups = truth.n_groups;
  aux.covariates = Matrix(mc_size, base.covariates.cols());
  for (std::size_t i = 0; i < mc_size; ++i) {
    std::copy_n(base.covariates.row(rows[i]).begin(), base.covariates.cols(), aux.covariates.row(i).begin());
  }
  aux.outcomes = Matrix(mc_size, 0);
  MpsMatrix mps;
  mps.n_studies = truth.n_studies;
  mps.n_groups = truth.n_groups;
  mps.epsilon_floor = kTruthFloor;
  mps.delta = Matrix(mc_size, truth.n_studies * truth.n_groups);
  aux.study.resize(mc_size);
  aux.group.resize(mc_size);
  for (std::size_t i = 0; i < mc_size; ++i) {
    auto row = mps.delta.row(i);
    const auto probs = true_mps_row(truth, aux.covariates.row(i));
    std::copy(probs.begin(), probs.end(), row.begin());
    floor_probabilities(row, kTruthFloor);
    const std::size_t c = sample_categorical(row, rng);
    aux.study[i] = c / truth.n_groups;
    aux.group[i] = c % truth.n_groups;
  }
  const std::uint64_t seed = rng();
  return estimate_flexor(aux, mps, truth.theta, num_random, gamma_min, gamma_max, seed).gamma;
}

std::vector<StudyRow> run_study(const SimConfig& cfg, const StudyOptions& options) {
  if (options.replicates == 0) throw ValidationError("need at least one replicate");
  const SimBase base = make_sim_base(cfg);
  const std::size_t n_methods = options.methods.size();
  std::vector<std::vector<StudyRow>> per_rep(options.replicates);

  parallel_for(options.replicates, options.threads, [&](std::size_t r) {
    const std::uint64_t rep_seed = derive_seed(options.seed, kStreamSimulation, r);
    std::optional<std::pair<Dataset, SimTruth>> generated;
    std::optional<EmptyCell> last_failure;
    for (int attempt = 0; attempt < options.max_dataset_attempts && !generated; ++attempt) {
      Rng rng(derive_seed(rep_seed, kStreamSimulation, static_cast<std::uint64_t>(attempt)));
      try {
        generated = gen_dataset(base, cfg, rng);
      } catch (const EmptyCell& e) {
        last_failure = e;
      }
    }
    if (!generated) {
      if (last_failure) throw *last_failure;
      throw ValidationError("no dataset generation attempts allowed");
    }
    auto& [data, truth] = *generated;

    Rng truth_rng(derive_seed(rep_seed, kStreamTruth, 0));
    const std::vector<double> uniform_gamma(cfg.n_studies, 1.0 / static_cast<double>(cfg.n_studies));
    const std::vector<double> uniform_theta(cfg.n_groups, 1.0 / static_cast<double>(cfg.n_groups));
    for (Method m : options.methods) {
      if (m == Method::FLEXOR) {
        const auto gamma = flexor_truth_gamma(base, truth, options.mc_size, options.num_random, options.gamma_min,
                                              options.gamma_max, truth_rng);
        truth.true_wate[m] = true_wate(base, truth, m, gamma, truth.theta, options.mc_size, truth_rng).value;
      } else {
        truth.true_wate[m] = true_wate(base, truth, m, uniform_gamma, uniform_theta, options.mc_size, truth_rng).value;
      }
    }

    CausalOptions co;
    co.B = options.B;
    co.threads = 1;
    co.balancing.natural_group_prop = GroupPrevalence(truth.theta, true);
    co.balancing.num_random = options.num_random;
    co.balancing.gamma_min = options.gamma_min;
    co.balancing.gamma_max = options.gamma_max;
    co.balancing.seed = derive_seed(rep_seed, kStreamBootstrap, 0);
    const auto results = causal_estimate(data, options.methods, co);

    for (std::size_t k = 0; k < n_methods; ++k) {
      const auto& res = results[k];
      StudyRow row;
      row.replicate = r + 1;
      row.method = res.method;
      row.percent_ess = res.weights.percent_ess;
      row.est_wate = res.features.other(0, 0);
      row.true_wate = truth.true_wate.at(res.method);
      row.abs_bias = std::abs(row.est_wate - row.true_wate);
      row.boot_sd = sample_sd(res.bootstrap.mean_diff_samples(0, 0));
      per_rep[r].push_back(row);
    }
  });

  std::vector<StudyRow> rows;
  for (auto& rep : per_rep) rows.insert(rows.end(), rep.begin(), rep.end());
  return rows;
}

void write_study_csv(std::span<const StudyRow> rows, std::ostream& out) {
  out << "replicate,method,percent_ess,abs_bias,boot_sd,true_wate,est_wate\n";
  for (const auto& r : rows) {
    out << r.replicate << ',' << to_string(r.method) << ',' << format_double(r.percent_ess) << ','
        << format_double(r.abs_bias) << ',' << format_double(r.boot_sd) << ',' << format_double(r.true_wate) << ','
        << format_double(r.est_wate) << '\n';
  }
}

}  // namespace pseudopop
