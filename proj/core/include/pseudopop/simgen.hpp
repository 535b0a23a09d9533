#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "pseudopop/dataset.hpp"
#include "pseudopop/kmeans.hpp"
#include "pseudopop/matrix.hpp"
#include "pseudopop/random.hpp"
#include "pseudopop/weights.hpp"

namespace pseudopop {

/// Synthetic multi-study design:
///  1. natural population of `natural_pop_size` subjects drawn from a
///     Dirichlet mixture over k-means clusters of the base covariates, with
///     group propensity logistic in sum(x) and calibrated to prevalence theta;
///  2. `n_subjects` covariate rows resampled from the base matrix;
///  3. (study, group) memberships drawn from the implied MPS;
///  4. Normal outcomes z * sum(x) + 50 with noise set for R^2 = r_squared.
/// Only K = 2 groups are supported.
struct SimConfig {
  std::size_t n_studies = 7;
  std::size_t n_groups = 2;
  std::size_t n_outcomes = 1;
  std::size_t n_subjects = 500;
  std::size_t n_clusters = 12;
  double omega1 = 1.0;
  double r_squared = 0.9;
  std::size_t natural_pop_size = 100000;
  Matrix base_covariates;  // empty: default_base_covariates()
  std::uint64_t seed = 1;
  bool group_effect = true;  // false: outcome mean sum(x) + 50 in both groups
  int max_membership_redraws = 100;
};

/// 450 x 30 stand-in covariates: 20 Gaussian-mixture columns and 10 binary
/// columns from 4 latent clusters, with a positive average row sum.
Matrix default_base_covariates(std::uint64_t seed = 20240501);

/// Base covariates plus their k-means clustering, shared by all replicates.
struct SimBase {
  Matrix covariates;
  KMeansResult clusters;
  std::vector<std::vector<std::size_t>> members;  // base rows per cluster
};

/// Throws ValidationError for invalid settings.
void validate(const SimConfig& cfg);
SimBase make_sim_base(const SimConfig& cfg);

struct SimTruth {
  std::vector<double> theta;       // natural-population group prevalence
  std::vector<double> pi;          // cluster masses
  double omega0 = 0.0;
  double omega1 = 1.0;
  double natural_mean_sum = 0.0;   // natural-population mean of sum(x)
  double sample_mean_sum = 0.0;    // sample mean of sum(x) (study model scale)
  double natural_group2_fraction = 0.0;  // mean delta_2 over the natural population
  double tau2 = 0.0;
  std::size_t n_studies = 0;
  std::size_t n_groups = 2;
  bool group_effect = true;
  std::map<Method, double> true_wate;
};

std::pair<Dataset, SimTruth> gen_dataset(const SimBase& base, const SimConfig& cfg, Rng& rng);
std::pair<Dataset, SimTruth> gen_dataset(const SimConfig& cfg, Rng& rng);

/// True MPS row (J*K entries, study-major) at covariate vector x.
std::vector<double> true_mps_row(const SimTruth& truth, std::span<const double> x);

struct TrueWate {
  double value = 0.0;
  double mc_se = 0.0;
};

/// Monte-Carlo weighted average treatment effect (group 1 minus group 2)
/// under the pseudo-population of `method` at (gamma, theta), using the true
/// MPS and covariates resampled from the base matrix.
TrueWate true_wate(const SimBase& base, const SimTruth& truth, Method method, std::span<const double> gamma,
                   std::span<const double> theta, std::size_t mc_size, Rng& rng);

/// FLEXOR study masses fitted with the true MPS on an auxiliary sample of
/// `mc_size` subjects.
std::vector<double> flexor_truth_gamma(const SimBase& base, const SimTruth& truth, std::size_t mc_size,
                                       int num_random, double gamma_min, double gamma_max, Rng& rng);

struct StudyOptions {
  std::size_t replicates = 25;
  int B = 50;
  std::vector<Method> methods{Method::FLEXOR, Method::IC, Method::IGO};
  int num_random = 40;
  double gamma_min = 0.001;
  double gamma_max = 0.999;
  std::size_t mc_size = 20000;
  int max_dataset_attempts = 20;
  unsigned threads = 1;
  std::uint64_t seed = 1;
};

struct StudyRow {
  std::size_t replicate = 0;
  Method method = Method::IC;
  double percent_ess = 0.0;
  double abs_bias = 0.0;
  double boot_sd = 0.0;
  double true_wate = 0.0;
  double est_wate = 0.0;
};

/// One row per (replicate, method). Replicate r draws from
/// derive_seed(seed, kStreamSimulation, r); a replicate whose memberships
/// cannot fill every (study, group) cell is regenerated from the next
/// attempt stream, up to `max_dataset_attempts` times.
std::vector<StudyRow> run_study(const SimConfig& cfg, const StudyOptions& options);

void write_study_csv(std::span<const StudyRow> rows, std::ostream& out);

}  // namespace pseudopop
