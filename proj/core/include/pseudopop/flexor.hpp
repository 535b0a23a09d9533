#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pseudopop/dataset.hpp"
#include "pseudopop/mps.hpp"
#include "pseudopop/random.hpp"

namespace pseudopop {

struct FlexorOptions {
  double outer_tol = 1e-6;   // stop when ESS_new / ESS_old - 1 < outer_tol
  double inner_tol = 1e-8;   // stop a pairwise sweep series when its relative gain is below this
  int max_outer = 100;
  int max_inner = 200;       // sweeps over all study pairs
};

struct FlexorSolution {
  std::vector<double> gamma;
  double ess = 0.0;            // absolute scale, in (0, N]
  int n_outer_iters = 0;
  int restart_index = 0;
  std::vector<double> ess_trace;  // start value, then one entry per outer iteration
};

/// Sample ESS of the best fixed-(gamma, theta) pseudo-population, as a
/// function of gamma. Per-subject quantities that do not depend on gamma are
/// computed once so each evaluation is O(N * J).
class FlexorObjective {
 public:
  FlexorObjective(const Dataset& d, const MpsMatrix& mps, std::span<const double> theta);

  std::size_t n_studies() const noexcept { return n_studies_; }
  std::size_t n_subjects() const noexcept { return study_.size(); }

  double ess(std::span<const double> gamma) const;

  /// Unnormalized weights gamma_{s_i} theta_{z_i} eta(x_i) / delta_{s_i z_i}.
  std::vector<double> unnormalized(std::span<const double> gamma) const;

  /// Cached per-subject state for moving mass between two studies.
  class PairScan;

 private:
  friend class PairScan;
  std::size_t n_studies_;
  std::vector<std::size_t> study_;
  std::vector<double> own_;    // theta_{z_i} / delta_{i, s_i z_i}
  std::vector<double> spread_; // J x N, column-major by study: sum_z theta_z^2 / delta_{i,s,z}
};

/// ESS at (gamma, theta) with the closed-form optimal tilting plugged in.
double optimized_ess(std::span<const double> gamma, std::span<const double> theta, const MpsMatrix& mps,
                     const Dataset& d);

/// Throws NoFeasibleGamma when no probability vector of length J fits in the box
/// (never for J = 1, where gamma = 1).
void check_gamma_box(std::size_t n_studies, double gamma_min, double gamma_max);

/// Alternates the closed-form tilting step with maximization of the sample
/// ESS over gamma in the box-constrained simplex, starting at `gamma_start`.
FlexorSolution flexor_2step(std::span<const double> gamma_start, const FlexorObjective& objective,
                            double gamma_min, double gamma_max, const FlexorOptions& options = {});
FlexorSolution flexor_2step(std::span<const double> gamma_start, std::span<const double> theta,
                            const MpsMatrix& mps, const Dataset& d, double gamma_min, double gamma_max,
                            const FlexorOptions& options = {});

/// Uniform simplex draw, rejection sampled into [gamma_min, gamma_max]^J.
std::vector<double> sample_gamma_start(std::size_t n_studies, double gamma_min, double gamma_max, Rng& rng);

/// Best of `num_random` independent flexor_2step runs. Restart t draws its
/// start from the stream derive_seed(seed, kStreamFlexor, t); ties go to the
/// lowest restart index.
FlexorSolution estimate_flexor(const Dataset& d, const MpsMatrix& mps, std::span<const double> theta,
                               int num_random, double gamma_min, double gamma_max, std::uint64_t seed,
                               const FlexorOptions& options = {}, unsigned threads = 1);

}  // namespace pseudopop
