#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pseudopop/dataset.hpp"
#include "pseudopop/flexor.hpp"
#include "pseudopop/mps.hpp"

namespace pseudopop {

enum class Method { IC, IGO, FLEXOR };

std::string_view to_string(Method m) noexcept;
/// Accepts "IC", "IGO", "FLEXOR" (case-insensitive). Throws ValidationError.
Method parse_method(std::string_view text);

/// Tilting function value for one subject's MPS row (JK entries, study-major).
///   IC:     1
///   IGO:    1 / sum_{s,z} 1/delta_sz
///   FLEXOR: 1 / sum_{s,z} gamma_s^2 theta_z^2 / delta_sz
double tilting(Method method, std::span<const double> delta_row, std::span<const double> gamma,
               std::span<const double> theta);

/// rho~_i = gamma_{s_i} theta_{z_i} eta(x_i) / delta_{s_i z_i}(x_i).
std::vector<double> unnormalized_weights(const Dataset& d, const MpsMatrix& mps, std::span<const double> gamma,
                                         std::span<const double> theta, Method method);

/// Rescales positive weights to sample mean 1.
std::vector<double> normalize(std::span<const double> rho_tilde);

/// N^2 / sum wt^2 for mean-1 weights (the Kish ratio), in (0, N].
double sample_ess(std::span<const double> wt);

/// 100 * ESS / N.
double percent_ess(std::span<const double> wt);

struct BalancingOptions {
  Method method = Method::IC;
  std::optional<GroupPrevalence> natural_group_prop;
  int num_random = 40;
  double gamma_min = 0.001;
  double gamma_max = 0.999;
  std::uint64_t seed = 0;
  MpsOptions mps;
  FlexorOptions flexor;
  unsigned threads = 1;  // FLEXOR restarts; 0 = all cores
};

struct WeightsResult {
  std::vector<double> wt;  // mean 1
  double percent_ess = 0.0;
  Method method = Method::IC;
  std::vector<double> gamma;
  std::vector<double> theta;
  std::optional<FlexorSolution> flexor;
};

/// Weights for a pseudo-population given an already estimated MPS matrix.
/// IC and IGO always use uniform gamma and theta; FLEXOR fixes theta to the
/// natural group prevalence and estimates gamma.
WeightsResult weights_from_mps(const Dataset& d, const MpsMatrix& mps, const BalancingOptions& options);

/// Fits the MPS with the softmax estimator, then calls weights_from_mps.
WeightsResult balancing_weights(const Dataset& d, const BalancingOptions& options);
WeightsResult balancing_weights(const Dataset& d, const BalancingOptions& options, const MpsEstimator& estimator);

/// Throws MissingGroupPrevalence / DimensionMismatch when FLEXOR inputs are unusable.
void check_balancing_options(const Dataset& d, const BalancingOptions& options);

}  // namespace pseudopop
