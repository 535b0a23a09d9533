#include "pseudopop/weights.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "pseudopop/errors.hpp"
#include "pseudopop/random.hpp"

namespace pseudopop {

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::IC:
      return "IC";
    case Method::IGO:
      return "IGO";
    case Method::FLEXOR:
      return "FLEXOR";
  }
  return "?";
}

Method parse_method(std::string_view text) {
  std::string upper(text);
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
  if (upper == "IC") return Method::IC;
  if (upper == "IGO") return Method::IGO;
  if (upper == "FLEXOR") return Method::FLEXOR;
  throw ValidationError("unknown method '" + std::string(text) + "' (expected FLEXOR, IC or IGO)");
}

double tilting(Method method, std::span<const double> delta_row, std::span<const double> gamma,
               std::span<const double> theta) {
  switch (method) {
    case Method::IC:
      return 1.0;
    case Method::IGO: {
      double acc = 0.0;
      for (double v : delta_row) acc += 1.0 / v;
      return 1.0 / acc;
    }
    case Method::FLEXOR: {
      const std::size_t k = theta.size();
      double acc = 0.0;
      for (std::size_t s = 0; s < gamma.size(); ++s) {
        for (std::size_t z = 0; z < k; ++z) {
          acc += gamma[s] * gamma[s] * theta[z] * theta[z] / delta_row[s * k + z];
        }
      }
      return 1.0 / acc;
    }
  }
  return 1.0;
}

std::vector<double> unnormalized_weights(const Dataset& d, const MpsMatrix& mps, std::span<const double> gamma,
                                         std::span<const double> theta, Method method) {
  if (mps.n_subjects() != d.n_subjects() || mps.n_studies != d.n_studies || mps.n_groups != d.n_groups) {
    throw DimensionMismatch("MPS matrix does not match the dataset");
  }
  if (gamma.size() != d.n_studies || theta.size() != d.n_groups) {
    throw DimensionMismatch("gamma/theta lengths do not match J/K");
  }
  std::vector<double> rho(d.n_subjects());
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const auto row = mps.delta.row(i);
    const std::size_t s = d.study[i];
    const std::size_t z = d.group[i];
    rho[i] = gamma[s] * theta[z] * tilting(method, row, gamma, theta) / mps(i, s, z);
  }
  return rho;
}

std::vector<double> normalize(std::span<const double> rho_tilde) {
  const double total = std::accumulate(rho_tilde.begin(), rho_tilde.end(), 0.0);
  if (!(total > 0.0)) throw ValidationError("all weights are zero");
  const double scale = static_cast<double>(rho_tilde.size()) / total;
  std::vector<double> wt(rho_tilde.size());
  std::transform(rho_tilde.begin(), rho_tilde.end(), wt.begin(), [scale](double r) { return r * scale; });
  return wt;
}

double sample_ess(std::span<const double> wt) {
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double w : wt) {
    sum += w;
    sum_sq += w * w;
  }
  // Kish form; identical to N^2 / sum(wt^2) when mean(wt) == 1.
  return sum * sum / sum_sq;
}

double percent_ess(std::span<const double> wt) {
  return 100.0 * sample_ess(wt) / static_cast<double>(wt.size());
}

void check_balancing_options(const Dataset& d, const BalancingOptions& options) {
  if (options.method != Method::FLEXOR) return;
  if (!options.natural_group_prop) throw MissingGroupPrevalence();
  if (options.natural_group_prop->size() != d.n_groups) {
    throw DimensionMismatch("naturalGroupProp has " + std::to_string(options.natural_group_prop->size()) +
                            " entries, data have " + std::to_string(d.n_groups) + " groups");
  }
  if (options.num_random < 1) throw ValidationError("num.random must be at least 1");
  check_gamma_box(d.n_studies, options.gamma_min, options.gamma_max);
}

WeightsResult weights_from_mps(const Dataset& d, const MpsMatrix& mps, const BalancingOptions& options) {
  check_balancing_options(d, options);
  WeightsResult out;
  out.method = options.method;
  if (options.method == Method::FLEXOR) {
    const auto theta = options.natural_group_prop->values();
    out.theta.assign(theta.begin(), theta.end());
    auto sol = estimate_flexor(d, mps, theta, options.num_random, options.gamma_min, options.gamma_max,
                               options.seed, options.flexor, options.threads);
    out.gamma = sol.gamma;
    out.flexor = std::move(sol);
  } else {
    out.gamma.assign(d.n_studies, 1.0 / static_cast<double>(d.n_studies));
    out.theta.assign(d.n_groups, 1.0 / static_cast<double>(d.n_groups));
  }
  out.wt = normalize(unnormalized_weights(d, mps, out.gamma, out.theta, options.method));
  out.percent_ess = percent_ess(out.wt);
  return out;
}

WeightsResult balancing_weights(const Dataset& d, const BalancingOptions& options, const MpsEstimator& estimator) {
  validate(d);
  check_balancing_options(d, options);
  return weights_from_mps(d, estimator(d), options);
}

WeightsResult balancing_weights(const Dataset& d, const BalancingOptions& options) {
  return balancing_weights(d, options, softmax_mps_estimator(options.mps));
}

}  // namespace pseudopop
