#include "pseudopop/random.hpp"

#include <numeric>

namespace pseudopop {

std::vector<double> sample_simplex(std::size_t dim, Rng& rng) {
  std::exponential_distribution<double> exp1(1.0);
  std::vector<double> v(dim);
  double total = 0.0;
  for (auto& x : v) {
    x = exp1(rng);
    total += x;
  }
  for (auto& x : v) x /= total;
  return v;
}

std::vector<double> sample_dirichlet(std::size_t dim, double alpha, Rng& rng) {
  if (alpha == 1.0) return sample_simplex(dim, rng);
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> v(dim);
  double total = 0.0;
  for (auto& x : v) {
    x = gamma(rng);
    total += x;
  }
  for (auto& x : v) x /= total;
  return v;
}

std::size_t sample_categorical(std::span<const double> probs, Rng& rng) {
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  double acc = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return k;
  }
  // u can land on `total` through rounding; take the last positive entry.
  for (std::size_t k = probs.size(); k-- > 0;) {
    if (probs[k] > 0.0) return k;
  }
  return probs.size() - 1;
}

std::uint64_t entropy_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

}  // namespace pseudopop
