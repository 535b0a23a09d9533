#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace pseudopop {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent child stream seed for (parent, stream tag, index). Children of
/// the same parent do not depend on the order in which they are created.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream, std::uint64_t index) noexcept {
  return mix64(parent ^ mix64(stream ^ mix64(index)));
}

// Stream tags. Arbitrary distinct constants.
inline constexpr std::uint64_t kStreamFlexor = 0x464c45584f52ULL;
inline constexpr std::uint64_t kStreamBootstrap = 0x424f4f54ULL;
inline constexpr std::uint64_t kStreamSimulation = 0x53494dULL;
inline constexpr std::uint64_t kStreamTruth = 0x5452555448ULL;

/// Uniform draw on the unit simplex (symmetric Dirichlet(1)) via normalized exponentials.
std::vector<double> sample_simplex(std::size_t dim, Rng& rng);

/// Symmetric Dirichlet(alpha) draw.
std::vector<double> sample_dirichlet(std::size_t dim, double alpha, Rng& rng);

/// Index drawn with probability proportional to `probs`.
std::size_t sample_categorical(std::span<const double> probs, Rng& rng);

/// Seed from system entropy, for runs where the user gave none.
std::uint64_t entropy_seed();

}  // namespace pseudopop
