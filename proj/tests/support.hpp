#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "pseudopop/dataset.hpp"
#include "pseudopop/mps.hpp"

namespace pseudopop::testing {

/// Random dataset with every (study, group) cell filled: the first J*K rows
/// cover the cells in order, the rest are uniform.
inline Dataset random_dataset(std::size_t j, std::size_t k, std::size_t n, std::size_t p, std::size_t l,
                              std::uint64_t seed, double covariate_scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> study(0, j - 1);
  std::uniform_int_distribution<std::size_t> group(0, k - 1);
  Dataset d;
  d.n_studies = j;
  d.n_groups = k;
  d.covariates = Matrix(n, p);
  d.outcomes = Matrix(n, l);
  d.study.resize(n);
  d.group.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i < j * k) {
      d.study[i] = i / k;
      d.group[i] = i % k;
    } else {
      d.study[i] = study(rng);
      d.group[i] = group(rng);
    }
    for (std::size_t c = 0; c < p; ++c) d.covariates(i, c) = covariate_scale * normal(rng);
    for (std::size_t c = 0; c < l; ++c) d.outcomes(i, c) = normal(rng) + static_cast<double>(d.group[i]);
  }
  assign_default_names(d);
  return d;
}

/// Balanced design with identical covariate rows, `per_cell` subjects per cell.
inline Dataset constant_balanced(std::size_t j, std::size_t k, std::size_t per_cell, std::size_t p = 2) {
  Dataset d;
  d.n_studies = j;
  d.n_groups = k;
  const std::size_t n = j * k * per_cell;
  d.covariates = Matrix(n, p, 0.5);
  d.outcomes = Matrix(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cell = i % (j * k);
    d.study.push_back(cell / k);
    d.group.push_back(cell % k);
    d.outcomes(i, 0) = static_cast<double>(i % 7);
  }
  assign_default_names(d);
  return d;
}

/// Random MPS matrix with rows on the simplex, entries bounded away from 0.
inline MpsMatrix random_mps(const Dataset& d, std::uint64_t seed, double spread = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, spread);
  const std::size_t c = d.n_studies * d.n_groups;
  MpsMatrix m;
  m.n_studies = d.n_studies;
  m.n_groups = d.n_groups;
  m.delta = Matrix(d.n_subjects(), c);
  for (std::size_t i = 0; i < d.n_subjects(); ++i) {
    double total = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      m.delta(i, k) = std::exp(normal(rng));
      total += m.delta(i, k);
    }
    for (std::size_t k = 0; k < c; ++k) m.delta(i, k) /= total;
  }
  return m;
}

}  // namespace pseudopop::testing
