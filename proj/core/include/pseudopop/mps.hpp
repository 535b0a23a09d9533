#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "pseudopop/dataset.hpp"
#include "pseudopop/matrix.hpp"

namespace pseudopop {

struct MpsOptions {
  double ridge_lambda = 1e-4;
  int max_iter = 2000;
  double tol = 1e-6;
  double epsilon_floor = 1e-6;
};

/// Multinomial softmax regression of the joint (study, group) category on the
/// covariates. Category c = s * K + z (0-based, study outer); category 0 is
/// the reference and has all coefficients fixed at zero, so `coefficients`
/// holds the remaining JK - 1 rows of [intercept, slope_1 .. slope_p].
struct MpsModel {
  Matrix coefficients;
  double ridge_lambda = 0.0;
  std::size_t n_studies = 0;
  std::size_t n_groups = 0;

  std::size_t n_categories() const noexcept { return n_studies * n_groups; }
  std::size_t category(std::size_t study, std::size_t group) const noexcept { return study * n_groups + group; }

  /// All-zero model (uniform probabilities).
  static MpsModel zeros(std::size_t n_studies, std::size_t n_groups, std::size_t n_covariates,
                        double ridge_lambda = 0.0);
};

/// N x JK matrix of estimated multiple propensity scores, rows on the simplex
/// and bounded below by `epsilon_floor`.
struct MpsMatrix {
  Matrix delta;
  double epsilon_floor = 0.0;
  std::size_t n_studies = 0;
  std::size_t n_groups = 0;

  std::size_t n_subjects() const noexcept { return delta.rows(); }
  double operator()(std::size_t i, std::size_t study, std::size_t group) const {
    return delta(i, study * n_groups + group);
  }
};

struct NllGradient {
  double nll = 0.0;
  Matrix gradient;  // same shape as MpsModel::coefficients
};

/// Penalized negative log-likelihood
///   -sum_i log p(c_i | x_i) + (N * lambda / 2) * sum(slopes^2)
/// and its exact gradient. Intercepts are not penalized.
NllGradient nll_and_gradient(const MpsModel& model, const Dataset& d);

/// Ridge-penalized maximum likelihood fit from a zero start. Stops when
/// max_j |gradient_j| / N <= tol. Throws NonConvergence or SingularUpdate.
MpsModel fit_mps(const Dataset& d, const MpsOptions& options = {});

/// Softmax of the linear scores, clipped below at `epsilon_floor` with the
/// remaining mass rescaled so each row still sums to one.
MpsMatrix predict_mps(const MpsModel& model, const Matrix& covariates, double epsilon_floor = 1e-6);
MpsMatrix predict_mps(const MpsModel& model, const Dataset& d, double epsilon_floor = 1e-6);

/// Clip-and-renormalize applied in place to one probability row.
void floor_probabilities(std::span<double> row, double epsilon_floor);

/// Seam for alternative propensity estimators.
using MpsEstimator = std::function<MpsMatrix(const Dataset&)>;

MpsEstimator softmax_mps_estimator(const MpsOptions& options = {});

}  // namespace pseudopop
