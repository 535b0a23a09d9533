#include "pseudopop/mps.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <vector>

#include "pseudopop/errors.hpp"

namespace pseudopop {

namespace {

void check_dimensions(const MpsModel& model, std::size_t n_covariates) {
  const std::size_t c = model.n_categories();
  if (c == 0 || model.coefficients.rows() + 1 != c || model.coefficients.cols() != n_covariates + 1) {
    throw DimensionMismatch("MPS model has " + std::to_string(model.coefficients.cols()) +
                            " coefficient columns, dataset has " + std::to_string(n_covariates) + " covariates");
  }
}

// Softmax of [0, beta_1 . x, ..., beta_{C-1} . x] written into `probs`.
// Returns log of the normalizer.
double softmax_row(const Matrix& beta, std::span<const double> x, std::span<double> probs) {
  const std::size_t p = x.size();
  probs[0] = 0.0;
  double top = 0.0;
  for (std::size_t c = 1; c < probs.size(); ++c) {
    const auto b = beta.row(c - 1);
    double score = b[0];
    for (std::size_t j = 0; j < p; ++j) score += b[j + 1] * x[j];
    probs[c] = score;
    top = std::max(top, score);
  }
  double total = 0.0;
  for (auto& v : probs) {
    v = std::exp(v - top);
    total += v;
  }
  for (auto& v : probs) v /= total;
  return top + std::log(total);
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

// Penalized NLL over rows of `x` with slope penalty (N * lambda / 2) *
// sum_j penalty_weight_j * beta_j^2.
NllGradient penalized_nll(const Matrix& beta, const Matrix& x, std::span<const std::size_t> category,
                          std::span<const double> penalty_weight, double scale) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  const std::size_t n_cat = beta.rows() + 1;
  NllGradient out;
  out.gradient = Matrix(n_cat - 1, p + 1, 0.0);
  std::vector<double> probs(n_cat);
  double nll = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = x.row(i);
    const double log_norm = softmax_row(beta, xi, probs);
    const std::size_t observed = category[i];
    const double observed_score = observed == 0 ? 0.0 : dot(beta.row(observed - 1).subspan(1), xi) + beta(observed - 1, 0);
    nll += log_norm - observed_score;
    for (std::size_t c = 1; c < n_cat; ++c) {
      const double r = probs[c] - (c == observed ? 1.0 : 0.0);
      auto g = out.gradient.row(c - 1);
      g[0] += r;
      for (std::size_t j = 0; j < p; ++j) g[j + 1] += r * xi[j];
    }
  }
  double penalty = 0.0;
  for (std::size_t c = 0; c + 1 < n_cat; ++c) {
    for (std::size_t j = 1; j <= p; ++j) {
      const double b = beta(c, j);
      penalty += penalty_weight[j - 1] * b * b;
      out.gradient(c, j) += scale * penalty_weight[j - 1] * b;
    }
  }
  out.nll = nll + 0.5 * scale * penalty;
  return out;
}

std::vector<std::size_t> categories(const MpsModel& model, const Dataset& d) {
  std::vector<std::size_t> c(d.n_subjects());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = model.category(d.study[i], d.group[i]);
  return c;
}

}  // namespace

MpsModel MpsModel::zeros(std::size_t n_studies, std::size_t n_groups, std::size_t n_covariates,
                         double ridge_lambda) {
  MpsModel m;
  m.n_studies = n_studies;
  m.n_groups = n_groups;
  m.ridge_lambda = ridge_lambda;
  m.coefficients = Matrix(n_studies * n_groups - 1, n_covariates + 1, 0.0);
  return m;
}

NllGradient nll_and_gradient(const MpsModel& model, const Dataset& d) {
  check_dimensions(model, d.n_covariates());
  const std::vector<double> unit(d.n_covariates(), 1.0);
  const double scale = static_cast<double>(d.n_subjects()) * model.ridge_lambda;
  return penalized_nll(model.coefficients, d.covariates, categories(model, d), unit, scale);
}

// Limited-memory BFGS directions with an Armijo backtracking line search.
// The search runs on centered and scaled covariates, which leaves the
// objective unchanged (the penalty is rescaled to match) but conditions it
// far better; convergence is judged on the gradient in original coordinates.
MpsModel fit_mps(const Dataset& d, const MpsOptions& options) {
  if (!(options.ridge_lambda >= 0.0)) throw ValidationError("ridge_lambda must be nonnegative");
  MpsModel model = MpsModel::zeros(d.n_studies, d.n_groups, d.n_covariates(), options.ridge_lambda);
  if (model.n_categories() == 1) return model;

  const std::size_t n_rows = d.n_subjects();
  const std::size_t p = d.n_covariates();
  const double n = static_cast<double>(n_rows);
  std::vector<double> center(p, 0.0);
  std::vector<double> spread(p, 1.0);
  for (std::size_t j = 0; j < p; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n_rows; ++i) mean += d.covariates(i, j);
    mean /= n;
    double ss = 0.0;
    for (std::size_t i = 0; i < n_rows; ++i) ss += (d.covariates(i, j) - mean) * (d.covariates(i, j) - mean);
    const double sd = std::sqrt(ss / n);
    center[j] = mean;
    spread[j] = sd > 1e-12 * std::max(1.0, std::abs(mean)) ? sd : 1.0;
  }
  Matrix xs(n_rows, p);
  for (std::size_t i = 0; i < n_rows; ++i) {
    for (std::size_t j = 0; j < p; ++j) xs(i, j) = (d.covariates(i, j) - center[j]) / spread[j];
  }
  std::vector<double> weight(p);
  for (std::size_t j = 0; j < p; ++j) weight[j] = 1.0 / (spread[j] * spread[j]);
  const auto cats = categories(model, d);
  const double scale = n * options.ridge_lambda;

  // beta_j = b_j / spread_j, beta_0 = b_0 - sum_j b_j center_j / spread_j.
  auto to_original = [&](const Matrix& b) {
    Matrix beta(b.rows(), b.cols());
    for (std::size_t c = 0; c < b.rows(); ++c) {
      double intercept = b(c, 0);
      for (std::size_t j = 0; j < p; ++j) {
        beta(c, j + 1) = b(c, j + 1) / spread[j];
        intercept -= b(c, j + 1) * center[j] / spread[j];
      }
      beta(c, 0) = intercept;
    }
    return beta;
  };
  // Chain rule: dF/dbeta_0 = dF/db_0, dF/dbeta_j = dF/db_0 * center_j + dF/db_j * spread_j.
  auto original_gradient_norm = [&](const Matrix& g) {
    double m = 0.0;
    for (std::size_t c = 0; c < g.rows(); ++c) {
      m = std::max(m, std::abs(g(c, 0)));
      for (std::size_t j = 0; j < p; ++j) m = std::max(m, std::abs(g(c, 0) * center[j] + g(c, j + 1) * spread[j]));
    }
    return m / n;
  };

  const std::size_t dim = model.coefficients.data().size();
  constexpr std::size_t kHistory = 30;
  constexpr double kArmijo = 1e-4;

  Matrix b = model.coefficients;
  auto current = penalized_nll(b, xs, cats, weight, scale);
  auto finish = [&] {
    model.coefficients = to_original(b);
    return model;
  };
  std::deque<std::vector<double>> s_hist;
  std::deque<std::vector<double>> y_hist;
  std::deque<double> rho_hist;
  std::vector<double> direction(dim);
  std::vector<double> alpha(kHistory);

  for (int iter = 0; iter < options.max_iter; ++iter) {
    const auto grad = current.gradient.data();
    if (original_gradient_norm(current.gradient) <= options.tol) return finish();

    // Two-loop recursion: direction = -H * grad.
    std::copy(grad.begin(), grad.end(), direction.begin());
    for (std::size_t k = s_hist.size(); k-- > 0;) {
      alpha[k] = rho_hist[k] * dot(s_hist[k], direction);
      for (std::size_t j = 0; j < dim; ++j) direction[j] -= alpha[k] * y_hist[k][j];
    }
    double h0 = 1.0 / std::max(1.0, max_abs(grad));
    if (!s_hist.empty()) h0 = dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
    for (auto& v : direction) v *= h0;
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double beta = rho_hist[k] * dot(y_hist[k], direction);
      for (std::size_t j = 0; j < dim; ++j) direction[j] += s_hist[k][j] * (alpha[k] - beta);
    }
    for (auto& v : direction) v = -v;

    double slope = dot(grad, direction);
    if (!(slope < 0.0)) {
      // Curvature history went stale; fall back to steepest descent.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      const double h = 1.0 / std::max(1.0, max_abs(grad));
      for (std::size_t j = 0; j < dim; ++j) direction[j] = -h * grad[j];
      slope = dot(grad, direction);
    }

    Matrix trial = b;
    NllGradient next;
    double step = 1.0;
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings) {
      auto coef = trial.data();
      const auto base = b.data();
      for (std::size_t j = 0; j < dim; ++j) coef[j] = base[j] + step * direction[j];
      next = penalized_nll(trial, xs, cats, weight, scale);
      if (std::isfinite(next.nll) && next.nll <= current.nll + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (original_gradient_norm(current.gradient) <= 10.0 * options.tol) return finish();
      throw SingularUpdate();
    }

    std::vector<double> s(dim);
    std::vector<double> y(dim);
    const auto new_coef = trial.data();
    const auto old_coef = b.data();
    const auto new_grad = next.gradient.data();
    for (std::size_t j = 0; j < dim; ++j) {
      s[j] = new_coef[j] - old_coef[j];
      y[j] = new_grad[j] - grad[j];
    }
    const double sy = dot(s, y);
    if (sy > 1e-12 * std::sqrt(dot(s, s) * dot(y, y))) {
      if (s_hist.size() == kHistory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }
    b = std::move(trial);
    current = std::move(next);
  }
  const double final_norm = original_gradient_norm(current.gradient);
  if (final_norm <= options.tol) return finish();
  throw NonConvergence(options.max_iter, final_norm);
}

void floor_probabilities(std::span<double> row, double epsilon_floor) {
  if (epsilon_floor <= 0.0) return;
  std::vector<bool> clipped(row.size(), false);
  const std::vector<double> raw(row.begin(), row.end());
  // Entries below the floor are pinned to it; the rest share the remaining
  // mass in proportion to their raw values. Repeat until the pinned set is stable.
  for (std::size_t pass = 0; pass <= row.size(); ++pass) {
    std::size_t n_clipped = 0;
    double free_mass = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (clipped[c]) {
        ++n_clipped;
      } else {
        free_mass += raw[c];
      }
    }
    const double scale = (1.0 - static_cast<double>(n_clipped) * epsilon_floor) / free_mass;
    bool changed = false;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (clipped[c]) {
        row[c] = epsilon_floor;
      } else if (raw[c] * scale < epsilon_floor) {
        clipped[c] = true;
        changed = true;
      } else {
        row[c] = raw[c] * scale;
      }
    }
    if (!changed) return;
  }
}

MpsMatrix predict_mps(const MpsModel& model, const Matrix& covariates, double epsilon_floor) {
  check_dimensions(model, covariates.cols());
  const std::size_t n_cat = model.n_categories();
  if (epsilon_floor < 0.0 || epsilon_floor * static_cast<double>(n_cat) >= 1.0) {
    throw ValidationError("epsilon_floor must satisfy 0 <= floor < 1/JK");
  }
  MpsMatrix out;
  out.n_studies = model.n_studies;
  out.n_groups = model.n_groups;
  out.epsilon_floor = epsilon_floor;
  out.delta = Matrix(covariates.rows(), n_cat);
  for (std::size_t i = 0; i < covariates.rows(); ++i) {
    auto row = out.delta.row(i);
    softmax_row(model.coefficients, covariates.row(i), row);
    floor_probabilities(row, epsilon_floor);
  }
  return out;
}

MpsMatrix predict_mps(const MpsModel& model, const Dataset& d, double epsilon_floor) {
  return predict_mps(model, d.covariates, epsilon_floor);
}

MpsEstimator softmax_mps_estimator(const MpsOptions& options) {
  return [options](const Dataset& d) { return predict_mps(fit_mps(d, options), d, options.epsilon_floor); };
}

}  // namespace pseudopop
