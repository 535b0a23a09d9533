#pragma once

#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>

namespace pseudopop {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input or precondition failures. The CLI maps these to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Numerical procedures that did not reach their stopping rule. CLI exit code 3.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class MissingColumn : public ValidationError {
 public:
  explicit MissingColumn(const std::string& column)
      : ValidationError("missing column: " + column), column_(column) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

/// A (study, group) cell with no subjects. Indices are 1-based, as reported.
class EmptyCell : public ValidationError {
 public:
  EmptyCell(std::size_t study, std::size_t group)
      : ValidationError("positivity violated: cell (study " + std::to_string(study) +
                        ", group " + std::to_string(group) + ") has no subjects"),
        study_(study),
        group_(group) {}
  std::size_t study() const noexcept { return study_; }
  std::size_t group() const noexcept { return group_; }

 private:
  std::size_t study_;
  std::size_t group_;
};

class NonFiniteValue : public ValidationError {
 public:
  NonFiniteValue(std::size_t row, std::string column)
      : ValidationError("non-finite or missing value at row " + std::to_string(row) +
                        ", column " + column),
        row_(row),
        column_(std::move(column)) {}
  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

class DimensionMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class MissingGroupPrevalence : public ValidationError {
 public:
  MissingGroupPrevalence()
      : ValidationError("naturalGroupProp required for FLEXOR weights") {}
};

class NoFeasibleGamma : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptyGroup : public ValidationError {
 public:
  explicit EmptyGroup(std::size_t group)
      : ValidationError("group " + std::to_string(group + 1) + " has no subjects"), group_(group) {}
  std::size_t group() const noexcept { return group_; }

 private:
  std::size_t group_;
};

class ZeroDenominator : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ResampleExhausted : public Error {
 public:
  explicit ResampleExhausted(int attempts)
      : Error("bootstrap resample left a (study, group) cell empty after " +
              std::to_string(attempts) + " draws") {}
};

class NonConvergence : public ConvergenceError {
 public:
  NonConvergence(int iterations, double gradient_norm)
      : ConvergenceError("MPS fit did not converge in " + std::to_string(iterations) +
                         " iterations (scaled gradient norm " + format_norm(gradient_norm) + ")"),
        iterations_(iterations),
        gradient_norm_(gradient_norm) {}
  int iterations() const noexcept { return iterations_; }
  double gradient_norm() const noexcept { return gradient_norm_; }

 private:
  static std::string format_norm(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
  }
  int iterations_;
  double gradient_norm_;
};

class SingularUpdate : public ConvergenceError {
 public:
  SingularUpdate()
      : ConvergenceError("MPS line search made no progress; covariates may separate the "
                         "(study, group) cells, try a larger ridge penalty") {}
};

class BisectionFailure : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

}  // namespace pseudopop
