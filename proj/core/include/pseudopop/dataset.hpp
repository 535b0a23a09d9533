#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pseudopop/matrix.hpp"

namespace pseudopop {

/// Multi-study, multi-group observational dataset.
///
/// Study and group memberships are stored as 0-based indices; the original
/// labels from the input file are kept in `study_labels` / `group_labels`
/// so reports can name them. Covariates are used exactly as supplied: factor
/// covariates must already be expanded to 0/1 dummies.
struct Dataset {
  std::vector<std::size_t> study;
  std::vector<std::size_t> group;
  Matrix covariates;  // N x p
  Matrix outcomes;    // N x L

  std::size_t n_studies = 0;
  std::size_t n_groups = 0;

  std::vector<std::string> study_labels;
  std::vector<std::string> group_labels;
  std::vector<std::string> covariate_names;
  std::vector<std::string> outcome_names;

  std::size_t n_subjects() const noexcept { return study.size(); }
  std::size_t n_covariates() const noexcept { return covariates.cols(); }
  std::size_t n_outcomes() const noexcept { return outcomes.cols(); }

  /// Row subset (with repetition allowed). Labels and counts J, K are kept.
  Dataset subset(std::span<const std::size_t> rows) const;

  bool operator==(const Dataset&) const = default;
};

/// Entry (s, z) = number of subjects in study s and group z.
std::vector<std::vector<std::size_t>> cell_counts(const Dataset& d);

/// Throws DimensionMismatch, NonFiniteValue, or EmptyCell.
void validate(const Dataset& d);

/// Fills label and column-name dictionaries with 1-based defaults where empty.
void assign_default_names(Dataset& d);

/// Probability vector of natural-population group prevalences.
class GroupPrevalence {
 public:
  /// Throws ValidationError unless entries are positive and sum to 1 within 1e-12.
  /// `renormalize` rescales a positive vector to sum 1 first (for rounded
  /// inputs such as 0.8888889,0.1111111).
  explicit GroupPrevalence(std::vector<double> theta, bool renormalize = false);

  std::span<const double> values() const noexcept { return theta_; }
  std::size_t size() const noexcept { return theta_.size(); }

 private:
  std::vector<double> theta_;
};

/// Column mapping for CSV ingestion. Empty covariate / outcome lists select
/// every column named `<prefix><integer>` in numeric order.
struct CsvSchema {
  std::string study_column = "S";
  std::string group_column = "Z";
  std::vector<std::string> covariate_columns;
  std::vector<std::string> outcome_columns;
  std::string covariate_prefix = "X";
  std::string outcome_prefix = "Y";
};

Dataset load_dataset(const std::filesystem::path& path, const CsvSchema& schema = {});
Dataset read_dataset(std::istream& in, const CsvSchema& schema = {});

/// Writes S, Z, covariates, outcomes with round-trip exact decimal text.
void write_dataset(const Dataset& d, std::ostream& out);
void write_dataset(const Dataset& d, const std::filesystem::path& path);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Reads a headerless or headed numeric CSV matrix (used for base covariates).
Matrix load_matrix_csv(const std::filesystem::path& path);

}  // namespace pseudopop
