#include "pseudopop/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <system_error>
#include <unordered_map>

#include "pseudopop/errors.hpp"

namespace pseudopop {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(trim(field));
      field.clear();
    } else {
      field.push_back(ch);
    }
  }
  fields.push_back(trim(field));
  return fields;
}

std::optional<double> parse_double(const std::string& text) {
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

std::optional<long long> parse_integer(const std::string& text) {
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

// Maps raw labels to 0..n-1. Integer labels keep numeric order; anything else
// is indexed by first appearance.
std::pair<std::vector<std::size_t>, std::vector<std::string>> index_labels(
    const std::vector<std::string>& raw) {
  std::vector<std::string> distinct;
  std::unordered_map<std::string, std::size_t> seen;
  for (const auto& label : raw) {
    if (seen.emplace(label, distinct.size()).second) distinct.push_back(label);
  }
  const bool all_integer = std::all_of(distinct.begin(), distinct.end(),
                                       [](const std::string& s) { return parse_integer(s).has_value(); });
  if (all_integer) {
    std::sort(distinct.begin(), distinct.end(), [](const std::string& a, const std::string& b) {
      return *parse_integer(a) < *parse_integer(b);
    });
    for (std::size_t k = 0; k < distinct.size(); ++k) seen[distinct[k]] = k;
  }
  std::vector<std::size_t> index(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) index[i] = seen.at(raw[i]);
  return {std::move(index), std::move(distinct)};
}

std::vector<std::string> prefixed_columns(const std::vector<std::string>& header,
                                          const std::string& prefix) {
  std::vector<std::pair<long long, std::string>> found;
  for (const auto& name : header) {
    if (name.size() <= prefix.size() || name.compare(0, prefix.size(), prefix) != 0) continue;
    if (auto n = parse_integer(name.substr(prefix.size())); n && *n >= 1) found.emplace_back(*n, name);
  }
  std::sort(found.begin(), found.end());
  std::vector<std::string> names;
  for (std::size_t k = 0; k < found.size(); ++k) {
    if (found[k].first != static_cast<long long>(k + 1)) {
      throw MissingColumn(prefix + std::to_string(k + 1));
    }
    names.push_back(found[k].second);
  }
  return names;
}

}  // namespace

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.n_studies = n_studies;
  out.n_groups = n_groups;
  out.study_labels = study_labels;
  out.group_labels = group_labels;
  out.covariate_names = covariate_names;
  out.outcome_names = outcome_names;
  out.study.reserve(rows.size());
  out.group.reserve(rows.size());
  out.covariates = Matrix(rows.size(), covariates.cols());
  out.outcomes = Matrix(rows.size(), outcomes.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::size_t i = rows[k];
    out.study.push_back(study[i]);
    out.group.push_back(group[i]);
    std::copy_n(covariates.row(i).begin(), covariates.cols(), out.covariates.row(k).begin());
    std::copy_n(outcomes.row(i).begin(), outcomes.cols(), out.outcomes.row(k).begin());
  }
  return out;
}

std::vector<std::vector<std::size_t>> cell_counts(const Dataset& d) {
  std::vector<std::vector<std::size_t>> counts(d.n_studies, std::vector<std::size_t>(d.n_groups, 0));
  for (std::size_t i = 0; i < d.n_subjects(); ++i) ++counts[d.study[i]][d.group[i]];
  return counts;
}

void validate(const Dataset& d) {
  const std::size_t n = d.n_subjects();
  if (n == 0) throw DimensionMismatch("dataset has no subjects");
  if (d.group.size() != n || d.covariates.rows() != n || d.outcomes.rows() != n) {
    throw DimensionMismatch("study, group, covariate and outcome row counts differ");
  }
  if (d.n_studies == 0 || d.n_groups == 0) throw DimensionMismatch("need at least one study and one group");
  for (std::size_t i = 0; i < n; ++i) {
    if (d.study[i] >= d.n_studies || d.group[i] >= d.n_groups) {
      throw DimensionMismatch("label out of range at row " + std::to_string(i + 1));
    }
  }
  auto column_name = [](const std::vector<std::string>& names, std::size_t c, const char* prefix) {
    return c < names.size() ? names[c] : prefix + std::to_string(c + 1);
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < d.covariates.cols(); ++c) {
      if (!std::isfinite(d.covariates(i, c))) throw NonFiniteValue(i + 1, column_name(d.covariate_names, c, "X"));
    }
    for (std::size_t c = 0; c < d.outcomes.cols(); ++c) {
      if (!std::isfinite(d.outcomes(i, c))) throw NonFiniteValue(i + 1, column_name(d.outcome_names, c, "Y"));
    }
  }
  const auto counts = cell_counts(d);
  for (std::size_t s = 0; s < d.n_studies; ++s) {
    for (std::size_t z = 0; z < d.n_groups; ++z) {
      if (counts[s][z] == 0) throw EmptyCell(s + 1, z + 1);
    }
  }
}

void assign_default_names(Dataset& d) {
  auto fill = [](std::vector<std::string>& names, std::size_t count, const std::string& prefix) {
    if (names.size() == count) return;
    names.clear();
    for (std::size_t k = 1; k <= count; ++k) names.push_back(prefix + std::to_string(k));
  };
  fill(d.study_labels, d.n_studies, "");
  fill(d.group_labels, d.n_groups, "");
  fill(d.covariate_names, d.covariates.cols(), "X");
  fill(d.outcome_names, d.outcomes.cols(), "Y");
}

GroupPrevalence::GroupPrevalence(std::vector<double> theta, bool renormalize) : theta_(std::move(theta)) {
  if (theta_.empty()) throw ValidationError("naturalGroupProp must be non-empty");
  for (double v : theta_) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("naturalGroupProp entries must be strictly positive");
  }
  const double total = std::accumulate(theta_.begin(), theta_.end(), 0.0);
  if (renormalize) {
    for (double& v : theta_) v /= total;
  } else if (std::abs(total - 1.0) > 1e-12) {
    throw ValidationError("naturalGroupProp must sum to 1");
  }
}

Dataset read_dataset(std::istream& in, const CsvSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("input CSV is empty (header row required)");
  const auto header = split_csv_line(line);
  std::map<std::string, std::size_t> position;
  for (std::size_t c = 0; c < header.size(); ++c) position.emplace(header[c], c);

  auto locate = [&](const std::string& name) {
    const auto it = position.find(name);
    if (it == position.end()) throw MissingColumn(name);
    return it->second;
  };
  const std::size_t study_col = locate(schema.study_column);
  const std::size_t group_col = locate(schema.group_column);
  const auto covariate_names = schema.covariate_columns.empty()
                                   ? prefixed_columns(header, schema.covariate_prefix)
                                   : schema.covariate_columns;
  const auto outcome_names = schema.outcome_columns.empty() ? prefixed_columns(header, schema.outcome_prefix)
                                                            : schema.outcome_columns;
  std::vector<std::size_t> covariate_cols;
  std::vector<std::size_t> outcome_cols;
  for (const auto& name : covariate_names) covariate_cols.push_back(locate(name));
  for (const auto& name : outcome_names) outcome_cols.push_back(locate(name));

  std::vector<std::string> raw_study;
  std::vector<std::string> raw_group;
  std::vector<double> x_values;
  std::vector<double> y_values;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw DimensionMismatch("row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                              " fields, header has " + std::to_string(header.size()));
    }
    if (fields[study_col].empty()) throw NonFiniteValue(row, schema.study_column);
    if (fields[group_col].empty()) throw NonFiniteValue(row, schema.group_column);
    raw_study.push_back(fields[study_col]);
    raw_group.push_back(fields[group_col]);
    for (std::size_t k = 0; k < covariate_cols.size(); ++k) {
      const auto v = parse_double(fields[covariate_cols[k]]);
      if (!v || !std::isfinite(*v)) throw NonFiniteValue(row, covariate_names[k]);
      x_values.push_back(*v);
    }
    for (std::size_t k = 0; k < outcome_cols.size(); ++k) {
      const auto v = parse_double(fields[outcome_cols[k]]);
      if (!v || !std::isfinite(*v)) throw NonFiniteValue(row, outcome_names[k]);
      y_values.push_back(*v);
    }
  }

  Dataset d;
  auto [study, study_labels] = index_labels(raw_study);
  auto [group, group_labels] = index_labels(raw_group);
  d.study = std::move(study);
  d.group = std::move(group);
  d.study_labels = std::move(study_labels);
  d.group_labels = std::move(group_labels);
  d.n_studies = d.study_labels.size();
  d.n_groups = d.group_labels.size();
  d.covariates = Matrix(row, covariate_cols.size());
  std::copy(x_values.begin(), x_values.end(), d.covariates.data().begin());
  d.outcomes = Matrix(row, outcome_cols.size());
  std::copy(y_values.begin(), y_values.end(), d.outcomes.data().begin());
  d.covariate_names = covariate_names;
  d.outcome_names = outcome_names;
  validate(d);
  return d;
}

Dataset load_dataset(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open input file: " + path.string());
  return read_dataset(in, schema);
}

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

void write_dataset(const Dataset& d, std::ostream& out) {
  Dataset named = d;
  assign_default_names(named);
  out << "S,Z";
  for (const auto& name : named.covariate_names) out << ',' << name;
  for (const auto& name : named.outcome_names) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < d.n_subjects(); ++i) {
    out << named.study_labels[d.study[i]] << ',' << named.group_labels[d.group[i]];
    for (double v : d.covariates.row(i)) out << ',' << format_double(v);
    for (double v : d.outcomes.row(i)) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_dataset(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open output file: " + path.string());
  write_dataset(d, out);
}

Matrix load_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open matrix file: " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    std::vector<double> values;
    bool numeric = true;
    for (const auto& f : fields) {
      const auto v = parse_double(f);
      if (!v) {
        numeric = false;
        break;
      }
      values.push_back(*v);
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw NonFiniteValue(rows.size() + 1, "matrix");
    }
    first = false;
    if (!rows.empty() && values.size() != rows.front().size()) {
      throw DimensionMismatch("ragged matrix CSV: " + path.string());
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ValidationError("matrix CSV has no rows: " + path.string());
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

}  // namespace pseudopop
