#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "pseudopop/bootstrap.hpp"
#include "pseudopop/dataset.hpp"
#include "pseudopop/errors.hpp"
#include "pseudopop/simgen.hpp"
#include "pseudopop/weights.hpp"

namespace pseudopop::cli {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

struct CommonArgs {
  std::string input;
  std::string method;
  std::vector<double> natural_group_prop;
  int B = 100;
  int num_random = 40;
  double gamma_min = 0.001;
  double gamma_max = 0.999;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string output;
  std::string format = "json";
  unsigned threads = 0;
  std::string report;
  bool stratified = false;
  CsvSchema schema;
};

struct SimArgs {
  SimConfig config;
  std::size_t replicates = 25;
  std::size_t mc_size = 20000;
  std::string base_covariates;
  std::string truth;
  std::vector<std::string> methods{"FLEXOR", "IC", "IGO"};
};

void add_output_options(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--seed", a.seed, "Random seed (default: drawn from system entropy and echoed)");
  cmd->add_option("--output", a.output, "Output file (default: standard output)");
  cmd->add_option("--threads", a.threads, "Worker threads (default: $PSEUDOPOP_THREADS or all cores)");
}

void add_data_options(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--input", a.input, "Input CSV with study, group, covariate and outcome columns")->required();
  cmd->add_option("--study-column", a.schema.study_column, "Study column name")->capture_default_str();
  cmd->add_option("--group-column", a.schema.group_column, "Group column name")->capture_default_str();
  cmd->add_option("--covariates", a.schema.covariate_columns, "Covariate columns (default: X1, X2, ...)")
      ->delimiter(',');
  cmd->add_option("--outcomes", a.schema.outcome_columns, "Outcome columns (default: Y1, Y2, ...)")
      ->delimiter(',');
  cmd->add_option("--method", a.method, "Weighting method: FLEXOR, IC or IGO")->required();
  cmd->add_option("--natural-group-prop", a.natural_group_prop,
                  "Natural-population group prevalences v1,...,vK (rescaled to sum 1); FLEXOR only")
      ->delimiter(',');
  cmd->add_option("--num-random", a.num_random, "FLEXOR random restarts")->capture_default_str();
  cmd->add_option("--gamma-min", a.gamma_min, "Lower bound on study masses")->capture_default_str();
  cmd->add_option("--gamma-max", a.gamma_max, "Upper bound on study masses")->capture_default_str();
  cmd->add_option("--format", a.format, "Output format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  add_output_options(cmd, a);
}

void add_sim_options(CLI::App* cmd, SimArgs& s) {
  cmd->add_option("--n-studies", s.config.n_studies, "Number of studies")->capture_default_str();
  cmd->add_option("--n-outcomes", s.config.n_outcomes, "Number of outcomes")->capture_default_str();
  cmd->add_option("--n-subjects", s.config.n_subjects, "Subjects per dataset")->capture_default_str();
  cmd->add_option("--clusters", s.config.n_clusters, "k-means clusters of the base covariates")->capture_default_str();
  cmd->add_option("--r-squared", s.config.r_squared, "Target outcome R-squared")->capture_default_str();
  cmd->add_option("--natural-pop-size", s.config.natural_pop_size, "Natural population size")->capture_default_str();
  cmd->add_option("--omega1", s.config.omega1, "Propensity slope on the covariate sum")->capture_default_str();
  cmd->add_option("--base-covariates", s.base_covariates, "CSV of base covariates (default: built-in 450 x 30)");
  cmd->add_option("--mc-size", s.mc_size, "Monte-Carlo size for true effects")->capture_default_str();
}

std::uint64_t resolve_seed(const CLI::App* cmd, CommonArgs& a) {
  a.seed_given = cmd->count("--seed") > 0;
  if (!a.seed_given) a.seed = entropy_seed();
  return a.seed;
}

ordered_json schema_json(const CsvSchema& s) {
  ordered_json j;
  j["studyColumn"] = s.study_column;
  j["groupColumn"] = s.group_column;
  j["covariates"] = s.covariate_columns;
  j["outcomes"] = s.outcome_columns;
  return j;
}

// Resolved configuration. Thread count and output location are left out so
// that the same inputs give byte-identical results.
ordered_json data_config(const std::string& command, const CommonArgs& a) {
  ordered_json j;
  j["command"] = command;
  j["input"] = a.input;
  j["method"] = a.method;
  j["naturalGroupProp"] = a.natural_group_prop;
  if (command == "estimate") {
    j["B"] = a.B;
    j["stratified"] = a.stratified;
  }
  j["numRandom"] = a.num_random;
  j["gammaMin"] = a.gamma_min;
  j["gammaMax"] = a.gamma_max;
  j["seed"] = a.seed;
  j["format"] = a.format;
  j["schema"] = schema_json(a.schema);
  return j;
}

ordered_json sim_config(const std::string& command, const CommonArgs& a, const SimArgs& s) {
  ordered_json j;
  j["command"] = command;
  j["nStudies"] = s.config.n_studies;
  j["nGroups"] = s.config.n_groups;
  j["nOutcomes"] = s.config.n_outcomes;
  j["nSubjects"] = s.config.n_subjects;
  j["clusters"] = s.config.n_clusters;
  j["rSquared"] = s.config.r_squared;
  j["naturalPopSize"] = s.config.natural_pop_size;
  j["omega1"] = s.config.omega1;
  j["baseCovariates"] = s.base_covariates;
  j["mcSize"] = s.mc_size;
  j["numRandom"] = a.num_random;
  j["gammaMin"] = a.gamma_min;
  j["gammaMax"] = a.gamma_max;
  if (command == "study") {
    j["replicates"] = s.replicates;
    j["B"] = a.B;
    j["methods"] = s.methods;
  }
  j["seed"] = a.seed;
  return j;
}

template <class Fn>
void write_to(const std::string& path, std::ostream& fallback, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ValidationError("cannot open output file: " + path);
  fn(file);
  if (!file) throw Error("failed writing output file: " + path);
}

BalancingOptions balancing_options(const CommonArgs& a, Method method) {
  BalancingOptions o;
  o.method = method;
  if (!a.natural_group_prop.empty()) o.natural_group_prop = GroupPrevalence(a.natural_group_prop, true);
  o.num_random = a.num_random;
  o.gamma_min = a.gamma_min;
  o.gamma_max = a.gamma_max;
  o.seed = a.seed;
  o.threads = a.threads;
  if (a.num_random < 1) throw ValidationError("--num-random must be at least 1");
  return o;
}

std::string group_name(const Dataset& d, std::size_t z) {
  return z < d.group_labels.size() ? d.group_labels[z] : std::to_string(z + 1);
}

std::string pair_name(const Dataset& d, std::pair<std::size_t, std::size_t> p) {
  return group_name(d, p.first) + "-" + group_name(d, p.second);
}

constexpr Moment kMoments[] = {Moment::Mean, Moment::Sd, Moment::Median};
constexpr const char* kMomentNames[] = {"mean", "sd", "median"};

// ---- weights -------------------------------------------------------------

int cmd_weights(const CommonArgs& a, std::ostream& out, std::ostream& err) {
  const Method method = parse_method(a.method);
  const Dataset d = load_dataset(a.input, a.schema);
  const auto opts = balancing_options(a, method);
  const auto config = data_config("weights", a);
  err << "config: " << config.dump() << '\n';
  const WeightsResult res = balancing_weights(d, opts);

  write_to(a.output, out, [&](std::ostream& os) {
    if (a.format == "csv") {
      os << "quantity,subject,value\n";
      os << "method,," << to_string(res.method) << '\n';
      os << "seed,," << a.seed << '\n';
      os << "percentESS,," << format_double(res.percent_ess) << '\n';
      for (std::size_t i = 0; i < res.wt.size(); ++i) os << "wt.v," << i + 1 << ',' << format_double(res.wt[i]) << '\n';
      return;
    }
    ordered_json j;
    j["method"] = std::string(to_string(res.method));
    j["seed"] = a.seed;
    j["config"] = config;
    j["percentESS"] = res.percent_ess;
    j["gamma"] = res.gamma;
    j["theta"] = res.theta;
    j["wt.v"] = res.wt;
    os << j.dump(2) << '\n';
  });
  return kExitOk;
}

// ---- estimate ------------------------------------------------------------

std::optional<std::pair<double, double>> ci95(const std::vector<double>& samples) {
  if (samples.size() < 2) return std::nullopt;
  return percentile_ci(samples, 0.95);
}

std::string estimate_cell(double est, const std::vector<double>& samples) {
  const auto ci = ci95(samples);
  if (!ci) return round2(est) + " (NA,NA)";
  return format_estimate(est, ci->first, ci->second);
}

void write_report(const Dataset& d, const CausalResult& r, std::uint64_t seed, std::ostream& os) {
  const auto& boot = r.bootstrap;
  os << "method " << to_string(r.method) << ", percent ESS " << round2(r.weights.percent_ess)
     << ", bootstrap replicates " << boot.b_effective() << " of " << boot.n_requested << ", seed " << seed << '\n';
  const auto& other = r.features.other;
  for (std::size_t p = 0; p < other.pairs.size(); ++p) {
    os << "\nmean difference, group " << group_name(d, other.pairs[p].first) << " minus group "
       << group_name(d, other.pairs[p].second) << " (95% percentile CI)\n";
    for (std::size_t l = 0; l < d.n_outcomes(); ++l) {
      os << d.outcome_names[l] << ' ' << estimate_cell(other(l, p), boot.mean_diff_samples(l, p)) << '\n';
    }
  }
  os << "\nmoments by group (95% percentile CI)\n";
  for (std::size_t l = 0; l < d.n_outcomes(); ++l) {
    os << d.outcome_names[l] << '\n';
    for (std::size_t m = 0; m < 3; ++m) {
      os << "  " << std::left << std::setw(7) << kMomentNames[m];
      for (std::size_t z = 0; z < d.n_groups; ++z) {
        const std::string cell =
            estimate_cell(r.features.moments(kMoments[m], z, l), boot.moment_samples(kMoments[m], z, l));
        os << "  group " << group_name(d, z) << ": " << std::setw(24) << cell;
      }
      os << '\n';
    }
  }
}

ordered_json estimate_json(const Dataset& d, const CausalResult& r, const ordered_json& config, std::uint64_t seed) {
  const std::size_t K = d.n_groups;
  const std::size_t L = d.n_outcomes();
  const auto& boot = r.bootstrap;
  const auto& other = r.features.other;
  const bool two_groups = other.pairs.size() == 1;

  ordered_json j;
  j["method"] = std::string(to_string(r.method));
  j["seed"] = seed;
  j["config"] = config;
  j["percentESS"] = r.weights.percent_ess;

  ordered_json moments = ordered_json::array();
  for (auto m : kMoments) {
    ordered_json by_group = ordered_json::array();
    for (std::size_t z = 0; z < K; ++z) {
      ordered_json by_outcome = ordered_json::array();
      for (std::size_t l = 0; l < L; ++l) by_outcome.push_back(r.features.moments(m, z, l));
      by_group.push_back(by_outcome);
    }
    moments.push_back(by_group);
  }
  j["moments.ar"] = moments;

  ordered_json diffs = ordered_json::array();
  for (std::size_t l = 0; l < L; ++l) {
    if (two_groups) {
      diffs.push_back(other(l, 0));
    } else {
      ordered_json row = ordered_json::array();
      for (std::size_t p = 0; p < other.pairs.size(); ++p) row.push_back(other(l, p));
      diffs.push_back(row);
    }
  }
  j["otherFeatures.v"] = diffs;

  ordered_json collated = ordered_json::array();
  for (auto m : kMoments) {
    ordered_json by_group = ordered_json::array();
    for (std::size_t z = 0; z < K; ++z) {
      ordered_json by_outcome = ordered_json::array();
      for (std::size_t l = 0; l < L; ++l) by_outcome.push_back(boot.moment_samples(m, z, l));
      by_group.push_back(by_outcome);
    }
    collated.push_back(by_group);
  }
  j["collatedMoments.ar"] = collated;

  ordered_json collated_diffs = ordered_json::array();
  for (std::size_t l = 0; l < L; ++l) {
    if (two_groups) {
      collated_diffs.push_back(boot.mean_diff_samples(l, 0));
    } else {
      ordered_json row = ordered_json::array();
      for (std::size_t p = 0; p < other.pairs.size(); ++p) row.push_back(boot.mean_diff_samples(l, p));
      collated_diffs.push_back(row);
    }
  }
  j["collatedOtherFeatures.mt"] = collated_diffs;
  j["collatedESS"] = boot.collated_ess;

  ordered_json pairs = ordered_json::array();
  for (const auto& p : other.pairs) pairs.push_back({d.group_labels[p.first], d.group_labels[p.second]});
  j["groupPairs"] = pairs;
  j["groupLabels"] = d.group_labels;
  j["outcomeNames"] = d.outcome_names;
  j["bootstrapRequested"] = boot.n_requested;
  j["bootstrapFailed"] = boot.n_failed;
  std::vector<std::size_t> ids;
  for (auto b : boot.replicate_ids) ids.push_back(b + 1);
  j["bootstrapReplicates"] = ids;
  j["sdClamped"] = r.features.sd_clamped;
  return j;
}

void estimate_csv(const Dataset& d, const CausalResult& r, std::uint64_t seed, std::ostream& os) {
  const auto& boot = r.bootstrap;
  const auto& other = r.features.other;
  os << "quantity,moment,group,outcome,replicate,value\n";
  os << "method,,,,," << to_string(r.method) << '\n';
  os << "seed,,,,," << seed << '\n';
  os << "percentESS,,,,," << format_double(r.weights.percent_ess) << '\n';
  for (std::size_t m = 0; m < 3; ++m) {
    for (std::size_t z = 0; z < d.n_groups; ++z) {
      for (std::size_t l = 0; l < d.n_outcomes(); ++l) {
        os << "moments.ar," << kMomentNames[m] << ',' << group_name(d, z) << ',' << d.outcome_names[l] << ",,"
           << format_double(r.features.moments(kMoments[m], z, l)) << '\n';
      }
    }
  }
  for (std::size_t p = 0; p < other.pairs.size(); ++p) {
    for (std::size_t l = 0; l < d.n_outcomes(); ++l) {
      os << "otherFeatures.v,," << pair_name(d, other.pairs[p]) << ',' << d.outcome_names[l] << ",,"
         << format_double(other(l, p)) << '\n';
    }
  }
  for (std::size_t b = 0; b < boot.b_effective(); ++b) {
    const auto& f = boot.replicates[b];
    const std::size_t rep = boot.replicate_ids[b] + 1;
    for (std::size_t m = 0; m < 3; ++m) {
      for (std::size_t z = 0; z < d.n_groups; ++z) {
        for (std::size_t l = 0; l < d.n_outcomes(); ++l) {
          os << "collatedMoments.ar," << kMomentNames[m] << ',' << group_name(d, z) << ',' << d.outcome_names[l]
             << ',' << rep << ',' << format_double(f.moments(kMoments[m], z, l)) << '\n';
        }
      }
    }
    for (std::size_t p = 0; p < other.pairs.size(); ++p) {
      for (std::size_t l = 0; l < d.n_outcomes(); ++l) {
        os << "collatedOtherFeatures.mt,," << pair_name(d, other.pairs[p]) << ',' << d.outcome_names[l] << ','
           << rep << ',' << format_double(f.other(l, p)) << '\n';
      }
    }
    os << "collatedESS,,,," << rep << ',' << format_double(boot.collated_ess[b]) << '\n';
  }
}

int cmd_estimate(const CommonArgs& a, std::ostream& out, std::ostream& err) {
  const Method method = parse_method(a.method);
  const Dataset d = load_dataset(a.input, a.schema);
  if (a.B < 1) throw ValidationError("--B must be at least 1");
  CausalOptions opts;
  opts.balancing = balancing_options(a, method);
  opts.B = a.B;
  opts.stratified = a.stratified;
  opts.threads = a.threads;
  const auto config = data_config("estimate", a);
  err << "config: " << config.dump() << '\n';
  const CausalResult res = causal_estimate(d, opts);
  if (res.bootstrap.n_failed > 0) {
    err << "warning: " << res.bootstrap.n_failed << " of " << res.bootstrap.n_requested
        << " bootstrap replicates failed and were excluded\n";
  }

  write_to(a.output, out, [&](std::ostream& os) {
    if (a.format == "csv") {
      estimate_csv(d, res, a.seed, os);
    } else {
      os << estimate_json(d, res, config, a.seed).dump(2) << '\n';
    }
  });
  const bool output_is_file = !a.output.empty() && a.output != "-";
  if (!a.report.empty()) {
    write_to(a.report, out, [&](std::ostream& os) { write_report(d, res, a.seed, os); });
  } else if (output_is_file) {
    write_report(d, res, a.seed, out);
  }
  return kExitOk;
}

// ---- simulate / study ----------------------------------------------------

SimConfig resolve_sim_config(SimArgs& s, std::uint64_t seed) {
  SimConfig cfg = s.config;
  cfg.seed = seed;
  if (!s.base_covariates.empty()) cfg.base_covariates = load_matrix_csv(s.base_covariates);
  validate(cfg);
  return cfg;
}

int cmd_simulate(CommonArgs& a, SimArgs& s, std::ostream& out, std::ostream& err) {
  const SimConfig cfg = resolve_sim_config(s, a.seed);
  if (s.mc_size == 0) throw ValidationError("--mc-size must be positive");
  const auto config = sim_config("simulate", a, s);
  err << "config: " << config.dump() << '\n';

  const SimBase base = make_sim_base(cfg);
  Rng rng(derive_seed(a.seed, kStreamSimulation, 0));
  auto [data, truth] = gen_dataset(base, cfg, rng);

  Rng truth_rng(derive_seed(a.seed, kStreamTruth, 0));
  const std::vector<double> uniform_gamma(cfg.n_studies, 1.0 / static_cast<double>(cfg.n_studies));
  const std::vector<double> uniform_theta(cfg.n_groups, 1.0 / static_cast<double>(cfg.n_groups));
  const auto flexor_gamma =
      flexor_truth_gamma(base, truth, s.mc_size, a.num_random, a.gamma_min, a.gamma_max, truth_rng);
  ordered_json wate;
  for (Method m : {Method::FLEXOR, Method::IC, Method::IGO}) {
    const bool flexor = m == Method::FLEXOR;
    const auto t = true_wate(base, truth, m, flexor ? std::span<const double>(flexor_gamma) : uniform_gamma,
                             flexor ? std::span<const double>(truth.theta) : uniform_theta, s.mc_size, truth_rng);
    wate[std::string(to_string(m))] = {{"value", t.value}, {"mcSE", t.mc_se}};
  }

  write_to(a.output, out, [&](std::ostream& os) { write_dataset(data, os); });

  std::string truth_path = s.truth;
  if (truth_path.empty() && !a.output.empty() && a.output != "-") truth_path = a.output + ".truth.json";
  if (!truth_path.empty()) {
    ordered_json j;
    j["seed"] = a.seed;
    j["config"] = config;
    j["theta"] = truth.theta;
    j["pi"] = truth.pi;
    j["omega0"] = truth.omega0;
    j["omega1"] = truth.omega1;
    j["naturalMeanSum"] = truth.natural_mean_sum;
    j["sampleMeanSum"] = truth.sample_mean_sum;
    j["naturalGroup2Fraction"] = truth.natural_group2_fraction;
    j["tau2"] = truth.tau2;
    j["flexorTruthGamma"] = flexor_gamma;
    j["trueWATE"] = wate;
    write_to(truth_path, out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
  }
  return kExitOk;
}

int cmd_study(CommonArgs& a, SimArgs& s, std::ostream& out, std::ostream& err) {
  const SimConfig cfg = resolve_sim_config(s, a.seed);
  StudyOptions opts;
  opts.replicates = s.replicates;
  opts.B = a.B;
  opts.methods.clear();
  for (const auto& m : s.methods) opts.methods.push_back(parse_method(m));
  opts.num_random = a.num_random;
  opts.gamma_min = a.gamma_min;
  opts.gamma_max = a.gamma_max;
  opts.mc_size = s.mc_size;
  opts.threads = a.threads;
  opts.seed = a.seed;
  if (opts.B < 1) throw ValidationError("--B must be at least 1");
  if (opts.num_random < 1) throw ValidationError("--num-random must be at least 1");
  const auto config = sim_config("study", a, s);
  err << "config: " << config.dump() << '\n';

  const auto rows = run_study(cfg, opts);
  write_to(a.output, out, [&](std::ostream& os) { write_study_csv(rows, os); });

  for (Method m : opts.methods) {
    double ess = 0.0;
    double bias = 0.0;
    double sd = 0.0;
    std::size_t n = 0;
    for (const auto& r : rows) {
      if (r.method != m) continue;
      ess += r.percent_ess;
      bias += r.abs_bias;
      sd += r.boot_sd;
      ++n;
    }
    if (n == 0) continue;
    const double dn = static_cast<double>(n);
    err << to_string(m) << ": mean percent ESS " << round2(ess / dn) << ", mean abs bias " << round2(bias / dn)
        << ", mean bootstrap SD " << round2(sd / dn) << '\n';
  }
  return kExitOk;
}

}  // namespace

std::string round2(double value) {
  if (!std::isfinite(value)) return "NA";
  double r = std::round(value * 100.0) / 100.0;
  if (r == 0.0) r = 0.0;  // drop the sign of negative zero
  std::ostringstream os;
  os << std::setprecision(15) << r;
  return os.str();
}

std::string format_estimate(double est, double lo, double hi) {
  return round2(est) + " (" + round2(lo) + "," + round2(hi) + ")";
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Balancing weights and causal estimates for multi-study, multi-group data"};
  app.name(args.empty() ? "pseudopop" : args.front());
  app.require_subcommand(1);

  CommonArgs a;
  SimArgs s;

  auto* weights = app.add_subcommand("weights", "Estimate normalized balancing weights and percent ESS");
  add_data_options(weights, a);

  auto* estimate = app.add_subcommand("estimate", "Weighted group moments and mean differences with bootstrap");
  add_data_options(estimate, a);
  estimate->add_option("--B,--bootstrap", a.B, "Bootstrap replicates")->capture_default_str();
  estimate->add_flag("--stratified", a.stratified, "Resample within each (study, group) cell");
  estimate->add_option("--report", a.report, "Write the human-readable report here ('-' for standard output)");

  auto* simulate = app.add_subcommand("simulate", "Generate one synthetic dataset and its true effects");
  add_sim_options(simulate, s);
  simulate->add_option("--num-random", a.num_random, "FLEXOR restarts for the true pseudo-population")->capture_default_str();
  simulate->add_option("--gamma-min", a.gamma_min, "Lower bound on study masses")->capture_default_str();
  simulate->add_option("--gamma-max", a.gamma_max, "Upper bound on study masses")->capture_default_str();
  simulate->add_option("--truth", s.truth, "Truth JSON path (default: <output>.truth.json)");
  add_output_options(simulate, a);

  auto* study = app.add_subcommand("study", "Repeated simulation comparing FLEXOR, IC and IGO");
  add_sim_options(study, s);
  study->add_option("--replicates", s.replicates, "Simulated datasets")->capture_default_str();
  study->add_option("--B,--bootstrap", a.B, "Bootstrap replicates per dataset");
  study->add_option("--num-random", a.num_random, "FLEXOR random restarts")->capture_default_str();
  study->add_option("--gamma-min", a.gamma_min, "Lower bound on study masses")->capture_default_str();
  study->add_option("--gamma-max", a.gamma_max, "Upper bound on study masses")->capture_default_str();
  study->add_option("--methods", s.methods, "Methods to compare")->delimiter(',');
  add_output_options(study, a);

  std::vector<std::string> argv_rest(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(argv_rest.begin(), argv_rest.end());
  try {
    app.parse(argv_rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*weights) {
      resolve_seed(weights, a);
      return cmd_weights(a, out, err);
    }
    if (*estimate) {
      resolve_seed(estimate, a);
      return cmd_estimate(a, out, err);
    }
    if (*simulate) {
      resolve_seed(simulate, a);
      return cmd_simulate(a, s, out, err);
    }
    if (*study) {
      StudyOptions defaults;
      if (study->count("--B") == 0) a.B = defaults.B;
      resolve_seed(study, a);
      return cmd_study(a, s, out, err);
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace pseudopop::cli
