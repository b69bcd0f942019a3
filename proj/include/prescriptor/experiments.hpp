#pragma once

#include "prescriptor/common.hpp"
#include "prescriptor/problems.hpp"
#include "prescriptor/solve.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace prescriptor {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CensoringConfig {
  double rate = 0.3;                  // target censoring rate of the threshold
  std::optional<double> spread;       // sd of V; defaults to the pilot demand sd
  double tau = 0.7;                   // newsvendor quantile
  std::size_t location = 0;           // demand location used as the scalar outcome
};

// Per-method overrides of MethodParams, keyed by method label.
struct MethodOverride {
  std::optional<std::size_t> k;
  std::optional<double> bandwidth;
  std::optional<KernelKind> kernel;
  std::optional<std::size_t> trees;
  std::optional<std::size_t> min_leaf;
  std::optional<std::size_t> mtry;
  std::optional<std::size_t> iterations;  // erm
  std::optional<double> lambda_reg;       // erm
  std::optional<bool> standardize;
};

struct ExperimentConfig {
  std::string instance = "portfolio";  // portfolio | shipment | cap-newsvendor | newsvendor
  std::vector<std::string> methods;
  std::vector<std::size_t> sample_sizes = {64, 256, 1024, 4096};
  std::size_t replications = 10;
  std::vector<std::size_t> pollution_dims = {0};
  std::optional<CensoringConfig> censoring;
  std::uint64_t seed = 1;
  std::size_t oracle_m = 20000;
  bool oracle = true;  // compute the full-information benchmark per query point
  std::size_t validation_size = 200;
  std::size_t query_points = 50;
  std::size_t threads = 1;
  double capacity_quantile = 0.6;  // cap-newsvendor K as a quantile of pilot total demand
  std::map<std::string, MethodOverride> method_params;

  // Throws ConfigError on invalid fields.
  void validate() const;
};

// Parses the JSON config format documented in the README. Unknown keys and
// malformed values raise ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
std::string config_to_json(const ExperimentConfig& config);

struct ExperimentRow {
  std::string method;
  std::size_t n = 0;
  std::size_t replication = 0;
  std::size_t pollution_dims = 0;
  double censoring_rate = 0.0;
  double true_risk = 0.0;
  // Full-information benchmark for true-risk studies; perfect-foresight
  // validation risk for the prescriptiveness study. NaN when not computed.
  double full_info_risk = 0.0;
  double P = 0.0;  // NaN outside the prescriptiveness study
  double wall_time = 0.0;  // seconds; kept out of the CSV
  std::size_t uncertified = 0;  // branch-and-bound solves stopped at the node limit; JSON only

  bool operator==(const ExperimentRow& other) const;
};

struct AggregateRow {
  std::string method;
  std::size_t n = 0;
  std::size_t pollution_dims = 0;
  double true_risk_mean = 0.0, true_risk_se = 0.0;
  double gap_mean = 0.0, gap_se = 0.0;  // true_risk - full_info_risk
  double P_mean = 0.0, P_se = 0.0;
  std::size_t count = 0;
};

struct ExperimentReport {
  std::string command;
  ExperimentConfig config;
  std::vector<ExperimentRow> rows;
  double wall_time = 0.0;

  std::vector<AggregateRow> aggregate() const;
  // Rows matching (method, n, pollution), ordered by replication.
  std::vector<ExperimentRow> select(const std::string& method, std::size_t n, std::size_t pollution = 0) const;
};

// Method labels accepted in configs: every name of method_names(), plus
// "erm-unconstrained" and, for the censoring study, "<method>-naive" and
// "<method>-km".
std::vector<std::string> default_methods(const std::string& command, const std::string& instance);

// Writes {instance}_N{N}_rep{r}.csv for every (N, r) into out_dir and
// returns the file paths.
std::vector<std::string> cmd_gen_data(const ExperimentConfig& config, const std::string& out_dir);

ExperimentReport cmd_convergence(const ExperimentConfig& config);
// Sweeps config.pollution_dims (default {0, 4, 16, 64}).
ExperimentReport cmd_dimension_study(const ExperimentConfig& config);
ExperimentReport cmd_prescriptiveness(const ExperimentConfig& config);
ExperimentReport cmd_censoring_study(const ExperimentConfig& config);
ExperimentReport cmd_erm_study(const ExperimentConfig& config);

const std::vector<std::string>& command_names();
ExperimentReport run_command(const std::string& command, const ExperimentConfig& config);

}  // namespace prescriptor
