#include "prescriptor/experiments.hpp"

#include "prescriptor/datagen.hpp"
#include "prescriptor/io.hpp"
#include "prescriptor/metrics.hpp"
#include "prescriptor/parallel.hpp"
#include "prescriptor/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <set>

namespace prescriptor {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const std::vector<std::string>& instance_names() {
  static const std::vector<std::string> names = {"portfolio", "shipment", "cap-newsvendor", "newsvendor"};
  return names;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() > suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

struct MethodLabel {
  std::string label;
  std::string base;
  bool naive = false;          // ignore censoring indicators
  bool unconstrained = false;  // erm without a norm penalty
};

MethodLabel resolve_label(const std::string& label) {
  MethodLabel m{label, label};
  if (label == "erm-unconstrained") {
    m.base = "erm";
    m.unconstrained = true;
  } else if (ends_with(label, "-naive")) {
    m.base = label.substr(0, label.size() - 6);
    m.naive = true;
  } else if (ends_with(label, "-km")) {
    m.base = label.substr(0, label.size() - 3);
  }
  const auto& names = method_names();
  if (std::find(names.begin(), names.end(), m.base) == names.end()) {
    throw ConfigError("unknown method: " + label);
  }
  return m;
}

struct Instance {
  Problem problem;
  FactorModelSpec model;
  std::optional<Eigen::Index> scalar_column;  // newsvendor uses one demand location

  Matrix outcomes(const Matrix& X, std::uint64_t seed) const {
    Matrix Y = generate_outcomes(model, X, seed);
    if (!scalar_column) return Y;
    return Matrix(Y.col(*scalar_column));
  }
  Matrix draws(const Vector& x, std::size_t m, std::uint64_t seed) const {
    Matrix Y = conditional_sample(model, x, m, seed);
    if (!scalar_column) return Y;
    return Matrix(Y.col(*scalar_column));
  }
};

Instance make_instance(const ExperimentConfig& cfg) {
  Instance inst;
  if (cfg.instance == "portfolio") {
    inst.problem = PortfolioProblem{};
    inst.model = FactorModelSpec::portfolio();
  } else if (cfg.instance == "shipment") {
    inst.problem = ShipmentProblem::benchmark();
    inst.model = FactorModelSpec::shipment();
  } else if (cfg.instance == "cap-newsvendor") {
    inst.model = FactorModelSpec::shipment();
    const Matrix X = simulate_arma(ArmaSpec::benchmark(), 1000, derive_seed(cfg.seed, stream::pilot));
    const Matrix Y = generate_outcomes(inst.model, X, derive_seed(cfg.seed, stream::pilot, 1));
    std::vector<double> totals(static_cast<std::size_t>(Y.rows()));
    for (Eigen::Index i = 0; i < Y.rows(); ++i) totals[static_cast<std::size_t>(i)] = Y.row(i).sum();
    std::sort(totals.begin(), totals.end());
    const auto idx = static_cast<std::size_t>(std::ceil(cfg.capacity_quantile * static_cast<double>(totals.size()))) - 1;
    CapacitatedNewsvendorProblem p;
    p.d = static_cast<std::size_t>(Y.cols());
    p.capacity = std::max(totals[std::min(idx, totals.size() - 1)], 1e-9);
    inst.problem = p;
  } else if (cfg.instance == "newsvendor") {
    const CensoringConfig cc = cfg.censoring.value_or(CensoringConfig{});
    inst.problem = NewsvendorSpec{cc.tau};
    inst.model = FactorModelSpec::shipment();
    inst.scalar_column = static_cast<Eigen::Index>(cc.location);
  } else {
    throw ConfigError("unknown instance: " + cfg.instance);
  }
  return inst;
}

std::uint64_t cell_seed(const ExperimentConfig& cfg, std::size_t rep, std::size_t n) {
  return derive_seed(cfg.seed, 1000 + rep, n);
}

struct Cell {
  Matrix X;
  Matrix Y;
};

Cell training_cell(const Instance& inst, const ExperimentConfig& cfg, std::size_t rep, std::size_t n) {
  const std::uint64_t base = cell_seed(cfg, rep, n);
  Cell c;
  c.X = simulate_arma(ArmaSpec::benchmark(), n, derive_seed(base, stream::train_x));
  c.Y = inst.outcomes(c.X, derive_seed(base, stream::train_y));
  return c;
}

MethodParams method_params(const ExperimentConfig& cfg, const MethodLabel& m, std::uint64_t base, std::size_t dx) {
  MethodParams mp;
  mp.seed = base;
  mp.threads = cfg.threads;
  mp.erm.seed = derive_seed(base, stream::model);
  if (m.unconstrained) mp.erm.norm = NormSpec::unconstrained();
  auto it = cfg.method_params.find(m.label);
  if (it == cfg.method_params.end()) it = cfg.method_params.find(m.base);
  if (it == cfg.method_params.end()) return mp;
  const MethodOverride& o = it->second;
  if (o.k) mp.k = o.k;
  if (o.bandwidth) mp.bandwidth = o.bandwidth;
  if (o.kernel) mp.kernel = *o.kernel;
  if (o.standardize) mp.standardize = *o.standardize;
  if (o.trees || o.min_leaf || o.mtry) {
    ForestConfig fc = ForestConfig::defaults(dx);
    fc.seed = derive_seed(base, stream::model);
    if (o.trees) fc.trees = *o.trees;
    if (o.min_leaf) fc.tree.min_leaf = *o.min_leaf;
    if (o.mtry) fc.tree.mtry = *o.mtry;
    mp.forest = fc;
    TreeConfig tc;
    tc.seed = derive_seed(base, stream::model);
    if (o.min_leaf) tc.min_leaf = *o.min_leaf;
    mp.tree = tc;
  }
  if (o.iterations) mp.erm.iterations = *o.iterations;
  if (o.lambda_reg && mp.erm.norm.kind == NormSpec::Kind::frobenius_penalty) mp.erm.norm.lambda_reg = *o.lambda_reg;
  return mp;
}

double mean_cost(const Problem& problem, const Decision& d, const Matrix& Y) {
  CostEvaluator eval(problem);
  std::vector<double> c(static_cast<std::size_t>(Y.rows()));
  for (Eigen::Index i = 0; i < Y.rows(); ++i) c[static_cast<std::size_t>(i)] = eval(d, row_vector(Y, i));
  return pairwise_sum(c) / static_cast<double>(c.size());
}

// Fresh query points with common random draws of Y | x, shared by every
// method and by the full-information benchmark.
struct QuerySet {
  Matrix X;
  std::vector<Matrix> draws;
  double benchmark = std::nan("");
};

QuerySet make_queries(const Instance& inst, const ExperimentConfig& cfg) {
  const std::size_t q = cfg.query_points;
  QuerySet qs;
  qs.X.resize(static_cast<Eigen::Index>(q), 3);
  qs.draws.resize(q);
  std::vector<double> oracle(q, 0.0);
  parallel_for(q, cfg.threads, [&](std::size_t i) {
    const Matrix x = simulate_arma(ArmaSpec::benchmark(), 1, derive_seed(cfg.seed, stream::query_x, i));
    qs.X.row(static_cast<Eigen::Index>(i)) = x.row(0);
    qs.draws[i] = inst.draws(row_vector(x, 0), cfg.oracle_m, derive_seed(cfg.seed, stream::query_draws, i));
    if (cfg.oracle) oracle[i] = mean_cost(inst.problem, solve_saa(inst.problem, qs.draws[i]).decision, qs.draws[i]);
  });
  if (cfg.oracle) qs.benchmark = pairwise_sum(oracle) / static_cast<double>(q);
  return qs;
}

double true_risk(const Prescription& p, const Matrix& Xq, const QuerySet& qs, std::size_t threads) {
  const auto q = static_cast<std::size_t>(Xq.rows());
  std::vector<double> per(q);
  parallel_for(q, threads, [&](std::size_t i) {
    const auto r = static_cast<Eigen::Index>(i);
    per[i] = mean_cost(p.problem(), p.prescribe(row_vector(Xq, r)), qs.draws[i]);
  });
  return pairwise_sum(per) / static_cast<double>(q);
}

std::vector<MethodLabel> labels_for(const std::string& command, const ExperimentConfig& cfg) {
  std::vector<std::string> names = cfg.methods.empty() ? default_methods(command, cfg.instance) : cfg.methods;
  std::vector<MethodLabel> out;
  for (const auto& n : names) out.push_back(resolve_label(n));
  return out;
}

ExperimentReport true_risk_study(const std::string& command, const ExperimentConfig& cfg,
                                 const std::vector<std::size_t>& pollution) {
  cfg.validate();
  const auto t_start = Clock::now();
  ExperimentReport report;
  report.command = command;
  report.config = cfg;
  const Instance inst = make_instance(cfg);
  const auto labels = labels_for(command, cfg);
  const QuerySet qs = make_queries(inst, cfg);

  std::vector<Matrix> query_x;
  for (std::size_t p : pollution) query_x.push_back(pollute_features(qs.X, p, derive_seed(cfg.seed, stream::query_pollution, p)));

  for (std::size_t n : cfg.sample_sizes) {
    for (std::size_t rep = 0; rep < cfg.replications; ++rep) {
      const Cell cell = training_cell(inst, cfg, rep, n);
      const std::uint64_t base = cell_seed(cfg, rep, n);
      for (std::size_t pi = 0; pi < pollution.size(); ++pi) {
        const std::size_t p = pollution[pi];
        const Matrix X = pollute_features(cell.X, p, derive_seed(base, stream::pollution, p));
        for (const auto& m : labels) {
          const auto t0 = Clock::now();
          const Prescription pr = make_prescription(m.base, method_params(cfg, m, base, static_cast<std::size_t>(X.cols())),
                                                    TrainingData{X, cell.Y, std::nullopt}, inst.problem);
          ExperimentRow row;
          row.method = m.label;
          row.n = n;
          row.replication = rep;
          row.pollution_dims = p;
          row.true_risk = true_risk(pr, query_x[pi], qs, cfg.threads);
          row.uncertified = pr.uncertified_count();
          row.full_info_risk = qs.benchmark;
          row.P = std::nan("");
          row.wall_time = seconds_since(t0);
          report.rows.push_back(std::move(row));
        }
      }
    }
  }
  report.wall_time = seconds_since(t_start);
  return report;
}

std::size_t get_count(const json& j, const char* key) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) throw ConfigError(std::string(key) + " must be an integer");
  if (j.is_number_integer() && j.get<long long>() < 0) throw ConfigError(std::string(key) + " must be nonnegative");
  return j.get<std::size_t>();
}

double get_real(const json& j, const char* key) {
  if (!j.is_number()) throw ConfigError(std::string(key) + " must be a number");
  return j.get<double>();
}

std::vector<std::size_t> get_counts(const json& j, const char* key) {
  std::vector<std::size_t> out;
  if (j.is_array()) {
    for (const auto& e : j) out.push_back(get_count(e, key));
  } else {
    out.push_back(get_count(j, key));
  }
  return out;
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (std::find(instance_names().begin(), instance_names().end(), instance) == instance_names().end()) {
    throw ConfigError("unknown instance: " + instance);
  }
  for (const auto& m : methods) resolve_label(m);
  if (sample_sizes.empty()) throw ConfigError("sample_sizes must be nonempty");
  for (std::size_t i = 0; i < sample_sizes.size(); ++i) {
    if (sample_sizes[i] < 2) throw ConfigError("sample sizes must be at least 2");
    if (i > 0 && sample_sizes[i] <= sample_sizes[i - 1]) throw ConfigError("sample_sizes must be strictly ascending");
  }
  if (replications < 1) throw ConfigError("replications must be at least 1");
  if (pollution_dims.empty()) throw ConfigError("pollution_dims must be nonempty");
  if (oracle_m < 1) throw ConfigError("oracle_m must be at least 1");
  if (validation_size < 1) throw ConfigError("validation_size must be at least 1");
  if (query_points < 1) throw ConfigError("query_points must be at least 1");
  if (threads < 1) throw ConfigError("threads must be at least 1");
  if (!(capacity_quantile > 0.0 && capacity_quantile <= 1.0)) throw ConfigError("capacity_quantile must lie in (0, 1]");
  if (censoring) {
    if (!(censoring->rate >= 0.0 && censoring->rate < 1.0)) throw ConfigError("censoring rate must lie in [0, 1)");
    if (!(censoring->tau > 0.0 && censoring->tau < 1.0)) throw ConfigError("tau must lie in (0, 1)");
    if (censoring->spread && !(*censoring->spread > 0.0)) throw ConfigError("censoring spread must be positive");
    if (censoring->location >= 12) throw ConfigError("censoring location must be below 12");
  }
  for (const auto& [label, o] : method_params) {
    resolve_label(label);
    if (o.k && *o.k < 1) throw ConfigError("k must be at least 1");
    if (o.bandwidth && !(*o.bandwidth > 0.0)) throw ConfigError("bandwidth must be positive");
    if (o.trees && *o.trees < 1) throw ConfigError("trees must be at least 1");
    if (o.min_leaf && *o.min_leaf < 1) throw ConfigError("min_leaf must be at least 1");
    if (o.iterations && *o.iterations < 1) throw ConfigError("iterations must be at least 1");
  }
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j, {"instance", "methods", "sample_sizes", "replications", "pollution_dims", "censoring", "seed",
                     "oracle_m", "oracle", "validation_size", "query_points", "threads", "capacity_quantile",
                     "method_params"},
                 "config");
  ExperimentConfig c;
  try {
    if (j.contains("instance")) c.instance = j.at("instance").get<std::string>();
    if (j.contains("methods")) c.methods = j.at("methods").get<std::vector<std::string>>();
    if (j.contains("sample_sizes")) c.sample_sizes = get_counts(j.at("sample_sizes"), "sample_sizes");
    if (j.contains("replications")) c.replications = get_count(j.at("replications"), "replications");
    if (j.contains("pollution_dims")) c.pollution_dims = get_counts(j.at("pollution_dims"), "pollution_dims");
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("oracle_m")) c.oracle_m = get_count(j.at("oracle_m"), "oracle_m");
    if (j.contains("oracle")) c.oracle = j.at("oracle").get<bool>();
    if (j.contains("validation_size")) c.validation_size = get_count(j.at("validation_size"), "validation_size");
    if (j.contains("query_points")) c.query_points = get_count(j.at("query_points"), "query_points");
    if (j.contains("threads")) c.threads = get_count(j.at("threads"), "threads");
    if (j.contains("capacity_quantile")) c.capacity_quantile = get_real(j.at("capacity_quantile"), "capacity_quantile");
    if (j.contains("censoring") && !j.at("censoring").is_null()) {
      const json& cj = j.at("censoring");
      if (!cj.is_object()) throw ConfigError("censoring must be an object");
      reject_unknown(cj, {"rate", "spread", "tau", "location"}, "censoring");
      CensoringConfig cc;
      if (cj.contains("rate")) cc.rate = get_real(cj.at("rate"), "rate");
      if (cj.contains("spread") && !cj.at("spread").is_null()) cc.spread = get_real(cj.at("spread"), "spread");
      if (cj.contains("tau")) cc.tau = get_real(cj.at("tau"), "tau");
      if (cj.contains("location")) cc.location = get_count(cj.at("location"), "location");
      c.censoring = cc;
    }
    if (j.contains("method_params")) {
      const json& mj = j.at("method_params");
      if (!mj.is_object()) throw ConfigError("method_params must be an object");
      for (auto it = mj.begin(); it != mj.end(); ++it) {
        const json& o = it.value();
        if (!o.is_object()) throw ConfigError("method_params." + it.key() + " must be an object");
        reject_unknown(o, {"k", "bandwidth", "kernel", "trees", "min_leaf", "mtry", "iterations", "lambda_reg", "standardize"},
                       "method_params." + it.key());
        MethodOverride mo;
        if (o.contains("k")) mo.k = get_count(o.at("k"), "k");
        if (o.contains("bandwidth")) mo.bandwidth = get_real(o.at("bandwidth"), "bandwidth");
        if (o.contains("kernel")) {
          try {
            mo.kernel = kernel_from_name(o.at("kernel").get<std::string>());
          } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
          }
        }
        if (o.contains("trees")) mo.trees = get_count(o.at("trees"), "trees");
        if (o.contains("min_leaf")) mo.min_leaf = get_count(o.at("min_leaf"), "min_leaf");
        if (o.contains("mtry")) mo.mtry = get_count(o.at("mtry"), "mtry");
        if (o.contains("iterations")) mo.iterations = get_count(o.at("iterations"), "iterations");
        if (o.contains("lambda_reg")) mo.lambda_reg = get_real(o.at("lambda_reg"), "lambda_reg");
        if (o.contains("standardize")) mo.standardize = o.at("standardize").get<bool>();
        c.method_params[it.key()] = mo;
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config value: ") + e.what());
  }
  c.validate();
  return c;
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["instance"] = c.instance;
  j["methods"] = c.methods;
  j["sample_sizes"] = c.sample_sizes;
  j["replications"] = c.replications;
  j["pollution_dims"] = c.pollution_dims;
  j["seed"] = c.seed;
  j["oracle_m"] = c.oracle_m;
  j["oracle"] = c.oracle;
  j["validation_size"] = c.validation_size;
  j["query_points"] = c.query_points;
  j["threads"] = c.threads;
  j["capacity_quantile"] = c.capacity_quantile;
  if (c.censoring) {
    json cj{{"rate", c.censoring->rate}, {"tau", c.censoring->tau}, {"location", c.censoring->location}};
    cj["spread"] = c.censoring->spread ? json(*c.censoring->spread) : json(nullptr);
    j["censoring"] = cj;
  }
  json mp = json::object();
  for (const auto& [label, o] : c.method_params) {
    json e = json::object();
    if (o.k) e["k"] = *o.k;
    if (o.bandwidth) e["bandwidth"] = *o.bandwidth;
    if (o.kernel) e["kernel"] = kernel_name(*o.kernel);
    if (o.trees) e["trees"] = *o.trees;
    if (o.min_leaf) e["min_leaf"] = *o.min_leaf;
    if (o.mtry) e["mtry"] = *o.mtry;
    if (o.iterations) e["iterations"] = *o.iterations;
    if (o.lambda_reg) e["lambda_reg"] = *o.lambda_reg;
    if (o.standardize) e["standardize"] = *o.standardize;
    mp[label] = e;
  }
  j["method_params"] = mp;
  return j.dump(2);
}

bool ExperimentRow::operator==(const ExperimentRow& o) const {
  auto same = [](double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; };
  return method == o.method && n == o.n && replication == o.replication && pollution_dims == o.pollution_dims &&
         same(censoring_rate, o.censoring_rate) && same(true_risk, o.true_risk) &&
         same(full_info_risk, o.full_info_risk) && same(P, o.P);
}

std::vector<AggregateRow> ExperimentReport::aggregate() const {
  std::vector<AggregateRow> out;
  std::vector<std::tuple<std::string, std::size_t, std::size_t>> keys;
  for (const auto& r : rows) {
    auto key = std::make_tuple(r.method, r.n, r.pollution_dims);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  for (const auto& [method, n, p] : keys) {
    std::vector<double> risk, gap, P;
    for (const auto& r : select(method, n, p)) {
      risk.push_back(r.true_risk);
      gap.push_back(r.true_risk - r.full_info_risk);
      P.push_back(r.P);
    }
    AggregateRow a;
    a.method = method;
    a.n = n;
    a.pollution_dims = p;
    a.count = risk.size();
    const MeanSe mr = mean_se(risk), mg = mean_se(gap), mp = mean_se(P);
    a.true_risk_mean = mr.mean;
    a.true_risk_se = mr.se;
    a.gap_mean = mg.mean;
    a.gap_se = mg.se;
    a.P_mean = mp.mean;
    a.P_se = mp.se;
    out.push_back(a);
  }
  return out;
}

std::vector<ExperimentRow> ExperimentReport::select(const std::string& method, std::size_t n,
                                                    std::size_t pollution) const {
  std::vector<ExperimentRow> out;
  for (const auto& r : rows) {
    if (r.method == method && r.n == n && r.pollution_dims == pollution) out.push_back(r);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ExperimentRow& a, const ExperimentRow& b) { return a.replication < b.replication; });
  return out;
}

std::vector<std::string> default_methods(const std::string& command, const std::string& instance) {
  if (command == "censoring-study") return {"knn-naive", "knn-km"};
  if (command == "erm-study") return {"erm", "erm-unconstrained", "knn", "rf", "saa"};
  if (command == "dimension-study") return {"knn", "kr", "rf"};
  if (command == "prescriptiveness") return {"knn", "kr", "cart", "rf", "saa"};
  (void)instance;
  return {"point-pred", "saa", "knn", "kr", "cart", "rf"};
}

std::vector<std::string> cmd_gen_data(const ExperimentConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  const Instance inst = make_instance(cfg);
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> paths;
  const std::size_t p = cfg.pollution_dims.front();
  for (std::size_t n : cfg.sample_sizes) {
    for (std::size_t rep = 0; rep < cfg.replications; ++rep) {
      const Cell cell = training_cell(inst, cfg, rep, n);
      const Matrix X = pollute_features(cell.X, p, derive_seed(cell_seed(cfg, rep, n), stream::pollution, p));
      const std::string path =
          (std::filesystem::path(out_dir) / (cfg.instance + "_N" + std::to_string(n) + "_rep" + std::to_string(rep) + ".csv"))
              .string();
      write_text_file(path, dataset_to_csv(X, cell.Y));
      paths.push_back(path);
    }
  }
  return paths;
}

ExperimentReport cmd_convergence(const ExperimentConfig& cfg) {
  return true_risk_study("convergence", cfg, {cfg.pollution_dims.front()});
}

ExperimentReport cmd_dimension_study(const ExperimentConfig& cfg) {
  std::vector<std::size_t> dims = cfg.pollution_dims;
  if (dims.size() == 1 && dims.front() == 0) dims = {0, 4, 16, 64};
  return true_risk_study("dimension-study", cfg, dims);
}

ExperimentReport cmd_erm_study(const ExperimentConfig& cfg) {
  return true_risk_study("erm-study", cfg, {cfg.pollution_dims.front()});
}

ExperimentReport cmd_prescriptiveness(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t_start = Clock::now();
  ExperimentReport report;
  report.command = "prescriptiveness";
  report.config = cfg;
  const Instance inst = make_instance(cfg);
  const auto labels = labels_for(report.command, cfg);
  const std::size_t p = cfg.pollution_dims.front();
  for (std::size_t n : cfg.sample_sizes) {
    for (std::size_t rep = 0; rep < cfg.replications; ++rep) {
      const Cell cell = training_cell(inst, cfg, rep, n);
      const std::uint64_t base = cell_seed(cfg, rep, n);
      const Matrix X = pollute_features(cell.X, p, derive_seed(base, stream::pollution, p));
      const Matrix Xv_raw = simulate_arma(ArmaSpec::benchmark(), cfg.validation_size, derive_seed(base, stream::validation_x));
      const Matrix Yv = inst.outcomes(Xv_raw, derive_seed(base, stream::validation_y));
      const Matrix Xv = pollute_features(Xv_raw, p, derive_seed(base, stream::query_pollution, p));

      const MethodLabel saa_label = resolve_label("saa");
      const Prescription saa = make_prescription("saa", method_params(cfg, saa_label, base, static_cast<std::size_t>(X.cols())),
                                                 TrainingData{X, cell.Y, std::nullopt}, inst.problem);
      const double saa_risk = estimate_risk(saa, Xv, Yv, cfg.threads);
      const double perfect = perfect_foresight_risk(inst.problem, Yv, cfg.threads);
      for (const auto& m : labels) {
        const auto t0 = Clock::now();
        double risk = saa_risk;
        std::size_t uncertified = 0;
        if (m.base != "saa") {
          const Prescription pr = make_prescription(m.base, method_params(cfg, m, base, static_cast<std::size_t>(X.cols())),
                                                    TrainingData{X, cell.Y, std::nullopt}, inst.problem);
          risk = estimate_risk(pr, Xv, Yv, cfg.threads);
          uncertified = pr.uncertified_count();
        }
        ExperimentRow row;
        row.method = m.label;
        row.n = n;
        row.replication = rep;
        row.pollution_dims = p;
        row.true_risk = risk;
        row.full_info_risk = perfect;
        row.P = coefficient_of_prescriptiveness(risk, saa_risk, perfect);
        row.uncertified = uncertified;
        row.wall_time = seconds_since(t0);
        report.rows.push_back(std::move(row));
      }
    }
  }
  report.wall_time = seconds_since(t_start);
  return report;
}

ExperimentReport cmd_censoring_study(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.instance != "newsvendor") throw ConfigError("censoring-study requires the newsvendor instance");
  const auto t_start = Clock::now();
  ExperimentReport report;
  report.command = "censoring-study";
  report.config = cfg;
  const CensoringConfig cc = cfg.censoring.value_or(CensoringConfig{});
  const Instance inst = make_instance(cfg);
  const auto labels = labels_for(report.command, cfg);

  // Threshold V ~ N(mu, spread^2), mu calibrated on a pilot sample.
  const Matrix Xp = simulate_arma(ArmaSpec::benchmark(), 2000, derive_seed(cfg.seed, stream::pilot));
  const Vector yp = inst.outcomes(Xp, derive_seed(cfg.seed, stream::pilot, 1)).col(0);
  const double sd = std::sqrt((yp.array() - yp.mean()).square().sum() / static_cast<double>(yp.size() - 1));
  const double spread = cc.spread.value_or(sd > 0.0 ? sd : 1.0);
  const double mu = cc.rate > 0.0 ? calibrate_threshold_mean(yp, spread, cc.rate, derive_seed(cfg.seed, stream::pilot, 2)) : 0.0;

  const QuerySet qs = make_queries(inst, cfg);
  for (std::size_t n : cfg.sample_sizes) {
    for (std::size_t rep = 0; rep < cfg.replications; ++rep) {
      const Cell cell = training_cell(inst, cfg, rep, n);
      const std::uint64_t base = cell_seed(cfg, rep, n);
      Matrix U = cell.Y;
      std::vector<std::uint8_t> delta(n, 1);
      if (cc.rate > 0.0) {
        const CensoredDataset cd = censor_dataset(Dataset{cell.X, cell.Y, base, ""}, mu, spread, derive_seed(base, stream::censoring));
        U = Matrix(cd.U);
        delta = cd.delta;
      }
      const double rate = static_cast<double>(std::count(delta.begin(), delta.end(), std::uint8_t{0})) / static_cast<double>(n);
      for (const auto& m : labels) {
        const auto t0 = Clock::now();
        TrainingData data{cell.X, U, std::nullopt};
        if (!m.naive) data.delta = delta;
        const Prescription pr =
            make_prescription(m.base, method_params(cfg, m, base, static_cast<std::size_t>(cell.X.cols())), data, inst.problem);
        ExperimentRow row;
        row.method = m.label;
        row.n = n;
        row.replication = rep;
        row.censoring_rate = rate;
        row.true_risk = true_risk(pr, qs.X, qs, cfg.threads);
        row.uncertified = pr.uncertified_count();
        row.full_info_risk = qs.benchmark;
        row.P = std::nan("");
        row.wall_time = seconds_since(t0);
        report.rows.push_back(std::move(row));
      }
    }
  }
  report.wall_time = seconds_since(t_start);
  return report;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"gen-data", "convergence", "dimension-study", "prescriptiveness",
                                                 "censoring-study", "erm-study"};
  return names;
}

ExperimentReport run_command(const std::string& command, const ExperimentConfig& config) {
  if (command == "convergence") return cmd_convergence(config);
  if (command == "dimension-study") return cmd_dimension_study(config);
  if (command == "prescriptiveness") return cmd_prescriptiveness(config);
  if (command == "censoring-study") return cmd_censoring_study(config);
  if (command == "erm-study") return cmd_erm_study(config);
  throw ConfigError("unknown command: " + command);
}

}  // namespace prescriptor
