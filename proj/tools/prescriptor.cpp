#include "prescriptor/experiments.hpp"
#include "prescriptor/io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>

using namespace prescriptor;

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

int run(const std::string& command, const std::string& config_path, const std::string& out_dir,
        std::optional<std::uint64_t> seed, std::optional<std::size_t> threads, bool plot) {
  ExperimentConfig cfg;
  try {
    cfg = parse_config(read_text_file(config_path));
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    cfg.validate();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::runtime_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path out(out_dir);
  if (command == "gen-data") {
    const auto paths = cmd_gen_data(cfg, out_dir);
    std::cout << "wrote " << paths.size() << " datasets to " << out_dir << "\n";
    return 0;
  }
  const ExperimentReport report = run_command(command, cfg);
  const std::string csv_name = command + ".csv";
  write_text_file((out / csv_name).string(), report_to_csv(report.rows));
  write_text_file((out / (command + ".json")).string(), report_summary_json(report));
  if (plot) write_text_file((out / ("plot_" + command + ".py")).string(), plot_script(command, csv_name));

  std::cout << command << ": " << report.rows.size() << " rows in " << report.wall_time << " s\n";
  for (const auto& a : report.aggregate()) {
    std::cout << "  " << a.method << " N=" << a.n;
    if (a.pollution_dims) std::cout << " +" << a.pollution_dims << " dims";
    std::cout << " risk " << a.true_risk_mean << " (se " << a.true_risk_se << ")";
    if (command == "prescriptiveness") std::cout << " P " << a.P_mean << " (se " << a.P_se << ")";
    std::cout << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prescriptive analytics experiments on synthetic benchmark data"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  bool plot = false;

  const std::map<std::string, std::string> help = {
      {"gen-data", "write the synthetic training sets as CSV"},
      {"convergence", "true risk against sample size"},
      {"dimension-study", "true risk with uninformative covariates appended"},
      {"prescriptiveness", "out-of-sample coefficient of prescriptiveness"},
      {"censoring-study", "Kaplan-Meier corrected against naive weights under censoring"},
      {"erm-study", "linear decision rules against local prescriptions"},
  };
  for (const auto& name : command_names()) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--threads", threads, "worker threads (overrides the config)")->check(CLI::PositiveNumber);
    if (name != "gen-data") sub->add_flag("--emit-plot-script", plot, "also write a matplotlib script for the CSV");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, config_path, out_dir, seed, threads, plot);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
