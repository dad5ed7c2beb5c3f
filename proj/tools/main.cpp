#include "ekisel/experiments/io.hpp"
#include "ekisel/experiments/runner.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

int run_oracle_check();

namespace {

using namespace ekisel;

struct CommonFlags {
  std::string config_path;
  std::string fidelity = "desk";
  std::string out_dir;
  std::uint64_t seed = 0;
  int parallel = -1;
  int experiments = 0;
  bool seed_set = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path,
                  "JSON config file (defaults to built-in settings)");
  cmd->add_option("--fidelity", flags.fidelity,
                  "Built-in settings tier (ignored with --config)")
      ->check(CLI::IsMember({"desk", "paper"}));
  cmd->add_option("--seed", flags.seed, "Override the master seed")
      ->each([&](const std::string&) { flags.seed_set = true; });
  cmd->add_option("--out", flags.out_dir, "Override the output directory");
  cmd->add_option("--parallel", flags.parallel,
                  "Worker threads (0 = hardware concurrency)");
  cmd->add_option("--experiments", flags.experiments,
                  "Override the number of problem draws per cell");
}

int run_family_command(Family family, const CommonFlags& flags) {
  ExperimentConfig config;
  try {
    if (flags.config_path.empty()) {
      config = default_config(family, fidelity_from_name(flags.fidelity));
    } else {
      config = load_config(flags.config_path);
      if (config.family != family)
        throw ConfigFileError("config is for family \"" +
                              family_name(config.family) +
                              "\" but the subcommand expects \"" +
                              family_name(family) + "\"");
    }
  } catch (const ConfigFileError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  }
  if (flags.seed_set) config.seed = flags.seed;
  if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
  if (flags.parallel >= 0) config.parallelism = flags.parallel;
  if (flags.experiments > 0) config.experiment_count = flags.experiments;

  const auto t0 = std::chrono::steady_clock::now();
  FamilyRunResult result;
  try {
    result = run_family(config);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec) {
    std::cerr << "error: cannot create output directory " << config.out_dir
              << ": " << ec.message() << '\n';
    return 1;
  }
  const std::string stem = config.out_dir + "/" + family_name(family);
  write_outcomes_jsonl(result.outcomes, stem + "_outcomes.jsonl");
  write_aggregates_csv(result.aggregates, stem + "_aggregates.csv");
  save_config(config, stem + "_config.json");

  std::cout << format_aggregate_table(result.aggregates);
  int n_fail = 0;
  for (const VariantOutcome& out : result.outcomes) n_fail += out.ok ? 0 : 1;
  std::cout << result.outcomes.size() << " records (" << n_fail
            << " failed) in " << elapsed << " s; raw output: " << stem
            << "_outcomes.jsonl\n";
  return 0;  // partial failures are reported, not fatal
}

int run_tables_command(const std::string& in_path, const std::string& csv_path) {
  std::vector<VariantOutcome> outcomes;
  try {
    outcomes = read_outcomes_jsonl(in_path);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  }
  const auto rows = aggregate(outcomes);
  if (!csv_path.empty()) write_aggregates_csv(rows, csv_path);
  std::cout << format_aggregate_table(rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Subspace-selected ensemble Kalman inversion: experiment driver"};
  app.require_subcommand(1);

  CommonFlags linear_flags, algebraic_flags, darcy_flags;
  CLI::App* linear =
      app.add_subcommand("linear", "Random linear-Gaussian problems");
  add_common_flags(linear, linear_flags);
  CLI::App* algebraic = app.add_subcommand(
      "algebraic", "Sigmoid forward map with Gaussian prior");
  add_common_flags(algebraic, algebraic_flags);
  CLI::App* darcy = app.add_subcommand(
      "darcy", "Log-permeability inversion for 2-D Darcy flow");
  add_common_flags(darcy, darcy_flags);

  std::string tables_in, tables_csv;
  CLI::App* tables =
      app.add_subcommand("tables", "Re-aggregate saved raw records");
  tables->add_option("--in", tables_in, "Raw records (JSONL)")->required();
  tables->add_option("--csv", tables_csv, "Also write aggregates as CSV");

  CLI::App* oracle = app.add_subcommand(
      "oracle-check", "Run the cross-module consistency suite");

  CLI11_PARSE(app, argc, argv);

  if (linear->parsed()) return run_family_command(Family::Linear, linear_flags);
  if (algebraic->parsed())
    return run_family_command(Family::Algebraic, algebraic_flags);
  if (darcy->parsed()) return run_family_command(Family::Darcy, darcy_flags);
  if (tables->parsed()) return run_tables_command(tables_in, tables_csv);
  if (oracle->parsed()) return run_oracle_check() == 0 ? 0 : 1;
  return 1;
}
