#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"

#include "gmix/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "Saddle-point solver and simulation harness for L1-regularized "
      "Gaussian-mixture classification"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> threads;
  app.add_option("--config", config_path,
                 "JSON config file; defaults apply when omitted");
  app.add_option("--seed", seed, "override the master seed");
  app.add_option("--out-dir", out_dir, "override the output directory");
  app.add_option("--threads", threads, "override the worker thread count");

  auto* cmd_solve = app.add_subcommand(
      "solve", "one fixed-point solve of the designated cell; prints the "
               "order parameters and writes trace.csv");
  auto* cmd_precision = app.add_subcommand(
      "precision", "theoretical vs empirical precision over the grid "
                   "(precision.csv)");
  auto* cmd_coverage = app.add_subcommand(
      "coverage", "per-replicate confidence-interval coverage (coverage.csv)");
  auto* cmd_power = app.add_subcommand(
      "power", "theoretical vs empirical power over the grid (power.csv)");
  auto* cmd_histogram = app.add_subcommand(
      "histogram", "per-coordinate estimates for one dataset (histogram.csv)");
  auto* cmd_all =
      app.add_subcommand("all", "full campaign: every CSV artifact");

  CLI11_PARSE(app, argc, argv);

  gmix::ExperimentConfig config;
  try {
    if (!config_path.empty()) {
      config = gmix::load_config(config_path);
    }
    if (seed) config.seed = *seed;
    if (out_dir) config.out_dir = *out_dir;
    if (threads) config.threads = *threads;
    gmix::validate_config(config);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }

  int failed_cells = 0;
  try {
    if (cmd_solve->parsed()) {
      failed_cells = gmix::run_solve(config);
    } else if (cmd_precision->parsed()) {
      failed_cells = gmix::run_precision_experiment(config);
    } else if (cmd_coverage->parsed()) {
      failed_cells = gmix::run_coverage_experiment(config);
    } else if (cmd_power->parsed()) {
      failed_cells = gmix::run_power_experiment(config);
    } else if (cmd_histogram->parsed()) {
      failed_cells = gmix::run_histogram_experiment(config);
    } else if (cmd_all->parsed()) {
      failed_cells = gmix::run_all(config);
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return failed_cells > 0 ? 2 : 0;
}
