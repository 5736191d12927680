#include "gmix/experiments.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <utility>

#include "json.hpp"

#include "gmix/csv.hpp"
#include "gmix/rng.hpp"
#include "gmix/stats.hpp"
#include "gmix/thread_pool.hpp"

namespace gmix {

namespace {

using nlohmann::json;

// Stable tags for seed derivation; independent of enum layout.
std::uint64_t structure_tag(CovarianceKind kind) {
  switch (kind) {
    case CovarianceKind::IID:
      return 1;
    case CovarianceKind::BlockDiagonal:
      return 2;
    case CovarianceKind::AR1:
      return 3;
    case CovarianceKind::Banded:
      return 4;
  }
  return 0;
}

// Per-stream tags under a cell seed.
constexpr std::uint64_t kStreamTruth = 1;
constexpr std::uint64_t kStreamSolver = 2;
constexpr std::uint64_t kStreamTrain = 3;
constexpr std::uint64_t kStreamTest = 4;

double require_number(const json& v, const std::string& key) {
  if (!v.is_number()) {
    throw std::invalid_argument("config: " + key + " must be a number");
  }
  return v.get<double>();
}

int require_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) {
    throw std::invalid_argument("config: " + key + " must be an integer");
  }
  return v.get<int>();
}

std::string require_string(const json& v, const std::string& key) {
  if (!v.is_string()) {
    throw std::invalid_argument("config: " + key + " must be a string");
  }
  return v.get<std::string>();
}

std::vector<double> require_number_array(const json& v, const std::string& key) {
  if (!v.is_array() || v.empty()) {
    throw std::invalid_argument("config: " + key + " must be a non-empty array");
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& item : v) {
    out.push_back(require_number(item, key));
  }
  return out;
}

void parse_solver_block(const json& block, SolverOptions& solver) {
  for (const auto& [key, value] : block.items()) {
    if (key == "mc_samples") {
      solver.mc_samples = require_int(value, "solver.mc_samples");
    } else if (key == "quad_nodes") {
      solver.quad_nodes = require_int(value, "solver.quad_nodes");
    } else if (key == "damping") {
      solver.damping = require_number(value, "solver.damping");
    } else if (key == "tol") {
      solver.tol = require_number(value, "solver.tol");
    } else if (key == "mc_tol") {
      solver.mc_tol = require_number(value, "solver.mc_tol");
    } else if (key == "max_iters") {
      solver.max_iters = require_int(value, "solver.max_iters");
    } else if (key == "chunk_size") {
      solver.chunk_size = require_int(value, "solver.chunk_size");
    } else if (key == "penalty") {
      const std::string name = require_string(value, "solver.penalty");
      if (name == "l1") {
        solver.penalty = PenaltyKind::L1;
      } else if (name == "quadratic") {
        solver.penalty = PenaltyKind::Quadratic;
      } else {
        throw std::invalid_argument("config: unknown solver.penalty: " + name);
      }
    } else {
      throw std::invalid_argument("config: unknown solver key: " + key);
    }
  }
}

void parse_cell_block(const json& block, ExperimentConfig& config) {
  for (const auto& [key, value] : block.items()) {
    if (key == "structure") {
      config.cell_structure =
          parse_covariance_kind(require_string(value, "cell.structure"));
    } else if (key == "sparsity") {
      config.cell_sparsity = require_number(value, "cell.sparsity");
    } else if (key == "log_lambda") {
      config.cell_log_lambda = require_number(value, "cell.log_lambda");
    } else {
      throw std::invalid_argument("config: unknown cell key: " + key);
    }
  }
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig config;
  for (const auto& [key, value] : j.items()) {
    if (key == "structures") {
      if (!value.is_array() || value.empty()) {
        throw std::invalid_argument("config: structures must be a non-empty array");
      }
      config.structures.clear();
      for (const auto& item : value) {
        config.structures.push_back(
            parse_covariance_kind(require_string(item, "structures")));
      }
    } else if (key == "p") {
      config.p = require_int(value, "p");
    } else if (key == "alpha") {
      config.alpha = require_number(value, "alpha");
    } else if (key == "sigma2") {
      config.sigma2 = require_number(value, "sigma2");
    } else if (key == "rho") {
      config.rho = require_number(value, "rho");
    } else if (key == "band_value") {
      config.band_value = require_number(value, "band_value");
    } else if (key == "band_width") {
      config.band_width = require_int(value, "band_width");
    } else if (key == "mu_norm") {
      config.mu_norm = require_number(value, "mu_norm");
    } else if (key == "sparsity") {
      config.sparsity_levels = require_number_array(value, "sparsity");
    } else if (key == "log_lambda") {
      config.log_lambda_grid = require_number_array(value, "log_lambda");
    } else if (key == "replicates") {
      config.replicates = require_int(value, "replicates");
    } else if (key == "test_size") {
      config.test_size = require_int(value, "test_size");
    } else if (key == "level") {
      config.level = require_number(value, "level");
    } else if (key == "loss") {
      config.loss = parse_loss_kind(require_string(value, "loss"));
    } else if (key == "seed") {
      if (!value.is_number_unsigned() && !value.is_number_integer()) {
        throw std::invalid_argument("config: seed must be an integer");
      }
      config.seed = value.get<std::uint64_t>();
    } else if (key == "threads") {
      config.threads = require_int(value, "threads");
    } else if (key == "out_dir") {
      config.out_dir = require_string(value, "out_dir");
    } else if (key == "solver") {
      if (!value.is_object()) {
        throw std::invalid_argument("config: solver must be an object");
      }
      parse_solver_block(value, config.solver);
    } else if (key == "cell") {
      if (!value.is_object()) {
        throw std::invalid_argument("config: cell must be an object");
      }
      parse_cell_block(value, config);
    } else {
      throw std::invalid_argument("config: unknown key: " + key);
    }
  }
  validate_config(config);
  return config;
}

CovarianceModel model_for(const ExperimentConfig& config, CovarianceKind kind) {
  CovarianceModel model;
  model.kind = kind;
  model.p = config.p;
  model.sigma2 = config.sigma2;
  model.rho = config.rho;
  model.band_value = config.band_value;
  model.band_width = config.band_width;
  return model;
}

std::string sanitize_message(std::string msg) {
  for (char& c : msg) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return msg;
}

struct MeanCi {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Normal-approximation 95% interval for the replicate mean.
MeanCi replicate_mean_ci(const std::vector<double>& xs) {
  MeanCi out;
  out.mean = mean(xs);
  const double half = normal_quantile(0.975) * sample_sd(xs) /
                      std::sqrt(static_cast<double>(xs.size()));
  out.lo = out.mean - half;
  out.hi = out.mean + half;
  return out;
}

void ensure_out_dir(const ExperimentConfig& config) {
  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec) {
    throw std::invalid_argument("config: cannot create out_dir " +
                                config.out_dir + ": " + ec.message());
  }
}

std::string out_path(const ExperimentConfig& config, const char* name) {
  return (std::filesystem::path(config.out_dir) / name).string();
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("config: cannot read " + path);
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("config: " + path + ": " + e.what());
  }
  if (!j.is_object()) {
    throw std::invalid_argument("config: top level must be a JSON object");
  }
  try {
    return parse_config(j);
  } catch (const json::exception& e) {
    throw std::invalid_argument("config: " + path + ": " + e.what());
  }
}

void validate_config(const ExperimentConfig& config) {
  if (config.p < 2) {
    throw std::invalid_argument("config: p must be >= 2");
  }
  if (!(config.alpha > 0.0)) {
    throw std::invalid_argument("config: alpha must be positive");
  }
  if (std::lround(config.alpha * config.p) < 1) {
    throw std::invalid_argument("config: alpha * p rounds to an empty sample");
  }
  if (!(config.sigma2 > 0.0)) {
    throw std::invalid_argument("config: sigma2 must be positive");
  }
  if (std::abs(config.rho) >= 1.0) {
    throw std::invalid_argument("config: |rho| must be < 1");
  }
  if (config.band_width < 1) {
    throw std::invalid_argument("config: band_width must be >= 1");
  }
  if (!(config.mu_norm > 0.0)) {
    throw std::invalid_argument("config: mu_norm must be positive");
  }
  if (config.structures.empty()) {
    throw std::invalid_argument("config: structures must be non-empty");
  }
  for (CovarianceKind kind : config.structures) {
    if (kind == CovarianceKind::BlockDiagonal && config.p % 2 != 0) {
      throw std::invalid_argument("config: block structure needs even p");
    }
  }
  if (config.sparsity_levels.empty() || config.log_lambda_grid.empty()) {
    throw std::invalid_argument("config: sparsity and log_lambda grids must be non-empty");
  }
  for (double s : config.sparsity_levels) {
    if (!(s > 0.0 && s <= 1.0)) {
      throw std::invalid_argument("config: sparsity levels must lie in (0,1]");
    }
    if (std::lround(s * config.p) < 1) {
      throw std::invalid_argument("config: a sparsity level rounds to zero nonzeros");
    }
  }
  if (config.replicates < 2) {
    throw std::invalid_argument("config: replicates must be >= 2");
  }
  if (config.test_size < 0) {
    throw std::invalid_argument("config: test_size must be >= 0");
  }
  if (!(config.level > 0.0 && config.level < 1.0)) {
    throw std::invalid_argument("config: level must be in (0,1)");
  }
  if (config.threads < 1) {
    throw std::invalid_argument("config: threads must be >= 1");
  }
  if (!(config.cell_sparsity > 0.0 && config.cell_sparsity <= 1.0)) {
    throw std::invalid_argument("config: cell.sparsity must lie in (0,1]");
  }
}

std::uint64_t cell_seed(std::uint64_t master, const CellId& id) {
  return derive_seed(master, {structure_tag(id.structure),
                              std::bit_cast<std::uint64_t>(id.sparsity),
                              std::bit_cast<std::uint64_t>(id.log_lambda)});
}

CellContext solve_cell(const ExperimentConfig& config, const CellId& id,
                       std::shared_ptr<const CovarianceFactors> factors) {
  if (!factors) {
    factors = std::make_shared<const CovarianceFactors>(
        factorize(model_for(config, id.structure)));
  }
  CellContext cell;
  cell.id = id;
  cell.seed = cell_seed(config.seed, id);

  Rng truth_rng(derive_seed(cell.seed, {kStreamTruth}));
  cell.design = make_design(std::move(factors), config.alpha, id.sparsity,
                            std::exp(id.log_lambda), config.mu_norm, truth_rng);

  SolverOptions solver = config.solver;
  solver.seed = derive_seed(cell.seed, {kStreamSolver});
  solver.threads = config.threads;
  FixedPointSolution sol =
      solve_fixed_point(cell.design, LossModel{config.loss}, solver);
  cell.params = sol.params;
  cell.trace = std::move(sol.trace);
  cell.target = coverage_target(cell.params, cell.design);
  cell.theo_precision = theoretical_precision(cell.params, config.mu_norm);

  double acc = 0.0;
  int support = 0;
  for (int j = 0; j < cell.design.p; ++j) {
    if (cell.design.w0[j] != 0.0) {
      acc += theoretical_power(cell.params, cell.design, j, config.level);
      ++support;
    }
  }
  cell.theo_power = acc / support;
  return cell;
}

InferenceReport replicate_report(const CellContext& cell,
                                 const ExperimentConfig& config, int rep) {
  const Dataset train = sample_dataset(
      cell.design,
      derive_seed(cell.seed, {kStreamTrain, static_cast<std::uint64_t>(rep)}));
  const LossModel loss{config.loss};
  const FitResult fitted = fit(train, loss, cell.design.lambda);
  return make_report(fitted, train, loss, *cell.design.covariance,
                     cell.params.zeta, cell.params.tau, config.level);
}

ReplicateMetrics run_replicate(const CellContext& cell,
                               const ExperimentConfig& config, int rep) {
  const InferenceReport report = replicate_report(cell, config, rep);

  MixtureDesign test_design = cell.design;
  if (config.test_size > 0) {
    test_design.alpha =
        static_cast<double>(config.test_size) / static_cast<double>(config.p);
  }
  const Dataset test = sample_dataset(
      test_design,
      derive_seed(cell.seed, {kStreamTest, static_cast<std::uint64_t>(rep)}));

  ReplicateMetrics metrics;
  metrics.precision = empirical_precision(report.w_hat, test);
  metrics.coverage = empirical_coverage({report}, cell.target);
  metrics.power = empirical_power({report}, cell.design.w0);
  return metrics;
}

CampaignResult run_campaign(const ExperimentConfig& config) {
  validate_config(config);
  CampaignResult out;
  for (CovarianceKind kind : config.structures) {
    const auto factors = std::make_shared<const CovarianceFactors>(
        factorize(model_for(config, kind)));
    for (double sparsity : config.sparsity_levels) {
      for (double log_lambda : config.log_lambda_grid) {
        const CellId id{kind, sparsity, log_lambda};
        CellResult res;
        res.id = id;
        const auto start = std::chrono::steady_clock::now();
        try {
          const CellContext cell = solve_cell(config, id, factors);
          res.params = cell.params;
          res.theo_precision = cell.theo_precision;
          res.theo_power = cell.theo_power;
          res.replicates.resize(config.replicates);
          parallel_chunks(config.threads,
                          static_cast<std::size_t>(config.replicates), 1,
                          [&](std::size_t begin, std::size_t end) {
                            for (std::size_t r = begin; r < end; ++r) {
                              res.replicates[r] = run_replicate(
                                  cell, config, static_cast<int>(r));
                            }
                          });
          res.solved = true;
        } catch (const std::exception& e) {
          res.solved = false;
          res.error = e.what();
          res.replicates.clear();
        }
        res.seconds = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count();
        out.cells.push_back(std::move(res));
      }
    }
  }
  return out;
}

namespace {

void write_cell_summary_csv(const CampaignResult& result,
                            const std::string& path, const char* theo_column,
                            double CellResult::*theo_field,
                            double ReplicateMetrics::*metric_field) {
  CsvWriter csv(path,
                {"structure", "sparsity", "log_lambda", "status", theo_column,
                 "emp_mean", "emp_ci_low", "emp_ci_high", "n_reps"});
  for (const CellResult& cell : result.cells) {
    const std::string structure = covariance_kind_name(cell.id.structure);
    if (!cell.solved) {
      csv.write_row({structure, csv_id(cell.id.sparsity),
                     csv_id(cell.id.log_lambda),
                     "failed: " + sanitize_message(cell.error), "nan", "nan",
                     "nan", "nan", "0"});
      continue;
    }
    std::vector<double> xs(cell.replicates.size());
    for (std::size_t r = 0; r < xs.size(); ++r) {
      xs[r] = cell.replicates[r].*metric_field;
    }
    const MeanCi ci = replicate_mean_ci(xs);
    csv.write_row({structure, csv_id(cell.id.sparsity),
                   csv_id(cell.id.log_lambda), "ok",
                   csv_num(cell.*theo_field), csv_num(ci.mean), csv_num(ci.lo),
                   csv_num(ci.hi), std::to_string(xs.size())});
  }
}

}  // namespace

void write_precision_csv(const CampaignResult& result, const std::string& path) {
  write_cell_summary_csv(result, path, "theo_precision",
                         &CellResult::theo_precision,
                         &ReplicateMetrics::precision);
}

void write_power_csv(const CampaignResult& result, const std::string& path) {
  write_cell_summary_csv(result, path, "theo_power", &CellResult::theo_power,
                         &ReplicateMetrics::power);
}

void write_coverage_csv(const CampaignResult& result, const std::string& path) {
  CsvWriter csv(path, {"structure", "sparsity", "log_lambda", "replicate",
                       "coverage"});
  for (const CellResult& cell : result.cells) {
    if (!cell.solved) continue;
    const std::string structure = covariance_kind_name(cell.id.structure);
    for (std::size_t r = 0; r < cell.replicates.size(); ++r) {
      csv.write_row({structure, csv_id(cell.id.sparsity),
                     csv_id(cell.id.log_lambda), std::to_string(r),
                     csv_num(cell.replicates[r].coverage)});
    }
  }
}

namespace {

int count_failures(const CampaignResult& result) {
  int failed = 0;
  for (const CellResult& cell : result.cells) {
    if (!cell.solved) {
      std::fprintf(stderr, "cell (%s, sparsity=%g, log_lambda=%g) failed: %s\n",
                   covariance_kind_name(cell.id.structure), cell.id.sparsity,
                   cell.id.log_lambda, cell.error.c_str());
      ++failed;
    }
  }
  return failed;
}

}  // namespace

int run_precision_experiment(const ExperimentConfig& config) {
  ensure_out_dir(config);
  const CampaignResult result = run_campaign(config);
  write_precision_csv(result, out_path(config, "precision.csv"));
  return count_failures(result);
}

int run_coverage_experiment(const ExperimentConfig& config) {
  ensure_out_dir(config);
  const CampaignResult result = run_campaign(config);
  write_coverage_csv(result, out_path(config, "coverage.csv"));
  return count_failures(result);
}

int run_power_experiment(const ExperimentConfig& config) {
  ensure_out_dir(config);
  const CampaignResult result = run_campaign(config);
  write_power_csv(result, out_path(config, "power.csv"));
  return count_failures(result);
}

int run_histogram_experiment(const ExperimentConfig& config) {
  validate_config(config);
  ensure_out_dir(config);
  const CellId id{config.cell_structure, config.cell_sparsity,
                  config.cell_log_lambda};
  try {
    const CellContext cell = solve_cell(config, id);
    const InferenceReport report = replicate_report(cell, config, 0);
    CsvWriter csv(out_path(config, "histogram.csv"),
                  {"coordinate", "w_hat", "w_bar", "limit_mean", "limit_sd",
                   "truth"});
    for (int j = 0; j < cell.design.p; ++j) {
      csv.write_row({std::to_string(j), csv_num(report.w_hat[j]),
                     csv_num(report.w_bar[j]), csv_num(cell.target[j]),
                     csv_num(report.std_err[j]), csv_id(cell.design.w0[j])});
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "histogram cell (%s, sparsity=%g, log_lambda=%g) failed: %s\n",
                 covariance_kind_name(id.structure), id.sparsity, id.log_lambda,
                 e.what());
    return 1;
  }
  return 0;
}

int run_all(const ExperimentConfig& config) {
  ensure_out_dir(config);
  const CampaignResult result = run_campaign(config);
  write_precision_csv(result, out_path(config, "precision.csv"));
  write_coverage_csv(result, out_path(config, "coverage.csv"));
  write_power_csv(result, out_path(config, "power.csv"));
  int failed = count_failures(result);
  failed += run_histogram_experiment(config);
  return failed;
}

int run_solve(const ExperimentConfig& config) {
  validate_config(config);
  ensure_out_dir(config);
  const CellId id{config.cell_structure, config.cell_sparsity,
                  config.cell_log_lambda};
  try {
    const CellContext cell = solve_cell(config, id);
    std::printf("structure      %s\n", covariance_kind_name(id.structure));
    std::printf("sparsity       %g\n", id.sparsity);
    std::printf("log_lambda     %g\n", id.log_lambda);
    std::printf("iterations     %zu\n", cell.trace.iterates.size());
    std::printf("zeta0          %.10g\n", cell.params.zeta0);
    std::printf("zeta           %.10g\n", cell.params.zeta);
    std::printf("r0             %.10g\n", cell.params.r0);
    std::printf("q0             %.10g\n", cell.params.q0);
    std::printf("q              %.10g\n", cell.params.q);
    std::printf("r              %.10g\n", cell.params.r);
    std::printf("tau            %.10g\n", cell.params.tau);
    std::printf("precision      %.10g\n", cell.theo_precision);
    std::printf("power          %.10g\n", cell.theo_power);
    write_trace_csv(cell.trace, out_path(config, "trace.csv"));
  } catch (const FixedPointError& e) {
    std::fprintf(stderr, "solve failed: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "solve failed: %s\n", e.what());
    return 1;
  }
  return 0;
}

}  // namespace gmix
