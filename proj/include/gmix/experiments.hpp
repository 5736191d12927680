#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gmix/covariance.hpp"
#include "gmix/gmm_data.hpp"
#include "gmix/inference.hpp"
#include "gmix/losses.hpp"
#include "gmix/replica.hpp"

namespace gmix {

// Full description of a simulation campaign: the covariance structures,
// sparsity levels and log-lambda grid to sweep, the problem geometry shared
// by every cell, and the solver knobs. Loadable from JSON; every field has a
// default so an empty config object is valid.
struct ExperimentConfig {
  std::vector<CovarianceKind> structures{CovarianceKind::IID,
                                         CovarianceKind::AR1};
  int p = 200;
  double alpha = 0.5;
  double sigma2 = 2.0;
  double rho = 0.8;
  double band_value = 0.4;
  int band_width = 2;
  double mu_norm = 2.0;
  std::vector<double> sparsity_levels{0.01, 0.05, 0.1};
  std::vector<double> log_lambda_grid{-4.0, -3.5, -3.0, -2.5, -2.0, -1.5, -1.0};
  int replicates = 100;
  int test_size = 0;  // 0: same as the training size
  double level = 0.05;
  LossKind loss = LossKind::Logistic;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir = "out";
  SolverOptions solver;

  // The single cell used by the `solve` and `histogram` subcommands.
  CovarianceKind cell_structure = CovarianceKind::IID;
  double cell_sparsity = 0.05;
  double cell_log_lambda = -2.0;
};

// Throws std::invalid_argument on unreadable files, malformed JSON, unknown
// keys, or out-of-range values.
ExperimentConfig load_config(const std::string& path);
void validate_config(const ExperimentConfig& config);

struct CellId {
  CovarianceKind structure = CovarianceKind::IID;
  double sparsity = 0.0;
  double log_lambda = 0.0;
};

// Deterministic per-cell seed derived from the master seed and the cell's
// identifying values, so a cell's streams do not depend on grid order or on
// which subcommand runs it.
std::uint64_t cell_seed(std::uint64_t master, const CellId& id);

// One solved cell: the design (truth, mean, factors), the converged order
// parameters, and the theory-side quantities reused by every replicate.
struct CellContext {
  CellId id;
  std::uint64_t seed = 0;
  MixtureDesign design;
  OrderParameters params;
  SolveTrace trace;
  Vector target;  // limiting mean of the de-biased estimator
  double theo_precision = 0.0;
  double theo_power = 0.0;  // averaged over the planted support
};

CellContext solve_cell(const ExperimentConfig& config, const CellId& id,
                       std::shared_ptr<const CovarianceFactors> factors = nullptr);

struct ReplicateMetrics {
  double precision = 0.0;
  double coverage = 0.0;
  double power = 0.0;
};

// Fits one replicate dataset and reports per-coordinate inference; the
// replicate index selects independent derived streams for the train and test
// draws.
InferenceReport replicate_report(const CellContext& cell,
                                 const ExperimentConfig& config, int rep);
ReplicateMetrics run_replicate(const CellContext& cell,
                               const ExperimentConfig& config, int rep);

struct CellResult {
  CellId id;
  bool solved = false;
  std::string error;  // empty when solved
  OrderParameters params;
  double theo_precision = 0.0;
  double theo_power = 0.0;
  std::vector<ReplicateMetrics> replicates;
  double seconds = 0.0;
};

struct CampaignResult {
  std::vector<CellResult> cells;
};

// Runs every (structure, sparsity, log_lambda) cell sequentially; replicates
// within a cell fan out over config.threads. A failed solve marks the cell
// and the campaign continues.
CampaignResult run_campaign(const ExperimentConfig& config);

void write_precision_csv(const CampaignResult& result, const std::string& path);
void write_coverage_csv(const CampaignResult& result, const std::string& path);
void write_power_csv(const CampaignResult& result, const std::string& path);

// Each runs the pieces it needs and writes its CSV(s) under config.out_dir;
// returns the number of failed cells.
int run_precision_experiment(const ExperimentConfig& config);
int run_coverage_experiment(const ExperimentConfig& config);
int run_power_experiment(const ExperimentConfig& config);
int run_histogram_experiment(const ExperimentConfig& config);
int run_all(const ExperimentConfig& config);

// One fixed-point solve of the designated cell; prints the order parameters
// and writes the iteration trace.
int run_solve(const ExperimentConfig& config);

}  // namespace gmix
