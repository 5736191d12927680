#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "gmix/covariance.hpp"
#include "gmix/rng.hpp"
#include "gmix/types.hpp"

namespace gmix {

// Everything needed to describe one simulation cell: the planted truth w0,
// the class mean mu = a * Sigma * w0 rescaled to mu_norm, and the problem
// geometry (p, alpha = n/p, sparsity, penalty level).
struct MixtureDesign {
  int p = 0;
  double alpha = 0.0;
  double sparsity = 0.0;
  double lambda = 0.0;
  double mu_norm = 0.0;
  Vector w0;
  Vector mu;
  std::shared_ptr<const CovarianceFactors> covariance;

  int n() const;
};

struct Dataset {
  Matrix x;  // n x p
  Vector y;  // entries in {-1, +1}
  std::uint64_t seed = 0;
};

// Places round(sparsity * p) ones at uniformly random positions.
Vector make_sparse_truth(int p, double sparsity, Rng& rng);

// mu = a * Sigma * w0 with a chosen so that ||mu|| = target_norm.
Vector make_mean(const CovarianceFactors& factors, const Vector& w0,
                 double target_norm);

MixtureDesign make_design(std::shared_ptr<const CovarianceFactors> factors,
                          double alpha, double sparsity, double lambda,
                          double mu_norm, Rng& rng);

// Rows x_i = y_i * mu + Sigma^{1/2} g_i with y_i = +-1 fair coin flips and
// g_i standard normal. Fully determined by the seed.
Dataset sample_dataset(const MixtureDesign& design, std::uint64_t seed);

// One row per observation: y, x_1, ..., x_p.
void write_dataset_csv(const Dataset& dataset, const std::string& path);

}  // namespace gmix
