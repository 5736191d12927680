#pragma once

#include "gmix/covariance.hpp"
#include "gmix/gmm_data.hpp"
#include "gmix/losses.hpp"
#include "gmix/types.hpp"

namespace gmix {

struct FitOptions {
  double tol = 1e-8;          // max KKT violation at convergence
  int max_sweeps = 100000;
};

struct FitResult {
  Vector w_hat;
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;  // coordinate sweeps performed
  bool converged = false;
  Vector objective_trace;  // objective after each sweep, non-increasing
};

// m_i = y_i * x_i^T w / sqrt(p)
Vector margins(const Dataset& dataset, const Vector& w);

// Minimizes sum_i V(y_i x_i^T w / sqrt(p)) + lambda * ||w||_1 by cyclic
// coordinate descent: a quadratic majorization step for logistic (curvature
// bound 1/4), exact piecewise-linear minimization for hinge. Starts from 0.
FitResult fit(const Dataset& dataset, const LossModel& loss, double lambda,
              const FitOptions& options = {});

enum class PenaltyKind { L1, Quadratic };  // Quadratic: lambda * w_j^2

// The p-dimensional sub-problem
//   argmin_w (zeta/2) w^T Sigma w - b^T w + penalty(w)
// solved once per Monte-Carlo z-sample inside the fixed-point iteration.
struct QuadLassoProblem {
  double zeta = 1.0;
  const CovarianceFactors* sigma = nullptr;
  Vector b;
  double lambda = 0.0;
  PenaltyKind penalty = PenaltyKind::L1;
};

struct QuadLassoOptions {
  double tol_kkt = 1e-8;
  double tol_change = 1e-10;  // max coordinate change per sweep
  int max_sweeps = 10000;
};

struct QuadLassoResult {
  Vector w;
  Vector sigma_w;  // Sigma * w, maintained by the sweep; reused by callers
  double kkt_residual = 0.0;
  int sweeps = 0;
  bool converged = false;
};

// warm_start may be null (start from 0) or a length-p vector.
QuadLassoResult solve_quad_lasso(const QuadLassoProblem& problem,
                                 const Vector* warm_start = nullptr,
                                 const QuadLassoOptions& options = {});

}  // namespace gmix
