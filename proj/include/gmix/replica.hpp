#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmix/classifier.hpp"
#include "gmix/gmm_data.hpp"
#include "gmix/losses.hpp"
#include "gmix/types.hpp"

namespace gmix {

// The six scalars characterizing the high-dimensional limit of the fitted
// classifier, plus the derived noise scale tau = sqrt(zeta0)/zeta.
struct OrderParameters {
  double zeta0 = 1.0;
  double zeta = 1.0;
  double r0 = 1.0;
  double q0 = 1.0;
  double q = 1.0;
  double r = 0.0;
  double tau = 1.0;
};

struct SolverOptions {
  int mc_samples = 1000;   // z-draws per iteration
  int quad_nodes = 64;     // Gauss-Hermite order for the eps-expectations
  double damping = 0.5;    // applied to the zeta-group update only
  double tol = 1e-6;       // zeta-group relative-change tolerance
  double mc_tol = 1e-3;    // q-group relative-change tolerance (MC noise floor)
  int max_iters = 200;
  std::uint64_t seed = 0;
  PenaltyKind penalty = PenaltyKind::L1;
  int chunk_size = 32;  // samples per warm-start chain; fixed so results do
                        // not depend on the thread count
  int threads = 1;
};

struct SolveTrace {
  std::vector<OrderParameters> iterates;
  std::vector<double> residuals;  // max relative change per iteration
  bool converged = false;
};

class FixedPointError : public std::runtime_error {
 public:
  FixedPointError(const std::string& msg, SolveTrace trace)
      : std::runtime_error(msg), trace(std::move(trace)) {}
  SolveTrace trace;
};

// Common-random-numbers draws reused across fixed-point iterations. u rows
// hold Sigma^{1/2} z_s so per-iteration work is linear in p per sample.
struct ZStream {
  Matrix z;  // mc_samples x p
  Matrix u;  // mc_samples x p
};

ZStream make_z_stream(const CovarianceFactors& factors, int mc_samples,
                      std::uint64_t seed);

struct QGroup {
  double q0 = 0.0;
  double q = 0.0;
  double r = 0.0;
  // Monte-Carlo standard errors of the three means.
  double q0_se = 0.0;
  double q_se = 0.0;
  double r_se = 0.0;
};

// Monte-Carlo estimates of q0 = E[w^T Sigma w]/p, q = E[w^T Sigma^{1/2} z]
// /(p sqrt(zeta0)), R = E[w^T mu_hat]/sqrt(p), each w solving the quadratic
// lasso sub-problem at the current (zeta0, zeta, r0).
QGroup update_q_group(const OrderParameters& params, const MixtureDesign& design,
                      const SolverOptions& options, const ZStream& z_stream);

struct ZetaGroup {
  double zeta0 = 0.0;
  double zeta = 0.0;
  double r0 = 0.0;
};

// Gauss-Hermite evaluation of the three scalar expectations over eps:
//   zeta0 = (alpha/q^2)   E[(u_eps - m)^2]
//   zeta  = -(alpha/(q sqrt(q0))) E[(u_eps - m) eps]
//   r0    = (alpha mu/q)  E[u_eps - m]
// with m = R mu + sqrt(q0) eps and u_eps the proximal point of the loss.
ZetaGroup update_zeta_group(const OrderParameters& params,
                            const MixtureDesign& design, const LossModel& loss,
                            const SolverOptions& options);

struct FixedPointSolution {
  OrderParameters params;
  SolveTrace trace;
};

// Alternates the two update groups from (zeta0, zeta, r0) = (1,1,1) until the
// zeta-group settles within tol and the q-group within mc_tol. Throws
// FixedPointError (carrying the trace) on the all-zero collapse or on budget
// exhaustion.
FixedPointSolution solve_fixed_point(const MixtureDesign& design,
                                     const LossModel& loss,
                                     const SolverOptions& options);
FixedPointSolution solve_fixed_point(const MixtureDesign& design,
                                     const LossModel& loss,
                                     const SolverOptions& options,
                                     const OrderParameters& init);

// Phi(R * mu_norm / sqrt(q0)): the limiting probability of classifying a
// fresh draw correctly.
double theoretical_precision(const OrderParameters& params, double mu_norm);

// Mean vector of the de-biased estimator's limiting distribution,
// sqrt(p) * r0/zeta * Sigma^{-1} mu_hat; also the centering used for
// coverage.
Vector coverage_target(const OrderParameters& params, const MixtureDesign& design);

// Two-sided rejection probability at the given level for coordinate j, under
// the limiting normal with mean coverage_target[j] and sd tau *
// sqrt((Sigma^{-1})_{jj}).
double theoretical_power(const OrderParameters& params,
                         const MixtureDesign& design, int j, double level);

void write_trace_csv(const SolveTrace& trace, const std::string& path);

}  // namespace gmix
