#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gmix/classifier.hpp"
#include "gmix/covariance.hpp"
#include "gmix/gmm_data.hpp"
#include "gmix/losses.hpp"
#include "gmix/types.hpp"

namespace gmix {

struct InferenceReport {
  Vector w_hat;
  Vector w_bar;
  double tau = 0.0;
  double level = 0.05;
  Vector std_err;  // tau * sqrt((Sigma^{-1})_{jj})
  Vector p_values;
  Vector ci_lower;
  Vector ci_upper;
  std::vector<bool> rejected;  // p_value < level
};

// De-biased estimate: w_hat minus the gradient correction
//   (1/(sqrt(p) zeta)) sum_i y_i V'(m_i) Sigma^{-1} x_i.
// zeta comes from the converged fixed point of the matching design.
Vector debias(const FitResult& fit, const Dataset& dataset,
              const LossModel& loss, const CovarianceFactors& factors,
              double zeta);

// Two-sided p-value of w_bar_j under its limiting normal.
double p_value(double w_bar_j, double tau, double inv_diag_j);

// w_bar_j -+ z* tau sqrt(inv_diag_j), z* the 1 - level/2 normal quantile.
std::pair<double, double> confidence_interval(double w_bar_j, double tau,
                                              double inv_diag_j, double level);

InferenceReport make_report(const FitResult& fit, const Dataset& dataset,
                            const LossModel& loss,
                            const CovarianceFactors& factors, double zeta,
                            double tau, double level);

// Fraction of test rows with y * x^T w strictly positive; a margin of exactly
// zero counts as a miss.
double empirical_precision(const Vector& w, const Dataset& test);

// Fraction of (replicate, coordinate) pairs whose interval contains the
// truth coordinate. Throws if the truth is on a visibly different scale from
// the estimates (mean standardized residual above 5).
double empirical_coverage(const std::vector<InferenceReport>& reports,
                          const Vector& truth);

// Fraction of truly-nonzero coordinates rejected, averaged over replicates.
double empirical_power(const std::vector<InferenceReport>& reports,
                       const Vector& truth);

void write_report_csv(const InferenceReport& report, const Vector& truth,
                      const std::string& path);

}  // namespace gmix
