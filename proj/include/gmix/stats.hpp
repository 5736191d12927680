#pragma once

#include <functional>

#include "gmix/types.hpp"

namespace gmix {

// Standard normal CDF, via erfc.
double normal_cdf(double x);

// Standard normal quantile (inverse CDF), accurate to ~1e-15 over (0,1).
double normal_quantile(double p);

double mean(const Vector& v);
double sample_sd(const Vector& v);  // n-1 normalization

struct KsResult {
  double statistic;  // sup |F_n - F|
  double p_value;    // asymptotic Kolmogorov tail of sqrt(n) * statistic
};

// One-sample Kolmogorov-Smirnov test against the given continuous CDF.
KsResult ks_test(Vector values, const std::function<double(double)>& cdf);
KsResult ks_test_standard_normal(Vector values);

}  // namespace gmix
