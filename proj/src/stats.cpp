#include "gmix/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gmix {

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

namespace {

// Acklam's rational approximation for the normal quantile (~1e-9), used as
// the seed for one Halley refinement against the erfc-based CDF.
double quantile_seed(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double q = p - 0.5;
  double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("normal_quantile: p must be in (0,1)");
  }
  double x = quantile_seed(p);
  // Halley step: e = Phi(x) - p, phi = density
  for (int it = 0; it < 2; ++it) {
    double e = normal_cdf(x) - p;
    double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    double u = e / phi;
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

double mean(const Vector& v) {
  if (v.empty()) throw std::invalid_argument("mean: empty vector");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_sd(const Vector& v) {
  if (v.size() < 2) throw std::invalid_argument("sample_sd: need at least 2 values");
  double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

KsResult ks_test(Vector values, const std::function<double(double)>& cdf) {
  if (values.empty()) throw std::invalid_argument("ks_test: empty sample");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    double f = cdf(values[i]);
    d = std::max(d, f - static_cast<double>(i) / n);
    d = std::max(d, static_cast<double>(i + 1) / n - f);
  }
  // Asymptotic Kolmogorov distribution: Q(t) = 2 sum_k (-1)^{k-1} exp(-2 k^2 t^2)
  double t = std::sqrt(n) * d;
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) {
    double term = 2.0 * std::exp(-2.0 * k * k * t * t);
    q += (k % 2 == 1) ? term : -term;
  }
  q = std::clamp(q, 0.0, 1.0);
  return KsResult{d, q};
}

KsResult ks_test_standard_normal(Vector values) {
  return ks_test(std::move(values), [](double x) { return normal_cdf(x); });
}

}  // namespace gmix
