#include "gmix/quadrature.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace gmix {

namespace {

// The nodes are the eigenvalues of the symmetric tridiagonal Jacobi matrix of
// the orthonormal Hermite recurrence (zero diagonal, off-diagonals
// b_j = sqrt(j/2)). Bisection on the LDL pivot sign count locates each
// eigenvalue to machine precision regardless of the order; Newton from
// asymptotic guesses, the usual shortcut, loses roots beyond order ~150.

// Number of eigenvalues below x: the count of negative LDL pivots, with an
// exact zero pivot nudged to the negative side so it is counted (otherwise
// the count is off by one exactly at x = 0, the symmetry point).
int pivot_count(int n, double x) {
  int count = 0;
  double d = -x;
  for (int j = 1;; ++j) {
    if (d == 0.0) d = -1e-300;
    if (d < 0.0) ++count;
    if (j >= n) break;
    d = -x - (0.5 * j) / d;
  }
  return count;
}

// k-th smallest eigenvalue, k in [0, n).
double bisect_node(int n, int k, double bound) {
  double lo = -bound;
  double hi = bound;
  for (int iter = 0; iter < 200; ++iter) {
    double mid = 0.5 * (lo + hi);
    if (hi - lo <= 1e-16 * std::max(1.0, std::abs(mid))) break;
    if (pivot_count(n, mid) >= k + 1) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Orthonormal Hermite recurrence at z with power-of-two rescaling so high
// orders cannot overflow; returns p_{n-1}(z) = value * 2^exponent.
void hermite_prev(int n, double z, double& value, int& exponent) {
  const double pim4 = 0.7511255444649425;  // pi^{-1/4}
  double p1 = pim4;
  double p2 = 0.0;
  exponent = 0;
  for (int j = 0; j < n; ++j) {
    const double p3 = p2;
    p2 = p1;
    p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 -
         std::sqrt(static_cast<double>(j) / (j + 1.0)) * p3;
    if (std::abs(p1) > 0x1p500) {
      p1 = std::ldexp(p1, -500);
      p2 = std::ldexp(p2, -500);
      exponent += 500;
    }
  }
  value = p2;
}

}  // namespace

GaussHermiteRule gauss_hermite(int n) {
  if (n < 1) {
    throw std::invalid_argument("gauss_hermite: order must be >= 1");
  }
  GaussHermiteRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);

  // All roots lie inside +-sqrt(2n+1).
  const double bound = std::sqrt(2.0 * n + 1.0) + 1.0;
  const int m = (n + 1) / 2;

  for (int k = 0; k < m; ++k) {
    double z = bisect_node(n, k, bound);
    if (2 * k + 1 == n) z = 0.0;  // middle root of an odd-order rule

    // w = 2 / (sqrt(2n) * p_{n-1}(z))^2; underflow to zero for the extreme
    // nodes of very high orders is the correct limiting value.
    double prev = 0.0;
    int exponent = 0;
    hermite_prev(n, z, prev, exponent);
    const double pp = std::sqrt(2.0 * n) * prev;
    const double w = std::ldexp(2.0 / (pp * pp), -2 * exponent);

    rule.nodes[k] = z;
    rule.nodes[n - 1 - k] = -z;
    rule.weights[k] = w;
    rule.weights[n - 1 - k] = w;
  }
  return rule;
}

GaussianQuadrature gaussian_quadrature(int n) {
  const GaussHermiteRule rule = gauss_hermite(n);
  const double inv_sqrt_pi = 1.0 / std::sqrt(M_PI);
  GaussianQuadrature q;
  q.points.resize(rule.nodes.size());
  q.weights.resize(rule.nodes.size());
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    q.points[i] = std::sqrt(2.0) * rule.nodes[i];
    q.weights[i] = rule.weights[i] * inv_sqrt_pi;
  }
  return q;
}

}  // namespace gmix
