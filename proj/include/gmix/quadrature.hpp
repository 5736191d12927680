#pragma once

#include "gmix/types.hpp"

namespace gmix {

// Gauss-Hermite rule for the weight exp(-t^2) on the real line.
struct GaussHermiteRule {
  Vector nodes;
  Vector weights;
};

GaussHermiteRule gauss_hermite(int n);

// Same rule re-expressed for expectations over N(0,1):
//   E[f(eps)] ~= sum_i weights[i] * f(points[i])
// with points = sqrt(2) * nodes and weights normalized to sum to 1.
struct GaussianQuadrature {
  Vector points;
  Vector weights;
};

GaussianQuadrature gaussian_quadrature(int n);

}  // namespace gmix
