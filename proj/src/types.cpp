#include "gmix/types.hpp"

#include <cassert>
#include <cmath>

#include "gmix/kernels.hpp"

namespace gmix {

void matvec(const Matrix& a, const Vector& x, Vector& out) {
  assert(a.cols() == x.size());
  out.resize(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    out[i] = kernels::dot(a.row(i), x.data(), a.cols());
  }
}

Vector matvec(const Matrix& a, const Vector& x) {
  Vector out;
  matvec(a, x, out);
  return out;
}

double dot(const Vector& a, const Vector& b) {
  assert(a.size() == b.size());
  return kernels::dot(a.data(), b.data(), a.size());
}

double l1_norm(const Vector& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

double l2_norm(const Vector& v) {
  return std::sqrt(dot(v, v));
}

}  // namespace gmix
