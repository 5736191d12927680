#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace gmix {

using Vector = std::vector<double>;

// Dense row-major matrix. Rows are contiguous so hot loops can hand them
// straight to the kernels.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, value) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// out = a * x, rows of a dotted against x. out may not alias x.
void matvec(const Matrix& a, const Vector& x, Vector& out);
Vector matvec(const Matrix& a, const Vector& x);

double dot(const Vector& a, const Vector& b);
double l1_norm(const Vector& v);
double l2_norm(const Vector& v);

inline double soft_threshold(double x, double threshold) {
  if (x > threshold) return x - threshold;
  if (x < -threshold) return x + threshold;
  return 0.0;
}

}  // namespace gmix
