#pragma once

#include <string>

#include "gmix/types.hpp"

namespace gmix {

enum class CovarianceKind { IID, BlockDiagonal, AR1, Banded };

const char* covariance_kind_name(CovarianceKind kind);
CovarianceKind parse_covariance_kind(const std::string& name);

// Declarative description of Sigma = sigma2 * R where R is one of four
// correlation structures: identity, 2x2 blocks with correlation rho, AR(1)
// with decay rho, or a banded matrix with band_value inside band_width.
struct CovarianceModel {
  CovarianceKind kind = CovarianceKind::IID;
  int p = 0;
  double sigma2 = 1.0;
  double rho = 0.8;
  double band_value = 0.4;
  int band_width = 2;
};

// Sigma together with its symmetric square root and inverse. Immutable after
// construction; safe to share across worker threads.
struct CovarianceFactors {
  int p = 0;
  Matrix sigma;
  Matrix sqrt_sigma;
  Matrix inv_sigma;
  Vector inv_diag;  // (Sigma^{-1})_{jj}
};

// The correlation matrix R alone, unit diagonal guaranteed.
Matrix build_correlation(const CovarianceModel& model);

// Builds Sigma = sigma2 * R and factors it via a full symmetric
// eigendecomposition. Throws std::runtime_error if Sigma is numerically
// singular (smallest eigenvalue reported in the message).
CovarianceFactors factorize(const CovarianceModel& model);

}  // namespace gmix
