#include "gmix/covariance.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace gmix {

const char* covariance_kind_name(CovarianceKind kind) {
  switch (kind) {
    case CovarianceKind::IID:
      return "iid";
    case CovarianceKind::BlockDiagonal:
      return "block";
    case CovarianceKind::AR1:
      return "ar1";
    case CovarianceKind::Banded:
      return "banded";
  }
  return "unknown";
}

CovarianceKind parse_covariance_kind(const std::string& name) {
  if (name == "iid") return CovarianceKind::IID;
  if (name == "block") return CovarianceKind::BlockDiagonal;
  if (name == "ar1") return CovarianceKind::AR1;
  if (name == "banded") return CovarianceKind::Banded;
  throw std::invalid_argument("unknown covariance kind: " + name);
}

namespace {

void check_model(const CovarianceModel& model) {
  if (model.p < 1) {
    throw std::invalid_argument("covariance: p must be >= 1");
  }
  if (model.sigma2 <= 0.0) {
    throw std::invalid_argument("covariance: sigma2 must be positive");
  }
  const bool uses_rho = model.kind == CovarianceKind::AR1 ||
                        model.kind == CovarianceKind::BlockDiagonal;
  if (uses_rho && std::abs(model.rho) >= 1.0) {
    throw std::invalid_argument("covariance: |rho| must be < 1");
  }
  if (model.kind == CovarianceKind::BlockDiagonal && model.p % 2 != 0) {
    throw std::invalid_argument("covariance: block structure needs even p");
  }
  if (model.kind == CovarianceKind::Banded && model.band_width < 1) {
    throw std::invalid_argument("covariance: band_width must be >= 1");
  }
}

}  // namespace

Matrix build_correlation(const CovarianceModel& model) {
  check_model(model);
  const int p = model.p;
  Matrix r(p, p, 0.0);
  for (int i = 0; i < p; ++i) {
    r(i, i) = 1.0;
  }
  switch (model.kind) {
    case CovarianceKind::IID:
      break;
    case CovarianceKind::BlockDiagonal:
      for (int i = 0; i + 1 < p; i += 2) {
        r(i, i + 1) = model.rho;
        r(i + 1, i) = model.rho;
      }
      break;
    case CovarianceKind::AR1:
      for (int i = 0; i < p; ++i) {
        for (int j = i + 1; j < p; ++j) {
          const double v = std::pow(model.rho, j - i);
          r(i, j) = v;
          r(j, i) = v;
        }
      }
      break;
    case CovarianceKind::Banded:
      for (int i = 0; i < p; ++i) {
        for (int j = i + 1; j < p && j - i <= model.band_width; ++j) {
          r(i, j) = model.band_value;
          r(j, i) = model.band_value;
        }
      }
      break;
  }
  return r;
}

CovarianceFactors factorize(const CovarianceModel& model) {
  const Matrix corr = build_correlation(model);
  const int p = model.p;

  Eigen::MatrixXd sigma(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      sigma(i, j) = model.sigma2 * corr(i, j);
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("covariance: eigendecomposition failed");
  }
  const Eigen::VectorXd& evals = eig.eigenvalues();
  const double lambda_min = evals(0);
  const double lambda_max = evals(p - 1);
  if (lambda_min <= 1e-10 * lambda_max) {
    std::ostringstream msg;
    msg << "covariance: matrix is not positive definite, smallest eigenvalue "
        << lambda_min;
    throw std::runtime_error(msg.str());
  }

  Eigen::VectorXd sqrt_vals(p);
  Eigen::VectorXd inv_vals(p);
  for (int i = 0; i < p; ++i) {
    sqrt_vals(i) = std::sqrt(evals(i));
    inv_vals(i) = 1.0 / evals(i);
  }
  const Eigen::MatrixXd& v = eig.eigenvectors();
  const Eigen::MatrixXd sqrt_sigma = v * sqrt_vals.asDiagonal() * v.transpose();
  const Eigen::MatrixXd inv_sigma = v * inv_vals.asDiagonal() * v.transpose();

  CovarianceFactors factors;
  factors.p = p;
  factors.sigma = Matrix(p, p);
  factors.sqrt_sigma = Matrix(p, p);
  factors.inv_sigma = Matrix(p, p);
  factors.inv_diag.resize(p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      factors.sigma(i, j) = sigma(i, j);
      factors.sqrt_sigma(i, j) = sqrt_sigma(i, j);
      factors.inv_sigma(i, j) = inv_sigma(i, j);
    }
    factors.inv_diag[i] = inv_sigma(i, i);
  }
  return factors;
}

}  // namespace gmix
