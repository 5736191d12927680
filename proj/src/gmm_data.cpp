#include "gmix/gmm_data.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <utility>

#include "gmix/kernels.hpp"

namespace gmix {

int MixtureDesign::n() const {
  return static_cast<int>(std::lround(alpha * p));
}

Vector make_sparse_truth(int p, double sparsity, Rng& rng) {
  if (p < 1 || sparsity <= 0.0 || sparsity > 1.0) {
    throw std::invalid_argument("make_sparse_truth: need p >= 1 and sparsity in (0,1]");
  }
  const int k = static_cast<int>(std::lround(sparsity * p));
  if (k < 1) {
    throw std::invalid_argument("make_sparse_truth: sparsity * p rounds to zero ones");
  }
  // Partial Fisher-Yates: the first k entries of the shuffled index list are
  // the support.
  std::vector<int> idx(p);
  for (int i = 0; i < p; ++i) idx[i] = i;
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(rng.uniform_int(p - i));
    std::swap(idx[i], idx[j]);
  }
  Vector w0(p, 0.0);
  for (int i = 0; i < k; ++i) {
    w0[idx[i]] = 1.0;
  }
  return w0;
}

Vector make_mean(const CovarianceFactors& factors, const Vector& w0,
                 double target_norm) {
  Vector mu = matvec(factors.sigma, w0);
  const double norm = l2_norm(mu);
  if (norm <= 0.0) {
    throw std::invalid_argument("make_mean: Sigma * w0 is zero, no signal direction");
  }
  const double a = target_norm / norm;
  for (double& v : mu) v *= a;
  return mu;
}

MixtureDesign make_design(std::shared_ptr<const CovarianceFactors> factors,
                          double alpha, double sparsity, double lambda,
                          double mu_norm, Rng& rng) {
  if (!factors) {
    throw std::invalid_argument("make_design: null covariance factors");
  }
  MixtureDesign design;
  design.p = factors->p;
  design.alpha = alpha;
  design.sparsity = sparsity;
  design.lambda = lambda;
  design.mu_norm = mu_norm;
  design.w0 = make_sparse_truth(design.p, sparsity, rng);
  design.mu = make_mean(*factors, design.w0, mu_norm);
  design.covariance = std::move(factors);
  return design;
}

Dataset sample_dataset(const MixtureDesign& design, std::uint64_t seed) {
  const int p = design.p;
  const int n = design.n();
  Rng rng(seed);

  Dataset data;
  data.seed = seed;
  data.x = Matrix(n, p);
  data.y.resize(n);

  Vector g(p);
  for (int i = 0; i < n; ++i) {
    const double y = rng.uniform() < 0.5 ? 1.0 : -1.0;
    data.y[i] = y;
    for (int j = 0; j < p; ++j) {
      g[j] = rng.normal();
    }
    double* row = data.x.row(i);
    const Matrix& s = design.covariance->sqrt_sigma;
    for (int j = 0; j < p; ++j) {
      row[j] = y * design.mu[j] + kernels::dot(s.row(j), g.data(), p);
    }
  }
  return data;
}

void write_dataset_csv(const Dataset& dataset, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) {
    throw std::runtime_error("write_dataset_csv: cannot open " + path);
  }
  const std::size_t n = dataset.x.rows();
  const std::size_t p = dataset.x.cols();
  std::fprintf(f, "y");
  for (std::size_t j = 0; j < p; ++j) {
    std::fprintf(f, ",x%zu", j + 1);
  }
  std::fprintf(f, "\n");
  for (std::size_t i = 0; i < n; ++i) {
    std::fprintf(f, "%g", dataset.y[i]);
    const double* row = dataset.x.row(i);
    for (std::size_t j = 0; j < p; ++j) {
      std::fprintf(f, ",%.17g", row[j]);
    }
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

}  // namespace gmix
