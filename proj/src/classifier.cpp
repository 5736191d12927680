#include "gmix/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "gmix/kernels.hpp"

namespace gmix {

Vector margins(const Dataset& dataset, const Vector& w) {
  const std::size_t n = dataset.x.rows();
  const std::size_t p = dataset.x.cols();
  if (w.size() != p || dataset.y.size() != n) {
    throw std::invalid_argument("margins: dimension mismatch");
  }
  const double inv_sqrt_p = 1.0 / std::sqrt(static_cast<double>(p));
  Vector m(n);
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = dataset.y[i] * inv_sqrt_p * kernels::dot(dataset.x.row(i), w.data(), p);
  }
  return m;
}

namespace {

// Exact minimizer of sum_i (r_i - z_i t)_+ + lambda |t| over t. The function
// is convex piecewise linear; walk the breakpoints in order until the slope
// turns non-negative. events is scratch storage.
double min_piecewise_linear(const double* z, const double* r, std::size_t n,
                            double lambda,
                            std::vector<std::pair<double, double>>& events) {
  events.clear();
  double slope = -lambda;  // slope as t -> -infinity
  for (std::size_t i = 0; i < n; ++i) {
    if (z[i] == 0.0) continue;
    if (z[i] > 0.0) slope -= z[i];
    events.emplace_back(r[i] / z[i], std::abs(z[i]));
  }
  events.emplace_back(0.0, 2.0 * lambda);
  std::sort(events.begin(), events.end());
  for (const auto& [t, jump] : events) {
    slope += jump;
    if (slope >= 0.0) {
      return t;
    }
  }
  return events.back().first;  // unreachable for lambda > 0
}

// Distance from 0 to the subgradient interval [lo, hi].
double interval_residual(double lo, double hi) {
  if (lo > 0.0) return lo;
  if (hi < 0.0) return -hi;
  return 0.0;
}

constexpr double kHingeKinkTol = 1e-9;

}  // namespace

FitResult fit(const Dataset& dataset, const LossModel& loss, double lambda,
              const FitOptions& options) {
  const std::size_t n = dataset.x.rows();
  const std::size_t p = dataset.x.cols();
  if (n < 1 || p < 1) {
    throw std::invalid_argument("fit: empty dataset");
  }
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("fit: lambda must be positive");
  }

  // zt row j holds the j-th feature column of the scaled design, so margins
  // are m = zt^T w and coordinate sweeps touch contiguous memory.
  const double inv_sqrt_p = 1.0 / std::sqrt(static_cast<double>(p));
  Matrix zt(p, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double yi = dataset.y[i] * inv_sqrt_p;
    const double* xi = dataset.x.row(i);
    for (std::size_t j = 0; j < p; ++j) {
      zt(j, i) = yi * xi[j];
    }
  }

  Vector w(p, 0.0);
  Vector m(n, 0.0);
  const bool logistic = loss.kind == LossKind::Logistic;

  // Logistic bookkeeping: cached derivatives and the 1/4 curvature bound.
  Vector v(n, loss::derivative(loss, 0.0));
  Vector h(p, 0.0);
  if (logistic) {
    for (std::size_t j = 0; j < p; ++j) {
      h[j] = 0.25 * kernels::dot(zt.row(j), zt.row(j), n);
    }
  }

  Vector r(n);  // hinge scratch
  std::vector<std::pair<double, double>> events;
  events.reserve(n + 1);

  auto objective = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s += loss::value(loss, m[i]);
    }
    return s + lambda * l1_norm(w);
  };

  auto update_coord = [&](std::size_t j) {
    const double* zj = zt.row(j);
    double wnew;
    if (logistic) {
      if (h[j] <= 0.0) return 0.0;
      const double g = kernels::dot(v.data(), zj, n);
      wnew = soft_threshold(h[j] * w[j] - g, lambda) / h[j];
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        r[i] = 1.0 - m[i] + zj[i] * w[j];
      }
      wnew = min_piecewise_linear(zj, r.data(), n, lambda, events);
    }
    const double delta = wnew - w[j];
    if (delta != 0.0) {
      kernels::axpy(n, delta, zj, m.data());
      w[j] = wnew;
      if (logistic) {
        for (std::size_t i = 0; i < n; ++i) {
          v[i] = loss::derivative(loss, m[i]);
        }
      }
    }
    return std::abs(delta);
  };

  auto kkt_residual = [&]() {
    double worst = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double* zj = zt.row(j);
      double res;
      if (logistic) {
        const double g = kernels::dot(v.data(), zj, n);
        res = w[j] != 0.0 ? std::abs(g + lambda * (w[j] > 0.0 ? 1.0 : -1.0))
                          : std::max(0.0, std::abs(g) - lambda);
      } else {
        // Subgradient interval of the loss term, then shift/widen by the
        // penalty part.
        double lo = 0.0;
        double hi = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (m[i] < 1.0 - kHingeKinkTol) {
            lo += -zj[i];
            hi += -zj[i];
          } else if (m[i] <= 1.0 + kHingeKinkTol) {
            lo += std::min(-zj[i], 0.0);
            hi += std::max(-zj[i], 0.0);
          }
        }
        if (w[j] != 0.0) {
          const double s = lambda * (w[j] > 0.0 ? 1.0 : -1.0);
          lo += s;
          hi += s;
        } else {
          lo -= lambda;
          hi += lambda;
        }
        res = interval_residual(lo, hi);
      }
      worst = std::max(worst, res);
    }
    return worst;
  };

  FitResult result;
  int sweeps = 0;
  double kkt = 0.0;
  bool converged = false;
  while (sweeps < options.max_sweeps) {
    for (std::size_t j = 0; j < p; ++j) {
      update_coord(j);
    }
    ++sweeps;
    const double obj = objective();
    if (!std::isfinite(obj)) {
      throw std::runtime_error("fit: objective became non-finite");
    }
    result.objective_trace.push_back(obj);
    kkt = kkt_residual();
    if (kkt <= options.tol) {
      converged = true;
      break;
    }
    // Polish the current support before paying for another full sweep.
    for (int inner = 0; inner < 50 && sweeps < options.max_sweeps; ++inner) {
      double change = 0.0;
      bool any = false;
      for (std::size_t j = 0; j < p; ++j) {
        if (w[j] != 0.0) {
          change = std::max(change, update_coord(j));
          any = true;
        }
      }
      ++sweeps;
      result.objective_trace.push_back(objective());
      if (!any || change <= 1e-12) break;
    }
  }

  result.w_hat = std::move(w);
  result.objective = result.objective_trace.empty() ? objective()
                                                    : result.objective_trace.back();
  result.kkt_residual = kkt;
  result.iterations = sweeps;
  result.converged = converged;
  return result;
}

QuadLassoResult solve_quad_lasso(const QuadLassoProblem& problem,
                                 const Vector* warm_start,
                                 const QuadLassoOptions& options) {
  if (problem.sigma == nullptr) {
    throw std::invalid_argument("solve_quad_lasso: missing covariance factors");
  }
  const CovarianceFactors& cov = *problem.sigma;
  const std::size_t p = static_cast<std::size_t>(cov.p);
  if (problem.b.size() != p) {
    throw std::invalid_argument("solve_quad_lasso: b has wrong length");
  }
  const double zeta = problem.zeta;
  const double lambda = problem.lambda;
  if (!(zeta > 0.0) || !(lambda > 0.0)) {
    throw std::invalid_argument("solve_quad_lasso: zeta and lambda must be positive");
  }
  const bool l1 = problem.penalty == PenaltyKind::L1;

  QuadLassoResult result;
  Vector& w = result.w;
  if (warm_start != nullptr) {
    if (warm_start->size() != p) {
      throw std::invalid_argument("solve_quad_lasso: warm start has wrong length");
    }
    w = *warm_start;
  } else {
    w.assign(p, 0.0);
  }

  Vector diag(p);
  for (std::size_t j = 0; j < p; ++j) {
    diag[j] = cov.sigma(j, j);
  }

  // s tracks Sigma * w across coordinate updates.
  Vector s(p, 0.0);
  bool warm_nonzero = false;
  if (warm_start != nullptr) {
    for (double x : w) {
      if (x != 0.0) {
        warm_nonzero = true;
        break;
      }
    }
  }
  if (warm_nonzero) {
    matvec(cov.sigma, w, s);
  }

  double kkt = 0.0;
  bool converged = false;
  int sweeps = 0;
  while (sweeps < options.max_sweeps) {
    double max_change = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double c = problem.b[j] - zeta * (s[j] - diag[j] * w[j]);
      const double wnew = l1 ? soft_threshold(c, lambda) / (zeta * diag[j])
                             : c / (zeta * diag[j] + 2.0 * lambda);
      const double delta = wnew - w[j];
      if (delta != 0.0) {
        kernels::axpy(p, delta, cov.sigma.row(j), s.data());
        w[j] = wnew;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    ++sweeps;
    kkt = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double grad = zeta * s[j] - problem.b[j];
      double res;
      if (l1) {
        res = w[j] != 0.0 ? std::abs(grad + lambda * (w[j] > 0.0 ? 1.0 : -1.0))
                          : std::max(0.0, std::abs(grad) - lambda);
      } else {
        res = std::abs(grad + 2.0 * lambda * w[j]);
      }
      kkt = std::max(kkt, res);
    }
    if (max_change <= options.tol_change && kkt <= options.tol_kkt) {
      converged = true;
      break;
    }
  }

  // Refresh the product once at the end; the incremental copy carries a few
  // ulps of drift after many sweeps.
  result.sigma_w.resize(p);
  matvec(cov.sigma, w, result.sigma_w);
  result.kkt_residual = kkt;
  result.sweeps = sweeps;
  result.converged = converged;
  return result;
}

}  // namespace gmix
