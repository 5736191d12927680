#include "gmix/replica.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gmix/csv.hpp"
#include "gmix/kernels.hpp"
#include "gmix/quadrature.hpp"
#include "gmix/rng.hpp"
#include "gmix/stats.hpp"
#include "gmix/thread_pool.hpp"

namespace gmix {

namespace {

void validate_options(const SolverOptions& options) {
  if (options.mc_samples < 2) {
    throw std::invalid_argument("solver: mc_samples must be >= 2");
  }
  if (options.quad_nodes < 1) {
    throw std::invalid_argument("solver: quad_nodes must be >= 1");
  }
  if (!(options.damping > 0.0 && options.damping <= 1.0)) {
    throw std::invalid_argument("solver: damping must be in (0, 1]");
  }
  if (!(options.tol > 0.0) || !(options.mc_tol > 0.0)) {
    throw std::invalid_argument("solver: tolerances must be positive");
  }
  if (options.max_iters < 1) {
    throw std::invalid_argument("solver: max_iters must be >= 1");
  }
  if (options.chunk_size < 1) {
    throw std::invalid_argument("solver: chunk_size must be >= 1");
  }
}

double rel_change(double next, double prev) {
  return std::abs(next - prev) / std::max(std::abs(prev), 1e-8);
}

Vector unit_mean(const MixtureDesign& design) {
  Vector mu_hat(design.mu.size());
  for (std::size_t j = 0; j < mu_hat.size(); ++j) {
    mu_hat[j] = design.mu[j] / design.mu_norm;
  }
  return mu_hat;
}

}  // namespace

ZStream make_z_stream(const CovarianceFactors& factors, int mc_samples,
                      std::uint64_t seed) {
  if (mc_samples < 2) {
    throw std::invalid_argument("make_z_stream: mc_samples must be >= 2");
  }
  const int p = factors.p;
  ZStream stream;
  stream.z = Matrix(mc_samples, p);
  stream.u = Matrix(mc_samples, p);
  Rng rng(seed);
  for (int s = 0; s < mc_samples; ++s) {
    double* zs = stream.z.row(s);
    for (int j = 0; j < p; ++j) {
      zs[j] = rng.normal();
    }
  }
  for (int s = 0; s < mc_samples; ++s) {
    const double* zs = stream.z.row(s);
    double* us = stream.u.row(s);
    for (int j = 0; j < p; ++j) {
      us[j] = kernels::dot(factors.sqrt_sigma.row(j), zs, p);
    }
  }
  return stream;
}

QGroup update_q_group(const OrderParameters& params, const MixtureDesign& design,
                      const SolverOptions& options, const ZStream& z_stream) {
  if (!(params.zeta0 > 0.0) || !(params.zeta > 0.0)) {
    throw std::invalid_argument("update_q_group: needs zeta0, zeta > 0");
  }
  const std::size_t p = static_cast<std::size_t>(design.p);
  const std::size_t samples = z_stream.z.rows();
  const double sqrt_zeta0 = std::sqrt(params.zeta0);
  const double sqrt_p = std::sqrt(static_cast<double>(p));
  const Vector mu_hat = unit_mean(design);

  Vector shift(p);  // sqrt(p) * r0 * mu_hat
  for (std::size_t j = 0; j < p; ++j) {
    shift[j] = sqrt_p * params.r0 * mu_hat[j];
  }

  Vector stat_q0(samples);
  Vector stat_q(samples);
  Vector stat_r(samples);

  const QuadLassoOptions qopts;
  parallel_chunks(
      options.threads, samples, static_cast<std::size_t>(options.chunk_size),
      [&](std::size_t begin, std::size_t end) {
        QuadLassoProblem prob;
        prob.zeta = params.zeta;
        prob.sigma = design.covariance.get();
        prob.lambda = design.lambda;
        prob.penalty = options.penalty;
        prob.b.resize(p);
        Vector warm;  // warm start chained along the chunk only
        for (std::size_t s = begin; s < end; ++s) {
          const double* u = z_stream.u.row(s);
          for (std::size_t j = 0; j < p; ++j) {
            prob.b[j] = sqrt_zeta0 * u[j] + shift[j];
          }
          QuadLassoResult res =
              solve_quad_lasso(prob, warm.empty() ? nullptr : &warm, qopts);
          if (!res.converged) {
            throw std::runtime_error(
                "update_q_group: quadratic lasso did not converge at sample " +
                std::to_string(s));
          }
          stat_q0[s] = dot(res.w, res.sigma_w) / static_cast<double>(p);
          stat_q[s] = kernels::dot(res.w.data(), u, p) /
                      (static_cast<double>(p) * sqrt_zeta0);
          stat_r[s] = kernels::dot(res.w.data(), mu_hat.data(), p) / sqrt_p;
          warm = std::move(res.w);
        }
      });

  const double inv_sqrt_s = 1.0 / std::sqrt(static_cast<double>(samples));
  QGroup out;
  out.q0 = mean(stat_q0);
  out.q = mean(stat_q);
  out.r = mean(stat_r);
  out.q0_se = sample_sd(stat_q0) * inv_sqrt_s;
  out.q_se = sample_sd(stat_q) * inv_sqrt_s;
  out.r_se = sample_sd(stat_r) * inv_sqrt_s;
  return out;
}

ZetaGroup update_zeta_group(const OrderParameters& params,
                            const MixtureDesign& design, const LossModel& loss,
                            const SolverOptions& options) {
  if (!(params.q0 > 0.0) || !(params.q > 0.0)) {
    throw std::invalid_argument("update_zeta_group: needs q0, q > 0");
  }
  const GaussianQuadrature quad = gaussian_quadrature(options.quad_nodes);
  const double m0 = params.r * design.mu_norm;
  const double sq0 = std::sqrt(params.q0);

  double e0 = 0.0;  // E[d],  d = u_eps - m
  double e1 = 0.0;  // E[d * eps]
  double e2 = 0.0;  // E[d^2]
  for (std::size_t k = 0; k < quad.points.size(); ++k) {
    const double eps = quad.points[k];
    const double m = m0 + sq0 * eps;
    const double u = prox(loss, {m, params.q});
    const double d = u - m;
    const double w = quad.weights[k];
    e0 += w * d;
    e1 += w * d * eps;
    e2 += w * d * d;
  }

  ZetaGroup out;
  out.zeta0 = design.alpha / (params.q * params.q) * e2;
  out.zeta = -design.alpha / (params.q * sq0) * e1;
  out.r0 = design.alpha * design.mu_norm / params.q * e0;
  if (!std::isfinite(out.zeta0) || !std::isfinite(out.zeta) ||
      !std::isfinite(out.r0)) {
    throw std::runtime_error("update_zeta_group: quadrature produced non-finite values");
  }
  return out;
}

FixedPointSolution solve_fixed_point(const MixtureDesign& design,
                                     const LossModel& loss,
                                     const SolverOptions& options) {
  OrderParameters init;
  init.zeta0 = 1.0;
  init.zeta = 1.0;
  init.r0 = 1.0;
  init.q0 = 1.0;
  init.q = 1.0;
  init.r = 0.0;
  init.tau = 1.0;
  return solve_fixed_point(design, loss, options, init);
}

FixedPointSolution solve_fixed_point(const MixtureDesign& design,
                                     const LossModel& loss,
                                     const SolverOptions& options,
                                     const OrderParameters& init) {
  validate_options(options);
  if (!design.covariance) {
    throw std::invalid_argument("solve_fixed_point: design has no covariance factors");
  }
  const ZStream stream =
      make_z_stream(*design.covariance, options.mc_samples, options.seed);

  OrderParameters params = init;
  params.tau = std::sqrt(params.zeta0) / params.zeta;
  SolveTrace trace;

  for (int iter = 0; iter < options.max_iters; ++iter) {
    const QGroup qg = update_q_group(params, design, options, stream);
    if (!(qg.q0 > 0.0)) {
      throw FixedPointError(
          "solve_fixed_point: every Monte-Carlo solution collapsed to zero "
          "(fully-sparse regime; lambda is above the activation threshold)",
          trace);
    }
    if (!(qg.q > 0.0)) {
      throw FixedPointError("solve_fixed_point: q-group produced non-positive q",
                            trace);
    }
    const double q_res = std::max({rel_change(qg.q0, params.q0),
                                   rel_change(qg.q, params.q),
                                   rel_change(qg.r, params.r)});
    params.q0 = qg.q0;
    params.q = qg.q;
    params.r = qg.r;

    const ZetaGroup zg = update_zeta_group(params, design, loss, options);
    const double d = options.damping;
    const double next_zeta0 = d * zg.zeta0 + (1.0 - d) * params.zeta0;
    const double next_zeta = d * zg.zeta + (1.0 - d) * params.zeta;
    const double next_r0 = d * zg.r0 + (1.0 - d) * params.r0;
    const double z_res = std::max({rel_change(next_zeta0, params.zeta0),
                                   rel_change(next_zeta, params.zeta),
                                   rel_change(next_r0, params.r0)});
    params.zeta0 = next_zeta0;
    params.zeta = next_zeta;
    params.r0 = next_r0;
    if (!(params.zeta > 0.0) || !(params.zeta0 > 0.0)) {
      throw FixedPointError(
          "solve_fixed_point: zeta-group left the zeta > 0, zeta0 > 0 region",
          trace);
    }
    params.tau = std::sqrt(params.zeta0) / params.zeta;

    trace.iterates.push_back(params);
    trace.residuals.push_back(std::max(q_res, z_res));
    if (z_res <= options.tol && q_res <= options.mc_tol) {
      trace.converged = true;
      return {params, std::move(trace)};
    }
  }
  throw FixedPointError(
      "solve_fixed_point: no convergence within the iteration budget", trace);
}

double theoretical_precision(const OrderParameters& params, double mu_norm) {
  if (!(params.q0 > 0.0)) {
    throw std::invalid_argument("theoretical_precision: needs q0 > 0");
  }
  return normal_cdf(params.r * mu_norm / std::sqrt(params.q0));
}

Vector coverage_target(const OrderParameters& params,
                       const MixtureDesign& design) {
  const Vector mu_hat = unit_mean(design);
  Vector target = matvec(design.covariance->inv_sigma, mu_hat);
  const double scale =
      std::sqrt(static_cast<double>(design.p)) * params.r0 / params.zeta;
  for (double& v : target) v *= scale;
  return target;
}

double theoretical_power(const OrderParameters& params,
                         const MixtureDesign& design, int j, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("theoretical_power: level must be in (0,1)");
  }
  const CovarianceFactors& cov = *design.covariance;
  const Vector mu_hat = unit_mean(design);
  const double m_j = std::sqrt(static_cast<double>(design.p)) * params.r0 /
                     params.zeta *
                     kernels::dot(cov.inv_sigma.row(j), mu_hat.data(),
                                  static_cast<std::size_t>(design.p));
  const double s_j = params.tau * std::sqrt(cov.inv_diag[j]);
  const double z_star = normal_quantile(1.0 - level / 2.0);
  return normal_cdf(-z_star + m_j / s_j) + normal_cdf(-z_star - m_j / s_j);
}

void write_trace_csv(const SolveTrace& trace, const std::string& path) {
  CsvWriter csv(path, {"iteration", "zeta0", "zeta", "r0", "q0", "q", "r",
                       "tau", "residual"});
  for (std::size_t i = 0; i < trace.iterates.size(); ++i) {
    const OrderParameters& op = trace.iterates[i];
    csv.write_row({std::to_string(i + 1), csv_num(op.zeta0), csv_num(op.zeta),
                   csv_num(op.r0), csv_num(op.q0), csv_num(op.q), csv_num(op.r),
                   csv_num(op.tau), csv_num(trace.residuals[i])});
  }
}

}  // namespace gmix
