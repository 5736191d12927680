#include "gmix/inference.hpp"

#include <cmath>
#include <stdexcept>

#include "gmix/csv.hpp"
#include "gmix/kernels.hpp"
#include "gmix/stats.hpp"

namespace gmix {

Vector debias(const FitResult& fit, const Dataset& dataset,
              const LossModel& loss, const CovarianceFactors& factors,
              double zeta) {
  const std::size_t n = dataset.x.rows();
  const std::size_t p = dataset.x.cols();
  if (fit.w_hat.size() != p || static_cast<std::size_t>(factors.p) != p) {
    throw std::invalid_argument("debias: dimension mismatch");
  }
  if (!(zeta > 0.0)) {
    throw std::invalid_argument("debias: zeta must be positive");
  }

  const Vector m = margins(dataset, fit.w_hat);

  // Aggregate sum_i y_i V'(m_i) x_i first, then apply Sigma^{-1} once.
  Vector g(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double c = dataset.y[i] * loss::derivative(loss, m[i]);
    if (c != 0.0) {
      kernels::axpy(p, c, dataset.x.row(i), g.data());
    }
  }
  const Vector correction = matvec(factors.inv_sigma, g);

  const double scale = 1.0 / (std::sqrt(static_cast<double>(p)) * zeta);
  Vector w_bar(p);
  for (std::size_t j = 0; j < p; ++j) {
    w_bar[j] = fit.w_hat[j] - scale * correction[j];
  }
  return w_bar;
}

double p_value(double w_bar_j, double tau, double inv_diag_j) {
  if (!(tau > 0.0) || !(inv_diag_j > 0.0)) {
    throw std::invalid_argument("p_value: tau and inv_diag must be positive");
  }
  const double t = std::abs(w_bar_j) / (tau * std::sqrt(inv_diag_j));
  // 2(1 - Phi(t)) without cancellation in the tail.
  return std::erfc(t / std::sqrt(2.0));
}

std::pair<double, double> confidence_interval(double w_bar_j, double tau,
                                              double inv_diag_j, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("confidence_interval: level must be in (0,1)");
  }
  const double half = normal_quantile(1.0 - level / 2.0) * tau *
                      std::sqrt(inv_diag_j);
  return {w_bar_j - half, w_bar_j + half};
}

InferenceReport make_report(const FitResult& fit, const Dataset& dataset,
                            const LossModel& loss,
                            const CovarianceFactors& factors, double zeta,
                            double tau, double level) {
  const std::size_t p = fit.w_hat.size();
  InferenceReport report;
  report.w_hat = fit.w_hat;
  report.w_bar = debias(fit, dataset, loss, factors, zeta);
  report.tau = tau;
  report.level = level;
  report.std_err.resize(p);
  report.p_values.resize(p);
  report.ci_lower.resize(p);
  report.ci_upper.resize(p);
  report.rejected.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    report.std_err[j] = tau * std::sqrt(factors.inv_diag[j]);
    report.p_values[j] = p_value(report.w_bar[j], tau, factors.inv_diag[j]);
    const auto [lo, hi] =
        confidence_interval(report.w_bar[j], tau, factors.inv_diag[j], level);
    report.ci_lower[j] = lo;
    report.ci_upper[j] = hi;
    report.rejected[j] = report.p_values[j] < level;
  }
  return report;
}

double empirical_precision(const Vector& w, const Dataset& test) {
  const std::size_t n = test.x.rows();
  const std::size_t p = test.x.cols();
  if (n == 0) {
    throw std::invalid_argument("empirical_precision: empty test set");
  }
  if (w.size() != p) {
    throw std::invalid_argument("empirical_precision: dimension mismatch");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (test.y[i] * kernels::dot(test.x.row(i), w.data(), p) > 0.0) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

double empirical_coverage(const std::vector<InferenceReport>& reports,
                          const Vector& truth) {
  if (reports.empty()) {
    throw std::invalid_argument("empirical_coverage: no reports");
  }
  const std::size_t p = truth.size();
  std::size_t covered = 0;
  std::size_t total = 0;
  double standardized = 0.0;
  for (const InferenceReport& rep : reports) {
    if (rep.w_bar.size() != p) {
      throw std::invalid_argument("empirical_coverage: dimension mismatch");
    }
    for (std::size_t j = 0; j < p; ++j) {
      if (rep.ci_lower[j] <= truth[j] && truth[j] <= rep.ci_upper[j]) {
        ++covered;
      }
      standardized += std::abs(rep.w_bar[j] - truth[j]) / rep.std_err[j];
      ++total;
    }
  }
  if (standardized / static_cast<double>(total) > 5.0) {
    throw std::runtime_error(
        "empirical_coverage: truth is on a different scale than the estimates "
        "(mean standardized residual > 5)");
  }
  return static_cast<double>(covered) / static_cast<double>(total);
}

double empirical_power(const std::vector<InferenceReport>& reports,
                       const Vector& truth) {
  if (reports.empty()) {
    throw std::invalid_argument("empirical_power: no reports");
  }
  std::size_t nonzero = 0;
  for (double t : truth) {
    if (t != 0.0) ++nonzero;
  }
  if (nonzero == 0) {
    throw std::invalid_argument("empirical_power: truth has no nonzero coordinates");
  }
  std::size_t rejected = 0;
  std::size_t total = 0;
  for (const InferenceReport& rep : reports) {
    if (rep.rejected.size() != truth.size()) {
      throw std::invalid_argument("empirical_power: dimension mismatch");
    }
    for (std::size_t j = 0; j < truth.size(); ++j) {
      if (truth[j] != 0.0) {
        if (rep.rejected[j]) ++rejected;
        ++total;
      }
    }
  }
  return static_cast<double>(rejected) / static_cast<double>(total);
}

void write_report_csv(const InferenceReport& report, const Vector& truth,
                      const std::string& path) {
  CsvWriter csv(path, {"coordinate", "w_hat", "w_bar", "std_err", "p_value",
                       "ci_lower", "ci_upper", "truth", "rejected"});
  for (std::size_t j = 0; j < report.w_bar.size(); ++j) {
    csv.write_row({std::to_string(j), csv_num(report.w_hat[j]),
                   csv_num(report.w_bar[j]), csv_num(report.std_err[j]),
                   csv_num(report.p_values[j]), csv_num(report.ci_lower[j]),
                   csv_num(report.ci_upper[j]), csv_num(truth[j]),
                   report.rejected[j] ? "1" : "0"});
  }
}

}  // namespace gmix
