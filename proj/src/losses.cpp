#include "gmix/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace gmix {

const char* loss_kind_name(LossKind kind) {
  return kind == LossKind::Logistic ? "logistic" : "hinge";
}

LossKind parse_loss_kind(const std::string& name) {
  if (name == "logistic") return LossKind::Logistic;
  if (name == "hinge") return LossKind::Hinge;
  throw std::invalid_argument("unknown loss kind: " + name);
}

namespace {

// 1/(1+e^u) without overflow on either tail.
double sigmoid_neg(double u) {
  if (u >= 0.0) {
    const double e = std::exp(-u);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(u));
}

}  // namespace

namespace loss {

double value(const LossModel& model, double u) {
  if (model.kind == LossKind::Logistic) {
    // log(1 + e^{-u}) in softplus form.
    if (u >= 0.0) {
      return std::log1p(std::exp(-u));
    }
    return -u + std::log1p(std::exp(u));
  }
  return u < 1.0 ? 1.0 - u : 0.0;
}

double derivative(const LossModel& model, double u) {
  if (model.kind == LossKind::Logistic) {
    return -sigmoid_neg(u);
  }
  return u < 1.0 ? -1.0 : 0.0;
}

}  // namespace loss

double prox(const LossModel& model, const ProxQuery& query) {
  const double m = query.m;
  const double q = query.q;
  if (!(q > 0.0)) {
    throw std::invalid_argument("prox: q must be positive");
  }

  if (model.kind == LossKind::Hinge) {
    // Three regimes of the piecewise-quadratic objective.
    if (m > 1.0) return m;
    if (m >= 1.0 - q) return 1.0;
    return m + q;
  }

  // Logistic. The minimizer solves u - m = q/(1+e^u). Work in d = u - m so
  // every quantity scales with q and the subtraction is exact:
  //   g(d) = d - q * sigmoid(-(m+d)),  g increasing, root in (0, q).
  // Newton safeguarded by bisection: a step is accepted only when it stays in
  // the bracket and keeps shrinking geometrically, otherwise the bracket is
  // halved, which bounds the iteration count.
  double lo = 0.0;
  double hi = q;
  double d = q * sigmoid_neg(m);  // fixed-point iterate as the initial guess
  if (!(d > lo && d < hi)) {
    d = 0.5 * (lo + hi);
  }
  const double tol = 1e-14 * q;
  double step = hi - lo;
  double step_old = step;

  for (int iter = 0; iter < 200; ++iter) {
    const double s = sigmoid_neg(m + d);
    const double g = d - q * s;
    if (std::abs(g) <= tol) {
      return m + d;
    }
    if (g > 0.0) {
      hi = d;
    } else {
      lo = d;
    }
    if (hi - lo <= 1e-16 * q) {
      return m + 0.5 * (lo + hi);
    }
    const double gp = 1.0 + q * s * (1.0 - s);
    const double next = d - g / gp;
    step_old = step;
    if (std::abs(2.0 * g) > std::abs(step_old * gp) || !(next > lo && next < hi)) {
      step = 0.5 * (hi - lo);
      d = lo + step;
    } else {
      step = std::abs(d - next);
      d = next;
    }
  }
  throw std::runtime_error("prox: logistic root-finder failed to converge");
}

}  // namespace gmix
