#pragma once

#include <string>

namespace gmix {

enum class LossKind { Logistic, Hinge };

const char* loss_kind_name(LossKind kind);
LossKind parse_loss_kind(const std::string& name);

struct LossModel {
  LossKind kind = LossKind::Logistic;
};

namespace loss {

// Logistic: log(1 + exp(-u)), evaluated softplus-style so it stays finite and
// accurate out to |u| ~ 700. Hinge: (1 - u)_+.
double value(const LossModel& model, double u);

// Logistic: -1/(1+e^u). Hinge: -1 for u < 1, 0 for u >= 1 (the kink takes the
// right subgradient).
double derivative(const LossModel& model, double u);

}  // namespace loss

struct ProxQuery {
  double m = 0.0;  // shift of the quadratic term
  double q = 1.0;  // prox scale, must be positive
};

// argmin_u V(u) + (u - m)^2 / (2q). Unique by strict convexity. Logistic uses
// a bracketed Newton iteration on q/(1+e^u) = u - m; hinge is closed form.
double prox(const LossModel& model, const ProxQuery& query);

}  // namespace gmix
