#include "gmix/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

namespace gmix::kernels {

namespace {

using DotFn = double (*)(const double*, const double*, std::size_t);
using AxpyFn = void (*)(std::size_t, double, const double*, double*);

struct Dispatch {
  Isa isa = Isa::Scalar;
  DotFn dot = detail::dot_scalar;
  AxpyFn axpy = detail::axpy_scalar;
};

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(__aarch64__)
      return true;  // NEON is baseline on aarch64
#else
      return false;
#endif
  }
  return false;
}

Dispatch make_dispatch(Isa isa) {
  Dispatch d;
  d.isa = isa;
  switch (isa) {
    case Isa::Scalar:
      d.dot = detail::dot_scalar;
      d.axpy = detail::axpy_scalar;
      break;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      d.dot = detail::dot_avx2;
      d.axpy = detail::axpy_avx2;
#endif
      break;
    case Isa::Neon:
#if defined(__aarch64__)
      d.dot = detail::dot_neon;
      d.axpy = detail::axpy_neon;
#endif
      break;
  }
  return d;
}

Isa pick_default_isa() {
  if (const char* env = std::getenv("GMIX_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::Scalar;
    if (std::strcmp(env, "avx2") == 0 && cpu_supports(Isa::Avx2)) return Isa::Avx2;
    if (std::strcmp(env, "neon") == 0 && cpu_supports(Isa::Neon)) return Isa::Neon;
  }
  if (cpu_supports(Isa::Avx2)) return Isa::Avx2;
  if (cpu_supports(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

Dispatch& dispatch() {
  static Dispatch d = make_dispatch(pick_default_isa());
  return d;
}

}  // namespace

Isa active_isa() { return dispatch().isa; }

bool isa_available(Isa isa) { return cpu_supports(isa); }

void force_isa(Isa isa) {
  if (!cpu_supports(isa)) {
    throw std::invalid_argument(std::string("kernel ISA unavailable: ") + isa_name(isa));
  }
  dispatch() = make_dispatch(isa);
}

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "?";
}

double dot(const double* x, const double* y, std::size_t n) {
  return dispatch().dot(x, y, n);
}

void axpy(std::size_t n, double a, const double* x, double* y) {
  dispatch().axpy(n, a, x, y);
}

namespace detail {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_scalar(std::size_t n, double a, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

}  // namespace detail

}  // namespace gmix::kernels
