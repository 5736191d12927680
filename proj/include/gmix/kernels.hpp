#pragma once

#include <cstddef>

namespace gmix::kernels {

// Instruction sets the dispatcher can pick from. Scalar is always available
// and serves as the reference the SIMD variants are equivalence-tested
// against. The dispatcher probes the CPU once; the GMIX_KERNELS environment
// variable ("scalar", "avx2", "neon") overrides the choice at startup.
enum class Isa { Scalar, Avx2, Neon };

Isa active_isa();
bool isa_available(Isa isa);
void force_isa(Isa isa);  // throws std::invalid_argument if unavailable
const char* isa_name(Isa isa);

// sum_i x[i] * y[i]
double dot(const double* x, const double* y, std::size_t n);

// y[i] += a * x[i]
void axpy(std::size_t n, double a, const double* x, double* y);

namespace detail {

double dot_scalar(const double* x, const double* y, std::size_t n);
void axpy_scalar(std::size_t n, double a, const double* x, double* y);

#if defined(__x86_64__) || defined(_M_X64)
double dot_avx2(const double* x, const double* y, std::size_t n);
void axpy_avx2(std::size_t n, double a, const double* x, double* y);
#endif

#if defined(__aarch64__)
double dot_neon(const double* x, const double* y, std::size_t n);
void axpy_neon(std::size_t n, double a, const double* x, double* y);
#endif

}  // namespace detail

}  // namespace gmix::kernels
