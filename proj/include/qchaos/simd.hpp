// Runtime-dispatched SIMD kernels for the hot inner loops (dot products,
// norms, scaled accumulation). A scalar reference implementation always
// exists; an AVX2 variant is selected at runtime when the CPU supports it.
// Override with QCHAOS_SIMD={auto,scalar,avx2}.
#pragma once

#include <complex>
#include <cstddef>
#include <string>

namespace qchaos::simd {

/// Kernel table. All kernels are pure functions of their argument arrays.
struct Kernels {
  /// sum_i a[i]*b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// sum_i a[i]*b[i] and sum_i a[i]*c[i] in one pass over a.
  void (*dual_dot)(const double* a, const double* b, const double* c,
                   std::size_t n, double* ab, double* ac);
  /// sum_i a[i]^2
  double (*sum_sq)(const double* a, std::size_t n);
  /// y[i] += s * x[i]
  void (*axpy)(double* y, double s, const double* x, std::size_t n);
};

/// Scalar reference kernels (always available).
const Kernels& scalar_kernels();

/// AVX2+FMA kernels; calling them on a CPU without AVX2 is undefined, so go
/// through active() unless you have checked cpu_has_avx2().
const Kernels& avx2_kernels();

/// True when the running CPU supports AVX2 and FMA.
bool cpu_has_avx2();

/// The dispatched kernel table (resolved once, honoring QCHAOS_SIMD).
const Kernels& active();

/// Name of the dispatched variant: "scalar" or "avx2".
std::string active_name();

/// Convenience: sum |z_i|^2 over a complex array (|z|^2 = re^2 + im^2, so
/// this is sum_sq over the interleaved double storage).
inline double sum_abs2(const std::complex<double>* z, std::size_t n) {
  return active().sum_sq(reinterpret_cast<const double*>(z), 2 * n);
}

}  // namespace qchaos::simd
