// Scalar reference kernels: the correctness baseline every SIMD variant is
// equivalence-tested against.
#include "qchaos/simd.hpp"

namespace qchaos::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void dual_dot_scalar(const double* a, const double* b, const double* c,
                     std::size_t n, double* ab, double* ac) {
  double acc_b = 0.0, acc_c = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc_b += a[i] * b[i];
    acc_c += a[i] * c[i];
  }
  *ab = acc_b;
  *ac = acc_c;
}

double sum_sq_scalar(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * a[i];
  return acc;
}

void axpy_scalar(double* y, double s, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += s * x[i];
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k{dot_scalar, dual_dot_scalar, sum_sq_scalar,
                         axpy_scalar};
  return k;
}

}  // namespace qchaos::simd
