// AVX2+FMA kernel variants. This translation unit is the only one built with
// AVX2 codegen; selection happens at runtime in simd_dispatch.cpp.
#include "qchaos/simd.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

namespace qchaos::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  const std::size_t n8 = n & ~std::size_t(7);
  for (; i < n8; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void dual_dot_avx2(const double* a, const double* b, const double* c,
                   std::size_t n, double* ab, double* ac) {
  __m256d accb = _mm256_setzero_pd();
  __m256d accc = _mm256_setzero_pd();
  std::size_t i = 0;
  const std::size_t n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4) {
    const __m256d va = _mm256_loadu_pd(a + i);
    accb = _mm256_fmadd_pd(va, _mm256_loadu_pd(b + i), accb);
    accc = _mm256_fmadd_pd(va, _mm256_loadu_pd(c + i), accc);
  }
  double sb = hsum(accb), sc = hsum(accc);
  for (; i < n; ++i) {
    sb += a[i] * b[i];
    sc += a[i] * c[i];
  }
  *ab = sb;
  *ac = sc;
}

double sum_sq_avx2(const double* a, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  const std::size_t n8 = n & ~std::size_t(7);
  for (; i < n8; i += 8) {
    const __m256d v0 = _mm256_loadu_pd(a + i);
    const __m256d v1 = _mm256_loadu_pd(a + i + 4);
    acc0 = _mm256_fmadd_pd(v0, v0, acc0);
    acc1 = _mm256_fmadd_pd(v1, v1, acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * a[i];
  return acc;
}

void axpy_avx2(double* y, double s, const double* x, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  const std::size_t n4 = n & ~std::size_t(3);
  for (; i < n4; i += 4) {
    const __m256d vy = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(vs, _mm256_loadu_pd(x + i), vy));
  }
  for (; i < n; ++i) y[i] += s * x[i];
}

}  // namespace

const Kernels& avx2_kernels() {
  static const Kernels k{dot_avx2, dual_dot_avx2, sum_sq_avx2, axpy_avx2};
  return k;
}

}  // namespace qchaos::simd

#else  // built without AVX2 support: alias to scalar so the symbol exists

namespace qchaos::simd {
const Kernels& avx2_kernels() { return scalar_kernels(); }
}  // namespace qchaos::simd

#endif
