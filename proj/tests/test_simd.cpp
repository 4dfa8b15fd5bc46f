// Equivalence tests: every SIMD kernel variant must agree with the scalar
// reference on random data, across sizes that exercise main loops and tails.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "qchaos/rng.hpp"
#include "qchaos/simd.hpp"

using namespace qchaos;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double scale) {
  std::vector<double> v(n);
  for (auto& x : v) x = scale * (2.0 * rng.uniform() - 1.0);
  return v;
}

void check_close(double a, double b, double rel) {
  const double scale = std::max({std::abs(a), std::abs(b), 1.0});
  CHECK(std::abs(a - b) <= rel * scale);
}

}  // namespace

TEST_CASE("kernel variants agree with scalar reference") {
  Rng rng(20140612);
  const auto& ref = simd::scalar_kernels();
  // Test both tables that can be dispatched; on non-AVX2 hardware
  // avx2_kernels() aliases scalar and the comparison is trivially exact.
  const simd::Kernels* variants[] = {&simd::avx2_kernels(), &simd::active()};

  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 64u, 1023u, 1024u, 4097u}) {
    auto a = random_vec(rng, n, 2.0);
    auto b = random_vec(rng, n, 1.5);
    auto c = random_vec(rng, n, 0.7);
    for (const auto* v : variants) {
      check_close(v->dot(a.data(), b.data(), n), ref.dot(a.data(), b.data(), n),
                  1e-12);
      double ab1 = 0, ac1 = 0, ab2 = 0, ac2 = 0;
      v->dual_dot(a.data(), b.data(), c.data(), n, &ab1, &ac1);
      ref.dual_dot(a.data(), b.data(), c.data(), n, &ab2, &ac2);
      check_close(ab1, ab2, 1e-12);
      check_close(ac1, ac2, 1e-12);
      check_close(v->sum_sq(a.data(), n), ref.sum_sq(a.data(), n), 1e-12);

      auto y1 = c, y2 = c;
      v->axpy(y1.data(), 0.37, a.data(), n);
      ref.axpy(y2.data(), 0.37, a.data(), n);
      for (std::size_t i = 0; i < n; ++i) check_close(y1[i], y2[i], 1e-14);
    }
  }
}

TEST_CASE("dual_dot matches two single dots") {
  Rng rng(7);
  const auto& k = simd::active();
  auto a = random_vec(rng, 513, 1.0);
  auto b = random_vec(rng, 513, 1.0);
  auto c = random_vec(rng, 513, 1.0);
  double ab = 0, ac = 0;
  k.dual_dot(a.data(), b.data(), c.data(), 513, &ab, &ac);
  check_close(ab, k.dot(a.data(), b.data(), 513), 1e-12);
  check_close(ac, k.dot(a.data(), c.data(), 513), 1e-12);
}

TEST_CASE("sum_abs2 equals explicit complex norm") {
  Rng rng(99);
  std::vector<std::complex<double>> z(257);
  double expect = 0.0;
  for (auto& v : z) {
    v = {rng.normal(), rng.normal()};
    expect += std::norm(v);
  }
  check_close(simd::sum_abs2(z.data(), z.size()), expect, 1e-12);
}

TEST_CASE("dispatch reports a valid variant") {
  const auto name = simd::active_name();
  CHECK((name == "scalar" || name == "avx2"));
  if (name == "avx2") CHECK(simd::cpu_has_avx2());
}

TEST_CASE("exact results on integer-valued data") {
  // Integer-valued doubles of modest size sum exactly in any order, so all
  // variants must agree bitwise here.
  std::vector<double> a(1000), b(1000);
  for (int i = 0; i < 1000; ++i) {
    a[i] = (i % 17) - 8;
    b[i] = (i % 5) - 2;
  }
  const double s_ref = simd::scalar_kernels().dot(a.data(), b.data(), 1000);
  const double s_v = simd::avx2_kernels().dot(a.data(), b.data(), 1000);
  CHECK(s_ref == s_v);
}
