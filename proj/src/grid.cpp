#include "qchaos/grid.hpp"

#include <cmath>
#include <numbers>

#include "qchaos/simd.hpp"

namespace qchaos::qgrid {

namespace {
constexpr double kPi = std::numbers::pi;

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }
}  // namespace

GridSpec::GridSpec(int n, double length, double h)
    : n_(n), length_(length), h_(h) {
  if (!power_of_two(n) || n < 64 || n > 1024)
    throw InvalidParameterError(
        "grid: point count must be a power of two in [64, 1024]");
  if (!(length > 0.0) || !std::isfinite(length))
    throw InvalidParameterError("grid: period must be positive");
  if (!(h > 0.0) || !std::isfinite(h))
    throw InvalidParameterError("grid: h must be positive");
}

double GridSpec::dp() const { return 2.0 * kPi * h_ / length_; }
double GridSpec::p_max() const { return kPi * h_ * n_ / length_; }

void fft_inplace(CVec& a, bool inverse) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw InvalidParameterError("fft: size must be a power of two");

  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& z : a) z *= scale;
  }
}

// With x_j = -L/2 + j dx and p_k = 2 pi h k / L, the phase factorizes:
// e^{-i x_j p_k / h} = (-1)^k e^{-2 pi i jk/N}, so the transform is a DFT
// with an alternating sign in k (and symmetrically in j for the inverse).
CVec sft(const CVec& f, const GridSpec& g) {
  const int n = g.n();
  if (static_cast<int>(f.size()) != n)
    throw InvalidParameterError("sft: sample count does not match the grid");
  CVec work = f;
  fft_inplace(work, false);
  CVec out(static_cast<std::size_t>(n));
  for (int k = -n / 2; k < n / 2; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    out[static_cast<std::size_t>(k + n / 2)] =
        g.dx() * sign * work[static_cast<std::size_t>((k + n) % n)];
  }
  return out;
}

CVec isft(const CVec& F, const GridSpec& g) {
  const int n = g.n();
  if (static_cast<int>(F.size()) != n)
    throw InvalidParameterError("isft: sample count does not match the grid");
  CVec work(static_cast<std::size_t>(n));
  for (int k = -n / 2; k < n / 2; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    work[static_cast<std::size_t>((k + n) % n)] =
        sign * F[static_cast<std::size_t>(k + n / 2)];
  }
  fft_inplace(work, true);
  const double scale = static_cast<double>(n) / g.length();
  for (auto& z : work) z *= scale;
  return work;
}

double position_norm(const CVec& f, const GridSpec& g) {
  return std::sqrt(simd::sum_abs2(f.data(), f.size()) * g.dx());
}

double momentum_norm(const CVec& F, const GridSpec& g) {
  return std::sqrt(simd::sum_abs2(F.data(), F.size()) * g.dp());
}

}  // namespace qchaos::qgrid
