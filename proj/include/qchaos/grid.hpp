// Periodic 1-D grid for the discrete semiclassical engine: position and
// momentum lattices tied by the scaled Fourier transform
// F_h(f)(p) = integral e^{-i x p / h} f(x) dx, discretized so that the
// round trip is exact.
#pragma once

#include <complex>
#include <vector>

#include "qchaos/common.hpp"

namespace qchaos::qgrid {

using CVec = std::vector<std::complex<double>>;

/// N grid points x_j = -L/2 + j L/N and momenta p_k = 2 pi h k / L for
/// k in [-N/2, N/2), stored in ascending-k order.
class GridSpec {
 public:
  /// n must be a power of two in [64, 1024]; length and h positive.
  GridSpec(int n, double length, double h);

  int n() const { return n_; }
  double length() const { return length_; }
  double h() const { return h_; }

  double dx() const { return length_ / n_; }
  double x(int j) const { return -0.5 * length_ + j * dx(); }
  double dp() const;
  /// Momentum at array slot i (i = 0..n-1 maps to k = i - n/2).
  double p(int i) const { return dp() * (i - n_ / 2); }
  /// Band edge pi h n / length; the grid resolves |p| < p_max().
  double p_max() const;

 private:
  int n_;
  double length_;
  double h_;
};

/// In-place radix-2 FFT. Forward: A[k] = sum_j a[j] e^{-2 pi i jk/N};
/// inverse includes the 1/N factor. Size must be a power of two.
void fft_inplace(CVec& a, bool inverse);

/// Scaled transform: out[i] ~ integral e^{-i x p_i / h} f(x) dx on the
/// periodic grid (trapezoid-exact for band-limited f). Output in
/// ascending-momentum order.
CVec sft(const CVec& f, const GridSpec& g);

/// Inverse: f(x_j) = (2 pi h)^{-1} sum_k e^{+i x_j p_k / h} F_k dp.
/// isft(sft(f)) reproduces f to machine precision.
CVec isft(const CVec& F, const GridSpec& g);

/// Norm conventions: ||f||^2 = sum |f_j|^2 dx on the position side,
/// ||F||^2 = sum |F_k|^2 dp on the momentum side, so that
/// ||f|| = (2 pi h)^{-1/2} ||sft f|| exactly.
double position_norm(const CVec& f, const GridSpec& g);
double momentum_norm(const CVec& F, const GridSpec& g);

}  // namespace qchaos::qgrid
