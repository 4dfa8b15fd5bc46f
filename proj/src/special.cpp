#include "qchaos/special.hpp"

#include <cmath>

namespace qchaos::fn {
namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

/// Ascending power series in extended precision. Alternating with heavy
/// cancellation for x moderately large, so the 64-bit mantissa of long
/// double buys roughly three extra digits over plain double.
double bessel_series(int k, double x) {
  const long double half = 0.5L * static_cast<long double>(x);
  long double term = 1.0L;
  for (int i = 1; i <= k; ++i) term *= half / i;
  long double sum = 0.0L;
  const long double ratio2 = half * half;
  for (int i = 0; i < 400; ++i) {
    sum += term;
    term *= -ratio2 / (static_cast<long double>(i + 1) *
                       static_cast<long double>(k + i + 1));
    if (std::abs(term) < std::abs(sum) * 1e-21L + 1e-320L) break;
  }
  return static_cast<double>(sum);
}

/// Hankel asymptotic expansion, truncated at its smallest term. Returns
/// false when that tail bound is too large to certify 1e-13 accuracy.
bool bessel_asymptotic(int k, double x, double* out) {
  const double mu = 4.0 * static_cast<double>(k) * k;
  double p = 1.0, q = 0.0;
  double a = 1.0;  // running a_j / x^j
  double prev = 1e300, tail = 1.0;
  for (int j = 1; j <= 60; ++j) {
    const double odd = 2.0 * j - 1.0;
    a *= (mu - odd * odd) / (8.0 * j * x);
    const double mag = std::abs(a);
    if (mag >= prev) break;  // divergent tail reached
    prev = mag;
    tail = mag;
    const int half_j = j / 2;
    const double sign = (half_j % 2 == 0) ? 1.0 : -1.0;
    if (j % 2 == 1) {
      q += ((j / 2) % 2 == 0 ? 1.0 : -1.0) * a;
    } else {
      p += sign * a;
    }
    if (mag < 1e-18) break;
  }
  if (tail > 1e-13) return false;
  const double omega = x - 0.5 * k * kPi - 0.25 * kPi;
  *out = std::sqrt(2.0 / (kPi * x)) *
         (std::cos(omega) * p - std::sin(omega) * q);
  return true;
}

}  // namespace

double bessel_j(int k, double x) {
  if (k < 0) throw InvalidParameterError("Bessel order must be >= 0");
  if (!(x >= 0)) throw InvalidParameterError("Bessel argument must be >= 0");
  if (x <= 12.0) return bessel_series(k, x);
  double val;
  if (bessel_asymptotic(k, x, &val)) return val;
  return bessel_series(k, x);
}

double bessel_zero(int k, int m) {
  if (m < 1) throw InvalidParameterError("zero index must be >= 1");
  if (k < 0) throw InvalidParameterError("Bessel order must be >= 0");
  // Zeros of J_k lie beyond x ~ k; scan for the m-th sign change.
  const double limit = 10.0 * (m + k) + 10.0;
  const double step = 0.2;
  double x0 = std::max(0.1, 0.9 * k);
  double f0 = bessel_j(k, x0);
  int found = 0;
  double lo = 0, hi = 0;
  for (double x1 = x0 + step; x1 <= limit; x1 += step) {
    const double f1 = bessel_j(k, x1);
    if ((f0 > 0) != (f1 > 0)) {
      ++found;
      if (found == m) {
        lo = x0;
        hi = x1;
        break;
      }
    }
    x0 = x1;
    f0 = f1;
  }
  if (found < m)
    throw InternalError("Bessel zero bracket not found below 10(m+k)");
  double flo = bessel_j(k, lo);
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    const double fm = bessel_j(k, mid);
    if ((flo > 0) == (fm > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double hermite_function(int n, double xi) {
  if (n < 0) throw InvalidParameterError("Hermite index must be >= 0");
  const double phi0 = std::pow(kPi, -0.25) * std::exp(-0.5 * xi * xi);
  if (n == 0) return phi0;
  double prev = phi0;
  double cur = std::sqrt(2.0) * xi * phi0;
  for (int j = 1; j < n; ++j) {
    const double next = std::sqrt(2.0 / (j + 1)) * xi * cur -
                        std::sqrt(static_cast<double>(j) / (j + 1)) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

Quadrature gauss_legendre(int n) {
  if (n < 1) throw InvalidParameterError("quadrature size must be >= 1");
  Quadrature q;
  q.nodes.resize(n);
  q.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Chebyshev-like initial guess, then Newton on P_n.
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    q.nodes[i] = -x;
    q.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    q.weights[i] = w;
    q.weights[n - 1 - i] = w;
  }
  return q;
}

}  // namespace qchaos::fn
