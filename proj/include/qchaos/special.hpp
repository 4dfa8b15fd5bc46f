// Special-function kernels: integer-order Bessel J and its zeros, normalized
// Hermite functions, and Gauss-Legendre quadrature rules.
#pragma once

#include <vector>

#include "qchaos/common.hpp"

namespace qchaos::fn {

/// Bessel function of the first kind, integer order k >= 0, at x >= 0.
/// Power series (extended precision) for small arguments; the large-argument
/// asymptotic expansion is used only when its optimally truncated tail is
/// negligible, otherwise the series takes over.
double bessel_j(int k, double x);

/// m-th positive zero of J_k (m >= 1), bracketed by a sign-change scan and
/// refined by bisection to an absolute tolerance of 1e-12.
double bessel_zero(int k, int m);

/// Normalized Hermite function phi_n(xi) = H_n(xi) e^{-xi^2/2} /
/// sqrt(2^n n! sqrt(pi)), computed by the normalized three-term recurrence so
/// that no intermediate overflows occur for any n.
double hermite_function(int n, double xi);

struct Quadrature {
  std::vector<double> nodes;    // in (-1, 1), ascending
  std::vector<double> weights;  // positive, summing to 2
};

/// n-point Gauss-Legendre rule on [-1, 1] (Newton iteration on P_n).
Quadrature gauss_legendre(int n);

}  // namespace qchaos::fn
