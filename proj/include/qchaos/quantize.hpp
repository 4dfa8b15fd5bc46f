// Discrete t-quantization of phase-space symbols on the periodic grid:
// operator construction, products with symbol-level expansions, commutator
// and positivity checks, and the uncertainty-inequality probe.
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "qchaos/grid.hpp"
#include "qchaos/io.hpp"

namespace qchaos::qz {

/// Phase-space symbol a(x,p) with optional analytic partials (used for
/// Poisson brackets; central differences with a Richardson consistency
/// check stand in when they are absent). support_x/support_p declare
/// half-widths outside which the symbol is negligible; leave infinite for
/// symbols (polynomials etc.) whose use the caller band-limits by
/// construction.
struct SymbolField {
  std::function<std::complex<double>(double, double)> eval;
  std::function<std::complex<double>(double, double)> d_dx;
  std::function<std::complex<double>(double, double)> d_dp;
  double support_x = std::numeric_limits<double>::infinity();
  double support_p = std::numeric_limits<double>::infinity();
  bool real_valued = false;
  std::string note;
};

struct QOperator {
  Eigen::MatrixXcd matrix;
  qgrid::GridSpec grid;
  bool hermitian = false;
};

/// Builds the N x N matrix of the t-quantized symbol,
///   A[m,n] = (1/N) sum_k a(x_n + t d dx, p_k) e^{2 pi i k d / N},
/// for t in {0, 1/2, 1}, where d is the displacement m-n wrapped to
/// [-N/2, N/2): interpolation points are taken the short way around the
/// circle (for interior pairs this is the usual t x_m + (1-t) x_n), and
/// the antipodal slot averages its two equally-short midpoints so that
/// the midpoint rule (t = 1/2) of a real symbol is exactly hermitian.
/// Throws AliasingError when a finite declared support exceeds the box or
/// the momentum band.
QOperator quantize(const SymbolField& a, const qgrid::GridSpec& g, double t);

/// Largest singular value (spectral norm).
double operator_norm(const Eigen::MatrixXcd& m);

/// Poisson bracket {a,b} = da/dx db/dp - da/dp db/dx (so {x,p} = 1), the
/// classical convention under which [Op(a), Op(b)] = i h Op({a,b}) for
/// linear symbols, matching [Op(x), Op(p)] = i h I.
std::complex<double> poisson_bracket(const SymbolField& a,
                                     const SymbolField& b, double x,
                                     double p);

struct MoyalResult {
  QOperator product;  // Op(a) Op(b), midpoint quantization
  double err_order0;  // ||Op(a)Op(b) - Op(ab)||
  double err_order1;  // ||Op(a)Op(b) - Op(ab + (ih/2){a,b})||
};

/// Compares the operator product against its zeroth- and first-order
/// symbol expansions. Throws NeedsDerivativesError when a symbol has no
/// analytic partials and the finite-difference fallback fails its
/// consistency check.
MoyalResult moyal_product(const SymbolField& a, const SymbolField& b,
                          const qgrid::GridSpec& g);

struct SlopeCheck {
  std::vector<double> h_list;
  std::vector<double> errors;
  double slope;  // least-squares slope of log(error) vs log(h); NaN when
                 // any error vanishes to roundoff (exact identities)
};

/// Remainder ||[Op(a),Op(b)] - i h Op({a,b})|| per grid, plus its
/// log-log slope across the supplied grids (one grid per h).
SlopeCheck commutator_check(const SymbolField& a, const SymbolField& b,
                            const std::vector<qgrid::GridSpec>& grids);

struct UncertaintyCheck {
  double lhs;    // (h/2) ||f|| ||F_h f||
  double rhs;    // ||x f|| ||p F_h f||
  double ratio;  // rhs / lhs, >= 1 up to grid noise
};

/// Evaluates both sides of the uncertainty inequality for a state on the
/// grid. Throws InvalidParameterError for the zero state.
UncertaintyCheck uncertainty_check(const qgrid::CVec& f,
                                   const qgrid::GridSpec& g);

struct GardingResult {
  std::vector<double> h_list;
  std::vector<double> min_eigenvalue;  // of hermitian Op_{1/2}(a), per grid
};

/// Smallest eigenvalue of the midpoint quantization per grid. For a real
/// symbol bounded below by c > 0 the values approach >= c as h decreases.
/// Throws InvalidParameterError for symbols not declared real.
GardingResult garding_check(const SymbolField& a,
                            const std::vector<qgrid::GridSpec>& grids);

/// JSON record for one named check: h list, per-h errors, slope, verdict.
std::string check_report_json(const std::string& name,
                              const std::vector<double>& h_list,
                              const std::vector<double>& errors, double slope,
                              bool pass);

/// Diagnostic rasters over the grid's phase rectangle
/// [-L/2, L/2] x [-p_max, p_max].
io::Raster symbol_raster(const SymbolField& a, const qgrid::GridSpec& g,
                         int nx, int np);

/// Coherent-state overlap map |<g_{x0,p0}, f>|^2 (Husimi-style density).
io::Raster husimi_raster(const qgrid::CVec& f, const qgrid::GridSpec& g,
                         int nx, int np);

Eigen::VectorXcd to_eigen(const qgrid::CVec& f);
qgrid::CVec from_eigen(const Eigen::VectorXcd& v);

}  // namespace qchaos::qz
