#pragma once
// Equidistribution statistics for eigenfunction families: matrix elements of
// observables in an eigenbasis, the window variance of those elements, the
// density-one subsequence the variance bound extracts, mass ratios against
// subregions, and a directional score that singles out bouncing-ball modes
// on the stadium.

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qchaos/common.hpp"
#include "qchaos/geometry.hpp"
#include "qchaos/grid.hpp"
#include "qchaos/io.hpp"
#include "qchaos/mps.hpp"
#include "qchaos/quantize.hpp"

namespace qchaos::qe {

/// Quadrature node set over a planar domain: paired points and weights.
/// All integrals in this module are plain weighted sums over such a set, so
/// two quantities agree exactly whenever they are computed over the same
/// set.
struct Quadrature2D {
  std::vector<Vec2> points;
  std::vector<double> weights;

  double total_weight() const;  // = the represented area
};

/// Midpoint-rule quadrature: nx-by-ny cells over the bounding box, keeping
/// the cells whose centers lie inside the domain, each with its full cell
/// area as weight. Exact for the trigonometric products of rectangle modes;
/// for Dirichlet eigenfunctions generally, the mass near the cut boundary
/// cells is O((k.cell)^2) small, so norms carry through to ~1e-4.
Quadrature2D raster_quadrature(const geom::Domain& d, int nx, int ny);

/// Uniform Monte Carlo quadrature: n points rejection-sampled from the
/// bounding box, each weighted area/n.
Quadrature2D mc_quadrature(const geom::Domain& d, int n, std::uint64_t seed);

/// The quadrature the given solver configuration normalized its
/// eigenfunctions with. Matrix elements of those eigenfunctions should use
/// this set: on it their norm is 1 to machine precision instead of up to
/// Monte Carlo error.
Quadrature2D normalization_quadrature(const geom::Domain& d,
                                      const mps::MpsConfig& cfg);

/// A bounded position-multiplier observable a(x, y) together with its
/// reference average over the domain (the value equidistribution drives
/// matrix elements toward, and the one the variance subtracts).
struct Observable {
  std::string name;
  std::function<double(Vec2)> value;
  double average = 0.0;
  bool mean_zero = false;
};

/// Weighted average of a over the quadrature's region.
double domain_average(const std::function<double(Vec2)>& a,
                      const Quadrature2D& q);

/// The centered observable a - average (average becomes 0, mean_zero set).
/// Idempotent: centering a centered observable returns it unchanged.
Observable centered(const Observable& a);

/// Matrix element <A phi, phi> = integral of a |phi|^2 for a position
/// multiplier; real by construction. Requires phi normalized on this
/// quadrature: | ||phi|| - 1 | <= 1e-3, else NormalizationError.
double matrix_element(const Observable& a,
                      const std::function<double(Vec2)>& phi,
                      const Quadrature2D& q);

/// Matrix element of a quantized grid symbol on the 1-D engine:
/// <A phi, phi> under the engine's inner product. Same normalization gate.
/// Hermitian operators give values real to roundoff; the complex value is
/// returned so callers can check.
std::complex<double> matrix_element(const qz::QOperator& a,
                                    const qgrid::CVec& phi);

/// Per-mode matrix elements of one observable across a family of modes.
std::vector<double> window_elements(
    const Observable& a,
    const std::vector<std::function<double(Vec2)>>& modes,
    const Quadrature2D& q);

/// The observable compressed to the span of the given modes:
/// row-major n-by-n matrix M[j][k] = integral of a phi_j phi_k. Its trace
/// equals the sum of diagonal matrix elements by construction; against an
/// orthonormal family it reproduces identity when a = 1.
std::vector<double> compressed_matrix(
    const Observable& a,
    const std::vector<std::function<double(Vec2)>>& modes,
    const Quadrature2D& q);

/// Flattened evaluable eigenfunctions of a solved window, multiplicity
/// expanded, ascending with SpectrumWindow::eigenvalues().
std::vector<std::function<double(Vec2)>> window_functions(
    const mps::SpectrumWindow& win);

/// Window variance of matrix elements: epsilon = normalization * sum of
/// |value_k|^2 over the window.
struct VarianceResult {
  double epsilon = 0.0;
  double normalization = 0.0;      // the weight each |value|^2 carried
  std::vector<double> values;      // the per-mode elements the sum used
};

/// Variance from precomputed centered matrix elements with an explicit
/// per-mode weight (billiard windows use 1/#modes; semiclassical families
/// use the volume factor of the underlying calculus). Fewer than 20 modes
/// -> InsufficientDataError.
VarianceResult qe_variance(const std::vector<double>& centered_values,
                           double normalization);

/// Convenience form for billiard windows: computes the per-mode elements of
/// the (already centered: mean_zero required, else InvalidParameterError)
/// observable and weights by 1/#modes.
VarianceResult qe_variance(
    const Observable& a,
    const std::vector<std::function<double(Vec2)>>& modes,
    const Quadrature2D& q);

/// Chebyshev split of a window by matrix-element size: Gamma collects the
/// modes with |value|^2 strictly above sqrt(epsilon), Lambda is the rest.
/// #Gamma/#modes <= sqrt(epsilon) exactly as computed; the density of
/// Lambda is what tends to one under equidistribution.
struct SubsetResult {
  double threshold = 0.0;          // sqrt(epsilon)
  std::vector<bool> in_gamma;
  double gamma_fraction = 0.0;
  double lambda_density = 1.0;
};

SubsetResult density_one_subset(const std::vector<double>& values,
                                double epsilon);

/// L2 mass of phi inside a subregion against the subregion's share of the
/// domain area, both over the same quadrature. A subregion that captures no
/// quadrature weight -> InvalidParameterError.
struct MassRatio {
  double mass = 0.0;           // integral over S of |phi|^2
  double area_fraction = 0.0;  // quadrature weight of S / total weight
  double gap = 0.0;            // mass - area_fraction
};

MassRatio mass_ratio(const std::function<double(Vec2)>& phi,
                     const std::function<bool(Vec2)>& in_subregion,
                     const Quadrature2D& q);

/// Directional spectrum score of a rasterized mode. concentration is the
/// fraction of the raster's 2-D spectral energy (DC excluded) within the
/// +-15 degree cones around the k_y axis. For stadium presets the mode is
/// flagged as a bouncing-ball candidate when its mass in the central
/// rectangle exceeds that rectangle's area share by 0.2 AND concentration
/// exceeds 0.5; domains without a rectangle/cap decomposition flag on
/// concentration alone. Rasters below 64 cells on a side -> ResolutionError.
struct BounceScore {
  double rect_mass = 1.0;      // |phi|^2 fraction inside the straight part
  double rect_fraction = 1.0;  // area share of the straight part
  double concentration = 0.0;
  bool flagged = false;
};

BounceScore bouncing_ball_score(const io::Raster& phi, const geom::Domain& d);

/// Full equidistribution report for one solved window and one observable.
struct QEReport {
  std::string domain;
  std::string observable;
  double lo = 0.0, hi = 0.0;
  std::vector<double> lambdas;
  std::vector<double> values;      // centered matrix elements, per mode
  double epsilon = 0.0;
  std::string normalization;       // which per-mode weight epsilon used
  std::vector<bool> in_gamma;
  double lambda_density = 1.0;
  std::string note;

  std::string to_json() const;     // per-mode rows + window summary
  std::string to_csv() const;      // lambda, value, in_gamma flag
};

QEReport qe_report(const Observable& a, const mps::SpectrumWindow& win,
                   const Quadrature2D& q);

}  // namespace qchaos::qe
