// Level-counting statistics: asymptotic counting fits, Monte Carlo
// phase-space volumes, spectral unfolding, and nearest-neighbor spacing
// tests against the Poisson and random-matrix reference laws.
#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qchaos/common.hpp"
#include "qchaos/geometry.hpp"
#include "qchaos/rng.hpp"

namespace qchaos::stats {

/// Smooth counting model N(lambda) ~ c1*lambda + c2*sqrt(lambda) + c3.
struct WeylCoeffs {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;

  double operator()(double lambda) const {
    return c1 * lambda + c2 * std::sqrt(lambda) + c3;
  }
};

/// A sorted batch of eigenvalues from one source, with the fitted smooth
/// counting model attached once weyl_fit has run.
class SpectrumWindow {
 public:
  /// Validates: every eigenvalue finite and >= 0, sequence nondecreasing.
  /// `source` is a free-form descriptor ("rectangle 1x1 dirichlet", ...).
  /// For semiclassical spectra, pass the h and spatial dimension they were
  /// computed at; billiard spectra leave both unset.
  explicit SpectrumWindow(std::vector<double> eigenvalues,
                          std::string source = {},
                          std::optional<double> h = std::nullopt,
                          std::optional<int> dim = std::nullopt);

  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  const std::string& source() const { return source_; }
  std::optional<double> h() const { return h_; }
  std::optional<int> dim() const { return dim_; }

  /// Unfolding coefficients; empty until weyl_fit has been called.
  const std::optional<WeylCoeffs>& unfolding() const { return unfolding_; }
  void set_unfolding(WeylCoeffs c) { unfolding_ = c; }

 private:
  std::vector<double> eigenvalues_;
  std::string source_;
  std::optional<double> h_;
  std::optional<int> dim_;
  std::optional<WeylCoeffs> unfolding_;
};

/// Number of eigenvalues strictly below lambda.
int count_levels(const SpectrumWindow& w, double lambda);

struct WeylFit {
  WeylCoeffs coeffs;
  double reference_c1;   // area / (4 pi) for the supplied domain
  double relative_error; // |c1 - reference| / reference
};

/// Least-squares fit of the counting staircase (midpoint convention:
/// N(lambda_i) := i + 1/2) to c1*lambda + c2*sqrt(lambda) + c3, compared
/// against the domain's leading-order coefficient area/(4 pi). Stores the
/// coefficients on the window for later unfolding.
/// Throws InsufficientDataError with fewer than 50 levels.
WeylFit weyl_fit(SpectrumWindow& w, const geom::Domain& d);

/// Unfolded nearest-neighbor spacings, sorted ascending. The empirical CDF
/// at the i-th sorted spacing is (i+1)/size.
class SpacingSample {
 public:
  /// Validates: spacings finite and >= 0. Sorts them.
  static SpacingSample from_spacings(std::vector<double> s);

  const std::vector<double>& sorted_spacings() const { return spacings_; }
  double mean() const { return mean_; }
  double ecdf(double s) const;

 private:
  std::vector<double> spacings_;
  double mean_ = 0.0;
};

/// Maps eigenvalues through the fitted smooth counting model and returns
/// the consecutive differences. Runs weyl_fit first if the window has no
/// stored coefficients. The construction forces mean spacing ~ 1; a mean
/// further than 2% from 1 indicates a bad fit and throws InternalError.
SpacingSample unfold(SpectrumWindow& w, const geom::Domain& d);

/// Reference spacing laws. The Poisson law e^{-s} models generic
/// integrable spectra; the Wigner surmise (pi/2) s e^{-pi s^2/4} stands in
/// for the Gaussian orthogonal ensemble. Both have unit mean.
double poisson_spacing_pdf(double s);
double poisson_spacing_cdf(double s);
double wigner_spacing_pdf(double s);
double wigner_spacing_cdf(double s);

enum class SpacingVerdict { Poisson, GOE, Inconclusive };

struct SpacingTest {
  double ks_poisson;  // sup-norm distance of the ECDF to 1 - e^{-s}
  double ks_goe;      // ... to the Wigner surmise CDF
  SpacingVerdict verdict;
};

/// Kolmogorov-Smirnov distances of the sample to both reference laws.
/// Verdict names the nearer law when the two distances differ by more than
/// 0.05, otherwise Inconclusive. Throws InsufficientDataError below 100
/// spacings.
SpacingTest spacing_test(const SpacingSample& sample);

struct VolumeEstimate {
  double volume;
  double standard_error;
  std::size_t hits;
};

/// Monte Carlo volume of {y in box : a <= symbol(y) <= b} by uniform
/// sampling. box_lo/box_hi give the axis-aligned box (one entry per
/// coordinate). Throws InvalidParameterError for malformed boxes, ranges,
/// or fewer than 1e5 samples; throws BoxTooSmallError when at least 0.1%
/// of the hits land within 1e-3 of a box face (in units of that face's
/// extent), i.e. when the level region appears to touch the box boundary.
VolumeEstimate phase_volume(
    const std::function<double(const std::vector<double>&)>& symbol,
    const std::vector<double>& box_lo, const std::vector<double>& box_hi,
    double a, double b, std::size_t samples, Rng& rng);

/// CSV of the counting staircase: header "lambda,N", one row per level.
std::string counting_csv(const SpectrumWindow& w);

/// CSV of the spacing ECDF: header "s,ecdf", one row per sorted spacing.
std::string spacing_csv(const SpacingSample& s);

/// JSON record of a spacing test: both distances and the verdict string.
std::string verdict_json(const SpacingTest& t);

}  // namespace qchaos::stats
