// Dirichlet Helmholtz eigensolver for simply connected planar domains by
// the method of particular solutions: exact Helmholtz basis functions,
// boundary + interior collocation, a tension function of lambda whose
// near-zero minima are eigenvalues, and evaluable eigenfunctions.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qchaos/analytic_spectra.hpp"
#include "qchaos/geometry.hpp"
#include "qchaos/io.hpp"

namespace qchaos::mps {

/// Symmetry sector of a desymmetrized solve (parities in x and y about the
/// domain center). `automatic` picks odd_odd for stadium presets and the
/// full domain otherwise.
enum class Sector { automatic, none, odd_odd, even_even, odd_even, even_odd };

std::string sector_name(Sector s);

struct MpsConfig {
  int basis_size = 120;       ///< B: number of Helmholtz basis functions
  int boundary_points = 360;  ///< M_b >= 2B collocation points on the boundary
  int interior_points = 240;  ///< M_i >= B interior collocation points
  double scan_step = 0.0;     ///< lambda step; 0 derives one from Weyl density
  double threshold = 1e-6;    ///< tension below this accepts an eigenvalue
  Sector sector = Sector::automatic;
  std::uint64_t seed = 1;     ///< interior sampling + normalization quadrature
  int normalization_samples = 50000;  ///< Monte Carlo points for ||phi|| = 1
};

/// An eigenfunction as an explicit basis combination, evaluable anywhere in
/// the plane (sector parities are built into the basis functions, so the
/// sector solve's extension to the full domain is automatic).
class Eigenfunction {
 public:
  enum class Basis { fourier_bessel, plane_waves, sector_plane_waves };

  double operator()(Vec2 q) const;

  double lambda = 0.0;
  double wavenumber = 0.0;  ///< sqrt(lambda)
  Basis basis = Basis::plane_waves;
  Vec2 center;                     ///< basis origin
  std::vector<double> angles;      ///< plane-wave directions
  int sign_x = -1, sign_y = -1;    ///< sector parities (-1 odd, +1 even)
  std::vector<double> coef;        ///< layout documented per basis in mps.cpp
};

/// One accepted tension minimum: eigenvalue, residual tension, singular-space
/// dimension, and one normalized eigenfunction per multiplicity.
struct Mode {
  double lambda = 0.0;
  double tension = 0.0;
  int multiplicity = 1;
  /// sup|phi| over fresh boundary points relative to the interior sup.
  double boundary_residual = 0.0;
  std::vector<Eigenfunction> functions;
};

struct SpectrumWindow {
  std::string domain;  ///< preset name
  std::string sector;
  double lo = 0.0, hi = 0.0;
  std::vector<Mode> modes;
  /// Set when the Weyl-predicted count exceeds the found count by > 20%
  /// (adjacent minima likely merged by a too-coarse scan).
  bool merged_warning = false;
  MpsConfig cfg;

  /// {domain, sector, window, eigenvalues[], tension[], cfg}
  std::string to_json() const;
  /// Eigenvalues repeated by multiplicity, ascending.
  std::vector<double> eigenvalues() const;
};

struct TensionCurve {
  std::vector<double> lambdas;
  std::vector<double> tensions;
  std::vector<double> minima;  ///< refined locations (relative tol 1e-9)
  bool merged_warning = false;
};

/// Dense tension scan over [lo, hi] plus golden-section refinement of every
/// bracketed local minimum. Throws InvalidParameterError for an empty or
/// non-positive window, a multiply connected domain, or collocation counts
/// below the M_b >= 2B, M_i >= B floor; ConditioningError when the tension
/// is pinned to the numerical floor across the whole window.
TensionCurve tension_scan(const geom::Domain& d, double lo, double hi,
                          const MpsConfig& cfg);

/// Full solve: refined minima with tension below cfg.threshold become Modes
/// with multiplicity from the singular-space dimension and eigenfunctions
/// L2-normalized over the full domain by seeded Monte Carlo quadrature.
/// A window containing no eigenvalue returns an empty mode list.
SpectrumWindow mps_solve(const geom::Domain& d, double lo, double hi,
                         const MpsConfig& cfg);

/// The exact Monte Carlo point set mps_solve uses to L2-normalize its
/// eigenfunctions (uniform over the domain, drawn from a dedicated stream of
/// cfg.seed, cfg.normalization_samples points). Downstream quadrature that
/// must see those eigenfunctions with norm 1 to machine precision — rather
/// than up to Monte Carlo error — should integrate over this set.
std::vector<Vec2> normalization_points(const geom::Domain& d,
                                       const MpsConfig& cfg);

/// Sector-adjusted leading Weyl estimate of #{eigenvalues <= lambda}
/// (multiplicity counted) used for scan-step selection and the
/// merged-minima warning.
double weyl_count_estimate(const geom::Domain& d, Sector sector,
                           double lambda);

/// Signed field values on an nx-by-ny cell-centered raster over the domain
/// bounding box, zero outside the domain.
io::Raster field_raster(const std::function<double(Vec2)>& f,
                        const geom::Domain& d, int nx, int ny);
io::Raster field_raster(const Eigenfunction& f, const geom::Domain& d, int nx,
                        int ny);

/// |phi|^2 rasters (same layout); for normalized modes the raster integral
/// is ~1 up to discretization.
io::Raster eigenfunction_density(const Eigenfunction& f, const geom::Domain& d,
                                 int nx, int ny);
io::Raster eigenfunction_density(const spec::EigenPair& pair,
                                 const geom::Domain& d, int nx, int ny);

}  // namespace qchaos::mps
