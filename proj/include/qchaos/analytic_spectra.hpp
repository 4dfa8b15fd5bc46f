// Closed-form Laplacian eigenpairs: rectangle (Dirichlet/Neumann), unit disk
// (Bessel), circle S^1 (Fourier), and the 1-D/2-D semiclassical harmonic
// oscillator (Hermite-Gaussian).
#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "qchaos/common.hpp"

namespace qchaos::spec {

enum class Bc { Dirichlet, Neumann, None };

/// One normalized eigenfunction with its eigenvalue.
///
/// families and index conventions:
///   "rectangle": index = (j, k) wavenumbers;
///   "disk":      index = (k, m) angular order / radial zero, component
///                selects cos (0) or sin (1) for k >= 1;
///   "circle":    index = (n, 0), component cos/sin for n >= 1; positions are
///                points of the unit circle, evaluated through atan2;
///   "sho1","sho2": index = multi-index alpha (second entry 0 in 1-D); the
///                evaluator uses only x in 1-D. Eigenvalues of -h^2 Lap + |x|^2.
struct EigenPair {
  std::string family;
  Bc bc = Bc::Dirichlet;
  std::array<int, 2> index = {0, 0};
  int component = 0;  ///< 0 = cos branch, 1 = sin branch (degenerate pairs)
  double lambda = 0.0;
  double norm_const = 0.0;  ///< L^2 normalization prefactor
  std::function<double(Vec2)> eval;
};

/// K lowest modes of -Lap on [0,a]x[0,b], sorted by eigenvalue with
/// lexicographic (j,k) tie-breaks. Dirichlet: sin products, j,k >= 1;
/// Neumann: cos products, j,k >= 0 (constant mode first).
std::vector<EigenPair> rectangle_modes(double a, double b, Bc bc, int count);

/// K lowest Dirichlet modes of the unit disk: J_k(j_{k,m} r) x {cos,sin}(k
/// theta), eigenvalue j_{k,m}^2, cos listed before sin within a degenerate
/// pair.
std::vector<EigenPair> disk_modes(int count);

/// K lowest modes on the unit circle: lambda = n^2, constant mode first,
/// then cos/sin pairs.
std::vector<EigenPair> circle_modes(int count);

/// K lowest modes of the semiclassical harmonic oscillator -h^2 Lap + |x|^2
/// in dim (1 or 2) dimensions: eigenvalue (2|alpha| + dim) h, shells ordered
/// by |alpha| then lexicographic alpha.
std::vector<EigenPair> sho_modes(int dim, double h, int count);

/// CSV table: family,j,k,component,lambda,multiplicity (multiplicity = size
/// of the eigenvalue's degeneracy class within the list).
std::string mode_table_csv(const std::vector<EigenPair>& modes);

}  // namespace qchaos::spec
