// Method of particular solutions. Basis functions are exact Helmholtz
// solutions (Fourier-Bessel about the disk center, parity-symmetrized real
// plane waves on a desymmetrized stadium quarter, plain real plane waves on
// other simply connected domains). The tension at a trial eigenvalue is the
// smallest singular value of the boundary block of the orthonormalized
// stacked boundary+interior collocation matrix: it dips toward zero exactly
// when some basis combination vanishes on the boundary while staying O(1)
// inside. Rank-revealing (column-pivoted) QR guards against overcomplete
// bases manufacturing spurious dips.
#include "qchaos/mps.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <nlohmann/json.hpp>

#include "qchaos/parallel.hpp"
#include "qchaos/rng.hpp"
#include "qchaos/special.hpp"

namespace qchaos::mps {
namespace {

constexpr double kPi = std::numbers::pi;

// Relative column-pivoted-QR truncation for the (often wildly
// ill-conditioned) basis. Columns whose pivot falls below this fraction of
// the leading pivot carry no trustworthy information and would otherwise
// manufacture spurious tension dips.
#ifndef QCHAOS_MPS_TRUNCATION
#define QCHAOS_MPS_TRUNCATION 1e-12
#endif
constexpr double kTruncation = QCHAOS_MPS_TRUNCATION;

int loop_count(const geom::Domain& d) {
  const int n = static_cast<int>(d.pieces().size());
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  int loops = 0;
  for (int i = 0; i < n; ++i) {
    if (seen[static_cast<std::size_t>(i)]) continue;
    ++loops;
    int j = i;
    while (!seen[static_cast<std::size_t>(j)]) {
      seen[static_cast<std::size_t>(j)] = 1;
      j = d.next_piece_in_loop(j);
    }
  }
  return loops;
}

bool stadium_preset(const geom::Domain& d) {
  return d.preset() == "bunimovich" || d.preset() == "stadium";
}

/// Straight half-length a and cap radius r of a stadium preset.
void stadium_dimensions(const geom::Domain& d, double& a, double& r) {
  if (d.preset() == "bunimovich") {
    a = d.params()[0] * 0.5 * kPi;
    r = 0.5 * kPi;
  } else {
    a = 0.5 * d.params()[0];
    r = 0.5 * d.params()[1];
  }
}

Sector resolve_sector(const geom::Domain& d, const MpsConfig& cfg) {
  if (cfg.sector == Sector::automatic)
    return stadium_preset(d) ? Sector::odd_odd : Sector::none;
  if (cfg.sector != Sector::none && !stadium_preset(d))
    throw InvalidParameterError(
        "mps: symmetry-sector solves are only defined for stadium presets");
  return cfg.sector;
}

void sector_parities(Sector s, int& sign_x, int& sign_y) {
  switch (s) {
    case Sector::odd_odd: sign_x = -1; sign_y = -1; return;
    case Sector::even_even: sign_x = +1; sign_y = +1; return;
    case Sector::odd_even: sign_x = -1; sign_y = +1; return;
    case Sector::even_odd: sign_x = +1; sign_y = -1; return;
    default:
      throw InternalError("mps: parity request for a full-domain solve");
  }
}

struct BasisSpec {
  Eigenfunction::Basis kind = Eigenfunction::Basis::plane_waves;
  Vec2 center{0.0, 0.0};
  std::vector<double> angles;  // plane-wave kinds
  int m_max = 0;               // fourier_bessel: orders 0..m_max
  int sign_x = -1, sign_y = -1;

  int size() const {
    switch (kind) {
      case Eigenfunction::Basis::fourier_bessel: return 2 * m_max + 1;
      case Eigenfunction::Basis::sector_plane_waves:
        return static_cast<int>(angles.size());
      case Eigenfunction::Basis::plane_waves:
        return 2 * static_cast<int>(angles.size());
    }
    return 0;
  }
};

BasisSpec make_basis(const geom::Domain& d, Sector sector, int requested_b) {
  BasisSpec b;
  if (d.preset() == "disk") {
    b.kind = Eigenfunction::Basis::fourier_bessel;
    b.m_max = std::max(3, (requested_b - 1) / 2);
    return b;
  }
  if (sector != Sector::none) {
    b.kind = Eigenfunction::Basis::sector_plane_waves;
    sector_parities(sector, b.sign_x, b.sign_y);
    b.angles.resize(static_cast<std::size_t>(requested_b));
    for (int j = 0; j < requested_b; ++j)
      b.angles[static_cast<std::size_t>(j)] =
          (j + 0.5) * (0.5 * kPi) / requested_b;
    return b;
  }
  b.kind = Eigenfunction::Basis::plane_waves;
  b.center = 0.5 * (d.bbox_lo() + d.bbox_hi());
  const int m = std::max(4, requested_b / 2);
  b.angles.resize(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j)
    b.angles[static_cast<std::size_t>(j)] = (j + 0.5) * kPi / m;
  return b;
}

void eval_basis_row(const BasisSpec& b, double k, Vec2 q, double* out) {
  switch (b.kind) {
    case Eigenfunction::Basis::fourier_bessel: {
      const double rx = q.x - b.center.x, ry = q.y - b.center.y;
      const double rad = std::hypot(rx, ry);
      const double th = std::atan2(ry, rx);
      out[0] = fn::bessel_j(0, k * rad);
      for (int m = 1; m <= b.m_max; ++m) {
        const double jm = fn::bessel_j(m, k * rad);
        out[2 * m - 1] = jm * std::cos(m * th);
        out[2 * m] = jm * std::sin(m * th);
      }
      return;
    }
    case Eigenfunction::Basis::sector_plane_waves: {
      const double x = q.x - b.center.x, y = q.y - b.center.y;
      for (std::size_t j = 0; j < b.angles.size(); ++j) {
        const double ax = k * std::cos(b.angles[j]) * x;
        const double ay = k * std::sin(b.angles[j]) * y;
        const double fx = (b.sign_x < 0) ? std::sin(ax) : std::cos(ax);
        const double fy = (b.sign_y < 0) ? std::sin(ay) : std::cos(ay);
        out[j] = fx * fy;
      }
      return;
    }
    case Eigenfunction::Basis::plane_waves: {
      const double x = q.x - b.center.x, y = q.y - b.center.y;
      for (std::size_t j = 0; j < b.angles.size(); ++j) {
        const double arg =
            k * (x * std::cos(b.angles[j]) + y * std::sin(b.angles[j]));
        out[2 * j] = std::cos(arg);
        out[2 * j + 1] = std::sin(arg);
      }
      return;
    }
  }
}

/// Collocation geometry and sampling, fixed once per solve so that every
/// lambda sees the same points.
struct Collocation {
  std::vector<Vec2> boundary;         // M_b tension collocation points
  std::vector<Vec2> residual_points;  // fresh boundary points for residuals
  std::vector<Vec2> interior;         // M_i collocation points
  std::vector<Vec2> quad;             // Monte Carlo quadrature, full domain
  double quad_area = 0.0;             // area used with `quad`
};

Vec2 quarter_boundary_point(double a, double r, double s) {
  if (s < a) return {s, r};
  const double phi = (s - a) / r;  // 0 at the edge joint, pi/2 at the x-axis
  return {a + r * std::sin(phi), r * std::cos(phi)};
}

/// Uniform rejection sample of n interior points from the box [lo, hi].
std::vector<Vec2> sample_region(const geom::Domain& d, Vec2 lo, Vec2 hi,
                                int n, Rng& rng) {
  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>(n));
  long tried = 0;
  while (static_cast<int>(out.size()) < n) {
    if (++tried > 1000L * n)
      throw InternalError("mps: rejection sampling failed to hit the domain");
    const Vec2 q{rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y)};
    if (d.contains(q)) out.push_back(q);
  }
  return out;
}

Collocation make_collocation(const geom::Domain& d, Sector sector,
                             const MpsConfig& cfg) {
  Collocation c;
  Rng rng(cfg.seed);

  const int mb = cfg.boundary_points;
  c.boundary.reserve(static_cast<std::size_t>(mb));
  c.residual_points.reserve(static_cast<std::size_t>(2 * mb));
  if (sector != Sector::none) {
    double a = 0.0, r = 0.0;
    stadium_dimensions(d, a, r);
    const double total = a + r * 0.5 * kPi;
    for (int i = 0; i < mb; ++i)
      c.boundary.push_back(quarter_boundary_point(a, r, (i + 0.5) * total / mb));
    for (int i = 0; i < 2 * mb; ++i)
      c.residual_points.push_back(
          quarter_boundary_point(a, r, (i + 0.25) * total / (2 * mb)));
  } else {
    const double per = d.perimeter();
    for (int i = 0; i < mb; ++i)
      c.boundary.push_back(
          d.boundary_point_and_normal((i + 0.5) * per / mb).point);
    for (int i = 0; i < 2 * mb; ++i)
      c.residual_points.push_back(
          d.boundary_point_and_normal((i + 0.25) * per / (2 * mb)).point);
  }

  // Interior collocation: uniform over the solve region (the quarter for
  // sector solves, the whole domain otherwise).
  Vec2 lo = d.bbox_lo(), hi = d.bbox_hi();
  if (sector != Sector::none) {
    lo = {0.0, 0.0};  // stadium presets are centered at the origin
  }
  c.interior = sample_region(d, lo, hi, cfg.interior_points, rng);

  // Normalization quadrature always covers the full domain: sector basis
  // functions are globally defined with the right parities, so this yields
  // the full-domain L2 norm directly. It comes from its own stream so that
  // normalization_points() can reproduce it exactly.
  c.quad = normalization_points(d, cfg);
  c.quad_area = d.area();
  return c;
}

/// Everything fixed across lambda evaluations.
struct TensionContext {
  BasisSpec basis;
  Collocation pts;
  int b = 0;   // basis size
  int mb = 0;  // boundary rows
  int mi = 0;  // interior rows
};

/// Builds the equilibrated stacked collocation matrix at wavenumber k and
/// drops numerically dead columns (underflowed high-order Bessel tails).
void build_stack(const TensionContext& ctx, double k, Eigen::MatrixXd& s,
                 std::vector<int>& kept, Eigen::VectorXd& inv_colnorm) {
  const int rows = ctx.mb + ctx.mi;
  Eigen::MatrixXd raw(rows, ctx.b);
  std::vector<double> row(static_cast<std::size_t>(ctx.b));
  for (int i = 0; i < ctx.mb; ++i) {
    eval_basis_row(ctx.basis, k, ctx.pts.boundary[static_cast<std::size_t>(i)],
                   row.data());
    for (int j = 0; j < ctx.b; ++j) raw(i, j) = row[static_cast<std::size_t>(j)];
  }
  for (int i = 0; i < ctx.mi; ++i) {
    eval_basis_row(ctx.basis, k, ctx.pts.interior[static_cast<std::size_t>(i)],
                   row.data());
    for (int j = 0; j < ctx.b; ++j)
      raw(ctx.mb + i, j) = row[static_cast<std::size_t>(j)];
  }

  kept.clear();
  for (int j = 0; j < ctx.b; ++j)
    if (raw.col(j).norm() > 1e-280) kept.push_back(j);
  s.resize(rows, static_cast<int>(kept.size()));
  inv_colnorm.resize(static_cast<int>(kept.size()));
  for (std::size_t jj = 0; jj < kept.size(); ++jj) {
    const double nrm = raw.col(kept[jj]).norm();
    inv_colnorm(static_cast<int>(jj)) = 1.0 / nrm;
    s.col(static_cast<int>(jj)) = raw.col(kept[jj]) / nrm;
  }
}

/// Thin orthonormal factor of the rank-revealed column space, boundary rows
/// only, plus the pieces needed to reconstruct coefficients.
struct Orthonormalized {
  Eigen::MatrixXd q_boundary;  // mb x rank
  Eigen::MatrixXd rhat;        // rank x rank upper triangular
  Eigen::PermutationMatrix<Eigen::Dynamic> perm;  // kept-column pivoting
  std::vector<int> kept;
  Eigen::VectorXd inv_colnorm;
  int rank = 0;
};

Orthonormalized orthonormalize(const TensionContext& ctx, double lambda) {
  Orthonormalized o;
  Eigen::MatrixXd s;
  build_stack(ctx, std::sqrt(lambda), s, o.kept, o.inv_colnorm);
  const int cols = static_cast<int>(s.cols());
  if (cols == 0) throw ConditioningError("mps: basis collapsed numerically");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(s);
  const double dmax = std::abs(qr.matrixR()(0, 0));
  int rank = 0;
  while (rank < cols && std::abs(qr.matrixR()(rank, rank)) > kTruncation * dmax)
    ++rank;
  if (rank == 0) throw ConditioningError("mps: basis collapsed numerically");

  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(
                                              static_cast<int>(s.rows()), rank);
  o.q_boundary = q.topRows(ctx.mb);
  o.rhat = qr.matrixR()
               .topLeftCorner(rank, rank)
               .template triangularView<Eigen::Upper>();
  o.perm = qr.colsPermutation();
  o.rank = rank;
  return o;
}

/// Smallest singular value of an upper-triangular matrix by inverse power
/// iteration on R^T R (two triangular solves per step). Exact enough for
/// scan/refinement comparisons at a fraction of full-SVD cost.
double smallest_singular_tri(const Eigen::MatrixXd& r) {
  const int n = static_cast<int>(r.rows());
  for (int i = 0; i < n; ++i)
    if (r(i, i) == 0.0) return 0.0;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = 1.0 + 0.3 * std::sin(2.3 * i + 0.7);
  v /= v.norm();
  double sigma = 0.0;
  for (int it = 0; it < 60; ++it) {
    const Eigen::VectorXd y =
        r.transpose().triangularView<Eigen::Lower>().solve(v);
    const Eigen::VectorXd z = r.triangularView<Eigen::Upper>().solve(y);
    const double zn = z.norm();
    if (!std::isfinite(zn) || zn == 0.0) return 0.0;
    const double next = 1.0 / std::sqrt(zn);
    v = z / zn;
    const bool settled = it >= 4 && std::abs(next - sigma) <= 1e-8 * next;
    sigma = next;
    if (settled) break;
  }
  return sigma;
}

double tension_at(const TensionContext& ctx, double lambda) {
  const Orthonormalized o = orthonormalize(ctx, lambda);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(o.q_boundary);
  const Eigen::MatrixXd r2 = qr.matrixQR()
                                 .topLeftCorner(o.rank, o.rank)
                                 .template triangularView<Eigen::Upper>();
  return smallest_singular_tri(r2);
}

/// Full decomposition at a refined minimum: all singular values of the
/// boundary block (descending) and the right singular vectors, for
/// multiplicity counting and coefficient extraction.
struct FullEval {
  Orthonormalized ortho;
  Eigen::VectorXd sigmas;
  Eigen::MatrixXd v;
};

FullEval full_eval(const TensionContext& ctx, double lambda) {
  FullEval f;
  f.ortho = orthonormalize(ctx, lambda);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(f.ortho.q_boundary,
                                     Eigen::ComputeThinV);
  f.sigmas = svd.singularValues();
  f.v = svd.matrixV();
  return f;
}

/// Coefficients (over the original basis indexing) of the combination given
/// by right singular vector column `which` (counted from the smallest).
std::vector<double> extract_coefficients(const TensionContext& ctx,
                                         const FullEval& f, int which) {
  const int rank = f.ortho.rank;
  const Eigen::VectorXd v = f.v.col(rank - 1 - which);
  // Coefficients in pivoted order, padded with zeros for the columns the
  // rank truncation dropped, then un-pivoted exactly the way the QR's own
  // solve path does it.
  Eigen::VectorXd chat =
      Eigen::VectorXd::Zero(static_cast<int>(f.ortho.kept.size()));
  chat.head(rank) = f.ortho.rhat.triangularView<Eigen::Upper>().solve(v);
  const Eigen::VectorXd permuted = f.ortho.perm * chat;
  std::vector<double> coef(static_cast<std::size_t>(ctx.b), 0.0);
  for (std::size_t jj = 0; jj < f.ortho.kept.size(); ++jj)
    coef[static_cast<std::size_t>(f.ortho.kept[jj])] =
        permuted(static_cast<int>(jj)) * f.ortho.inv_colnorm(static_cast<int>(jj));
  return coef;
}

double golden_min(const std::function<double(double)>& f, double a, double b) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 240 && (b - a) > 1e-9 * std::max(1.0, std::abs(b));
       ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

void validate(const geom::Domain& d, double lo, double hi,
              const MpsConfig& cfg, int basis_effective) {
  if (!(lo > 0.0) || !(hi > lo))
    throw InvalidParameterError("mps: window must satisfy 0 < lo < hi");
  if (loop_count(d) != 1)
    throw InvalidParameterError(
        "mps: domain must be simply connected (single boundary loop)");
  if (basis_effective < 8)
    throw InvalidParameterError("mps: basis size must be at least 8");
  if (cfg.boundary_points < 2 * basis_effective)
    throw InvalidParameterError(
        "mps: boundary points must be at least twice the basis size");
  if (cfg.interior_points < basis_effective)
    throw InvalidParameterError(
        "mps: interior points must be at least the basis size");
  if (!(cfg.threshold > 0.0))
    throw InvalidParameterError("mps: threshold must be positive");
}

struct ScanResult {
  TensionCurve curve;
  std::vector<double> accepted_lambda;   // tension < threshold
  std::vector<double> accepted_tension;
  std::vector<int> accepted_multiplicity;
};

ScanResult scan_and_refine(const geom::Domain& d, double lo, double hi,
                           const MpsConfig& cfg, Sector sector,
                           const TensionContext& ctx) {
  ScanResult out;

  const double expected =
      std::max(1.0, weyl_count_estimate(d, sector, hi) -
                        weyl_count_estimate(d, sector, lo));
  double step = cfg.scan_step > 0.0 ? cfg.scan_step
                                    : (hi - lo) / expected / 8.0;
  int nsteps = static_cast<int>(std::ceil((hi - lo) / step));
  nsteps = std::clamp(nsteps, 48, 500000);

  // Sample two cells past each window edge so that a dip sitting right at
  // the edge still shows up as an interior local minimum; refined minima are
  // filtered back to [lo, hi] below.
  const double cell = (hi - lo) / nsteps;
  const double start = std::max(lo - 2.0 * cell, 1e-9);
  const int pad_left = static_cast<int>(std::round((lo - start) / cell));
  const int total = nsteps + pad_left + 2;
  out.curve.lambdas.resize(static_cast<std::size_t>(total));
  out.curve.tensions.resize(static_cast<std::size_t>(total));
  for (int i = 0; i < total; ++i)
    out.curve.lambdas[static_cast<std::size_t>(i)] =
        lo + (i - pad_left + 0.5) * cell;
  parallel_for(static_cast<std::size_t>(total), [&](std::size_t i) {
    out.curve.tensions[i] = tension_at(ctx, out.curve.lambdas[i]);
  });

  double tmax = 0.0;
  for (double t : out.curve.tensions) tmax = std::max(tmax, t);
  if (tmax < 1e-10)
    throw ConditioningError(
        "mps: tension is at the numerical floor across the window; "
        "reduce the basis size");

  // Refine every strict local minimum of the sampled curve. Eigenvalue dips
  // are V-shaped across the whole inter-eigenvalue interval, so they always
  // show up as local minima at this sampling density; occasional shallow
  // jitter minima refine to points the threshold test below rejects.
  auto f = [&](double lambda) { return tension_at(ctx, lambda); };
  std::vector<double> mins;
  for (int i = 1; i + 1 < total; ++i) {
    const double t = out.curve.tensions[static_cast<std::size_t>(i)];
    const double tl = out.curve.tensions[static_cast<std::size_t>(i - 1)];
    const double tr = out.curve.tensions[static_cast<std::size_t>(i + 1)];
    if (!(t < tl && t <= tr)) continue;
    const double m =
        golden_min(f, out.curve.lambdas[static_cast<std::size_t>(i - 1)],
                   out.curve.lambdas[static_cast<std::size_t>(i + 1)]);
    if (m >= lo && m <= hi) mins.push_back(m);
  }
  std::sort(mins.begin(), mins.end());

  // Merge refinements that converged to the same point from adjacent
  // brackets.
  for (std::size_t i = 0; i < mins.size(); ++i) {
    if (!out.curve.minima.empty() &&
        mins[i] - out.curve.minima.back() < 1e-7 * (1.0 + mins[i]))
      continue;
    out.curve.minima.push_back(mins[i]);
  }

  int found_with_multiplicity = 0;
  for (double m : out.curve.minima) {
    const FullEval fe = full_eval(ctx, m);
    const double sigma_min = fe.sigmas(fe.ortho.rank - 1);
    if (sigma_min >= cfg.threshold) continue;
    int mult = 0;
    for (int i = fe.ortho.rank - 1; i >= 0 && fe.sigmas(i) < cfg.threshold; --i)
      ++mult;
    mult = std::min(mult, 6);
    out.accepted_lambda.push_back(m);
    out.accepted_tension.push_back(sigma_min);
    out.accepted_multiplicity.push_back(mult);
    found_with_multiplicity += mult;
  }

  out.curve.merged_warning = found_with_multiplicity < 0.8 * expected;
  return out;
}

double eval_function(const Eigenfunction& f, Vec2 q);

}  // namespace

std::string sector_name(Sector s) {
  switch (s) {
    case Sector::automatic: return "automatic";
    case Sector::none: return "none";
    case Sector::odd_odd: return "odd-odd";
    case Sector::even_even: return "even-even";
    case Sector::odd_even: return "odd-even";
    case Sector::even_odd: return "even-odd";
  }
  return "none";
}

std::vector<Vec2> normalization_points(const geom::Domain& d,
                                       const MpsConfig& cfg) {
  if (cfg.normalization_samples < 100)
    throw InvalidParameterError(
        "mps: need at least 100 normalization samples");
  // Decorrelated from the collocation stream so either can be regenerated
  // on its own.
  Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  return sample_region(d, d.bbox_lo(), d.bbox_hi(), cfg.normalization_samples,
                       rng);
}

double weyl_count_estimate(const geom::Domain& d, Sector sector,
                           double lambda) {
  if (lambda <= 0.0) return 0.0;
  const double rt = std::sqrt(lambda);
  if (sector == Sector::none) {
    return std::max(0.0, (d.area() * lambda - d.perimeter() * rt) / (4 * kPi));
  }
  double a = 0.0, r = 0.0;
  stadium_dimensions(d, a, r);
  int sx = 0, sy = 0;
  sector_parities(sector, sx, sy);
  const double outer = a + r * 0.5 * kPi;
  // Second Weyl term: Dirichlet walls subtract boundary length, Neumann
  // walls add it. The outer wall is always Dirichlet; each symmetry axis is
  // Dirichlet exactly for the odd parity.
  double signed_perimeter = outer;
  signed_perimeter += (sx < 0 ? 1.0 : -1.0) * r;        // x = 0 axis
  signed_perimeter += (sy < 0 ? 1.0 : -1.0) * (a + r);  // y = 0 axis
  return std::max(0.0,
                  (0.25 * d.area() * lambda - signed_perimeter * rt) / (4 * kPi));
}

TensionCurve tension_scan(const geom::Domain& d, double lo, double hi,
                          const MpsConfig& cfg) {
  const Sector sector = resolve_sector(d, cfg);
  TensionContext ctx;
  ctx.basis = make_basis(d, sector, cfg.basis_size);
  ctx.b = ctx.basis.size();
  validate(d, lo, hi, cfg, ctx.b);
  ctx.pts = make_collocation(d, sector, cfg);
  ctx.mb = cfg.boundary_points;
  ctx.mi = cfg.interior_points;
  return scan_and_refine(d, lo, hi, cfg, sector, ctx).curve;
}

SpectrumWindow mps_solve(const geom::Domain& d, double lo, double hi,
                         const MpsConfig& cfg) {
  const Sector sector = resolve_sector(d, cfg);
  TensionContext ctx;
  ctx.basis = make_basis(d, sector, cfg.basis_size);
  ctx.b = ctx.basis.size();
  validate(d, lo, hi, cfg, ctx.b);
  ctx.pts = make_collocation(d, sector, cfg);
  ctx.mb = cfg.boundary_points;
  ctx.mi = cfg.interior_points;

  const ScanResult scan = scan_and_refine(d, lo, hi, cfg, sector, ctx);

  SpectrumWindow win;
  win.domain = d.preset();
  win.sector = sector_name(sector);
  win.lo = lo;
  win.hi = hi;
  win.merged_warning = scan.curve.merged_warning;
  win.cfg = cfg;

  for (std::size_t mi = 0; mi < scan.accepted_lambda.size(); ++mi) {
    const double lambda = scan.accepted_lambda[mi];
    const FullEval fe = full_eval(ctx, lambda);

    Mode mode;
    mode.lambda = lambda;
    mode.tension = scan.accepted_tension[mi];
    mode.multiplicity = scan.accepted_multiplicity[mi];

    for (int j = 0; j < mode.multiplicity; ++j) {
      Eigenfunction f;
      f.lambda = lambda;
      f.wavenumber = std::sqrt(lambda);
      f.basis = ctx.basis.kind;
      f.center = ctx.basis.center;
      f.angles = ctx.basis.angles;
      f.sign_x = ctx.basis.sign_x;
      f.sign_y = ctx.basis.sign_y;
      f.coef = extract_coefficients(ctx, fe, j);

      // L2-normalize over the full domain by the shared seeded quadrature.
      double sum = 0.0;
      for (const Vec2& q : ctx.pts.quad) {
        const double v = eval_function(f, q);
        sum += v * v;
      }
      const double integral =
          ctx.pts.quad_area * sum / static_cast<double>(ctx.pts.quad.size());
      if (!(integral > 0.0))
        throw InternalError("mps: eigenfunction vanished on the quadrature");
      const double scale = 1.0 / std::sqrt(integral);
      for (double& c : f.coef) c *= scale;

      double interior_sup = 0.0;
      for (const Vec2& q : ctx.pts.quad)
        interior_sup = std::max(interior_sup, std::abs(eval_function(f, q)));
      double boundary_sup = 0.0;
      for (const Vec2& q : ctx.pts.residual_points)
        boundary_sup = std::max(boundary_sup, std::abs(eval_function(f, q)));
      mode.boundary_residual =
          std::max(mode.boundary_residual,
                   boundary_sup / std::max(interior_sup, 1e-300));

      mode.functions.push_back(std::move(f));
    }
    win.modes.push_back(std::move(mode));
  }
  return win;
}

namespace {
double eval_function(const Eigenfunction& f, Vec2 q) {
  const double k = f.wavenumber;
  switch (f.basis) {
    case Eigenfunction::Basis::fourier_bessel: {
      const double rx = q.x - f.center.x, ry = q.y - f.center.y;
      const double rad = std::hypot(rx, ry);
      const double th = std::atan2(ry, rx);
      const int m_max = (static_cast<int>(f.coef.size()) - 1) / 2;
      double v = f.coef[0] * fn::bessel_j(0, k * rad);
      for (int m = 1; m <= m_max; ++m) {
        const double c = f.coef[static_cast<std::size_t>(2 * m - 1)];
        const double s = f.coef[static_cast<std::size_t>(2 * m)];
        if (c == 0.0 && s == 0.0) continue;
        v += fn::bessel_j(m, k * rad) *
             (c * std::cos(m * th) + s * std::sin(m * th));
      }
      return v;
    }
    case Eigenfunction::Basis::sector_plane_waves: {
      const double x = q.x - f.center.x, y = q.y - f.center.y;
      double v = 0.0;
      for (std::size_t j = 0; j < f.angles.size(); ++j) {
        if (f.coef[j] == 0.0) continue;
        const double ax = k * std::cos(f.angles[j]) * x;
        const double ay = k * std::sin(f.angles[j]) * y;
        const double fx = (f.sign_x < 0) ? std::sin(ax) : std::cos(ax);
        const double fy = (f.sign_y < 0) ? std::sin(ay) : std::cos(ay);
        v += f.coef[j] * fx * fy;
      }
      return v;
    }
    case Eigenfunction::Basis::plane_waves: {
      const double x = q.x - f.center.x, y = q.y - f.center.y;
      double v = 0.0;
      for (std::size_t j = 0; j < f.angles.size(); ++j) {
        const double arg =
            k * (x * std::cos(f.angles[j]) + y * std::sin(f.angles[j]));
        v += f.coef[2 * j] * std::cos(arg) + f.coef[2 * j + 1] * std::sin(arg);
      }
      return v;
    }
  }
  return 0.0;
}
}  // namespace

double Eigenfunction::operator()(Vec2 q) const { return eval_function(*this, q); }

std::vector<double> SpectrumWindow::eigenvalues() const {
  std::vector<double> out;
  for (const Mode& m : modes)
    for (int j = 0; j < m.multiplicity; ++j) out.push_back(m.lambda);
  std::sort(out.begin(), out.end());
  return out;
}

std::string SpectrumWindow::to_json() const {
  nlohmann::json j;
  j["domain"] = domain;
  j["sector"] = sector;
  j["window"] = {lo, hi};
  nlohmann::json evs = nlohmann::json::array();
  nlohmann::json tens = nlohmann::json::array();
  for (const Mode& m : modes)
    for (int q = 0; q < m.multiplicity; ++q) {
      evs.push_back(m.lambda);
      tens.push_back(m.tension);
    }
  j["eigenvalues"] = evs;
  j["tension"] = tens;
  j["merged_warning"] = merged_warning;
  j["cfg"] = {{"basis_size", cfg.basis_size},
              {"boundary_points", cfg.boundary_points},
              {"interior_points", cfg.interior_points},
              {"scan_step", cfg.scan_step},
              {"threshold", cfg.threshold},
              {"sector", sector_name(cfg.sector)},
              {"seed", cfg.seed},
              {"normalization_samples", cfg.normalization_samples}};
  return j.dump(2);
}

io::Raster field_raster(const std::function<double(Vec2)>& f,
                        const geom::Domain& d, int nx, int ny) {
  if (nx < 2 || ny < 2)
    throw InvalidParameterError("field_raster: need at least a 2x2 raster");
  io::Raster r;
  r.nx = nx;
  r.ny = ny;
  r.lo = d.bbox_lo();
  r.hi = d.bbox_hi();
  r.values.assign(static_cast<std::size_t>(nx) * ny, 0.0);
  parallel_for(static_cast<std::size_t>(ny), [&](std::size_t iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const Vec2 q = r.center(ix, static_cast<int>(iy));
      if (d.contains(q)) r.at(ix, static_cast<int>(iy)) = f(q);
    }
  });
  return r;
}

io::Raster field_raster(const Eigenfunction& f, const geom::Domain& d, int nx,
                        int ny) {
  return field_raster([&f](Vec2 q) { return f(q); }, d, nx, ny);
}

io::Raster eigenfunction_density(const Eigenfunction& f, const geom::Domain& d,
                                 int nx, int ny) {
  io::Raster r = field_raster(f, d, nx, ny);
  for (double& v : r.values) v *= v;
  return r;
}

io::Raster eigenfunction_density(const spec::EigenPair& pair,
                                 const geom::Domain& d, int nx, int ny) {
  io::Raster r = field_raster(pair.eval, d, nx, ny);
  for (double& v : r.values) v *= v;
  return r;
}

}  // namespace qchaos::mps
