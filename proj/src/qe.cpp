// Equidistribution statistics over eigenfunction families. Every integral
// here is a weighted sum over an explicit quadrature set, so identities that
// hold pointwise over the set (symmetry cancellations, normalization,
// Chebyshev counting) hold exactly in the output, not just up to quadrature
// error.
#include "qchaos/qe.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qchaos/parallel.hpp"
#include "qchaos/rng.hpp"

namespace qchaos::qe {
namespace {

constexpr double kPi = std::numbers::pi;

int next_pow2(int n) {
  int p = 1;
  while (p < n) p *= 2;
  return p;
}

/// Straight half-length and cap radius of a stadium preset; false when the
/// domain has no rectangle/cap decomposition.
bool stadium_rectangle(const geom::Domain& d, double& a, double& r) {
  if (d.preset() == "bunimovich") {
    a = d.params()[0] * 0.5 * kPi;
    r = 0.5 * kPi;
    return true;
  }
  if (d.preset() == "stadium") {
    a = 0.5 * d.params()[0];
    r = 0.5 * d.params()[1];
    return true;
  }
  return false;
}

void require_nonempty(const Quadrature2D& q) {
  if (q.points.empty() || q.points.size() != q.weights.size())
    throw InvalidParameterError("qe: quadrature is empty or inconsistent");
}

}  // namespace

double Quadrature2D::total_weight() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

Quadrature2D raster_quadrature(const geom::Domain& d, int nx, int ny) {
  if (nx < 2 || ny < 2)
    throw InvalidParameterError("qe: need at least a 2x2 quadrature raster");
  const Vec2 lo = d.bbox_lo(), hi = d.bbox_hi();
  const double cx = (hi.x - lo.x) / nx, cy = (hi.y - lo.y) / ny;
  Quadrature2D q;
  q.points.reserve(static_cast<std::size_t>(nx) * ny);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      const Vec2 p{lo.x + (ix + 0.5) * cx, lo.y + (iy + 0.5) * cy};
      if (!d.contains(p)) continue;
      q.points.push_back(p);
      q.weights.push_back(cx * cy);
    }
  require_nonempty(q);
  return q;
}

Quadrature2D mc_quadrature(const geom::Domain& d, int n, std::uint64_t seed) {
  if (n < 100)
    throw InvalidParameterError("qe: need at least 100 quadrature samples");
  Rng rng(seed);
  const Vec2 lo = d.bbox_lo(), hi = d.bbox_hi();
  Quadrature2D q;
  q.points.reserve(static_cast<std::size_t>(n));
  long tried = 0;
  while (static_cast<int>(q.points.size()) < n) {
    if (++tried > 1000L * n)
      throw InternalError("qe: rejection sampling failed to hit the domain");
    const Vec2 p{rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y)};
    if (d.contains(p)) q.points.push_back(p);
  }
  q.weights.assign(static_cast<std::size_t>(n), d.area() / n);
  return q;
}

Quadrature2D normalization_quadrature(const geom::Domain& d,
                                      const mps::MpsConfig& cfg) {
  Quadrature2D q;
  q.points = mps::normalization_points(d, cfg);
  q.weights.assign(q.points.size(), d.area() / q.points.size());
  return q;
}

double domain_average(const std::function<double(Vec2)>& a,
                      const Quadrature2D& q) {
  require_nonempty(q);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < q.points.size(); ++i) {
    num += q.weights[i] * a(q.points[i]);
    den += q.weights[i];
  }
  return num / den;
}

Observable centered(const Observable& a) {
  if (a.mean_zero) return a;
  Observable c;
  c.name = a.name;
  c.value = [f = a.value, avg = a.average](Vec2 p) { return f(p) - avg; };
  c.average = 0.0;
  c.mean_zero = true;
  return c;
}

double matrix_element(const Observable& a,
                      const std::function<double(Vec2)>& phi,
                      const Quadrature2D& q) {
  require_nonempty(q);
  double norm_sq = 0.0, val = 0.0;
  for (std::size_t i = 0; i < q.points.size(); ++i) {
    const double v = phi(q.points[i]);
    norm_sq += q.weights[i] * v * v;
    val += q.weights[i] * a.value(q.points[i]) * v * v;
  }
  if (std::abs(std::sqrt(norm_sq) - 1.0) > 1e-3)
    throw NormalizationError(
        "qe: eigenfunction is not normalized on this quadrature");
  return val;
}

std::complex<double> matrix_element(const qz::QOperator& a,
                                    const qgrid::CVec& phi) {
  if (static_cast<int>(phi.size()) != a.grid.n())
    throw InvalidParameterError("qe: state length does not match the grid");
  if (std::abs(qgrid::position_norm(phi, a.grid) - 1.0) > 1e-3)
    throw NormalizationError("qe: state is not normalized on the grid");
  const Eigen::Map<const Eigen::VectorXcd> v(phi.data(),
                                             static_cast<int>(phi.size()));
  const std::complex<double> form = (v.adjoint() * (a.matrix * v))(0, 0);
  return form * a.grid.dx();
}

std::vector<double> window_elements(
    const Observable& a,
    const std::vector<std::function<double(Vec2)>>& modes,
    const Quadrature2D& q) {
  std::vector<double> out(modes.size());
  parallel_for(modes.size(),
               [&](std::size_t k) { out[k] = matrix_element(a, modes[k], q); });
  return out;
}

std::vector<double> compressed_matrix(
    const Observable& a,
    const std::vector<std::function<double(Vec2)>>& modes,
    const Quadrature2D& q) {
  require_nonempty(q);
  const std::size_t n = modes.size(), p = q.points.size();
  if (n == 0) throw InvalidParameterError("qe: no modes to compress onto");

  // Tabulate the modes once; the n^2 products then reuse the table.
  std::vector<double> tab(n * p);
  parallel_for(n, [&](std::size_t j) {
    for (std::size_t i = 0; i < p; ++i) tab[j * p + i] = modes[j](q.points[i]);
  });
  std::vector<double> aw(p);
  for (std::size_t i = 0; i < p; ++i) aw[i] = a.value(q.points[i]) * q.weights[i];

  std::vector<double> m(n * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = j; k < n; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < p; ++i) s += aw[i] * tab[j * p + i] * tab[k * p + i];
      m[j * n + k] = s;
      m[k * n + j] = s;
    }
  return m;
}

std::vector<std::function<double(Vec2)>> window_functions(
    const mps::SpectrumWindow& win) {
  std::vector<std::function<double(Vec2)>> out;
  for (const auto& mode : win.modes)
    for (const auto& f : mode.functions)
      out.push_back([f](Vec2 p) { return f(p); });
  return out;
}

VarianceResult qe_variance(const std::vector<double>& centered_values,
                           double normalization) {
  if (centered_values.size() < 20)
    throw InsufficientDataError(
        "qe: variance needs at least 20 modes in the window");
  if (!(normalization > 0.0))
    throw InvalidParameterError("qe: normalization weight must be positive");
  VarianceResult r;
  r.normalization = normalization;
  r.values = centered_values;
  for (double v : centered_values) r.epsilon += normalization * v * v;
  return r;
}

VarianceResult qe_variance(
    const Observable& a,
    const std::vector<std::function<double(Vec2)>>& modes,
    const Quadrature2D& q) {
  if (!a.mean_zero)
    throw InvalidParameterError(
        "qe: center the observable before taking the variance");
  if (modes.size() < 20)
    throw InsufficientDataError(
        "qe: variance needs at least 20 modes in the window");
  return qe_variance(window_elements(a, modes, q),
                     1.0 / static_cast<double>(modes.size()));
}

SubsetResult density_one_subset(const std::vector<double>& values,
                                double epsilon) {
  if (!(epsilon >= 0.0))
    throw InvalidParameterError("qe: epsilon must be nonnegative");
  SubsetResult r;
  r.threshold = std::sqrt(epsilon);
  r.in_gamma.resize(values.size());
  std::size_t ng = 0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    // Strict inequality: when every element is 0 (epsilon 0), everything
    // belongs to the density-one set, not to the exceptional one.
    r.in_gamma[k] = values[k] * values[k] > r.threshold;
    if (r.in_gamma[k]) ++ng;
  }
  if (!values.empty()) {
    r.gamma_fraction = static_cast<double>(ng) / values.size();
    r.lambda_density = 1.0 - r.gamma_fraction;
  }
  return r;
}

MassRatio mass_ratio(const std::function<double(Vec2)>& phi,
                     const std::function<bool(Vec2)>& in_subregion,
                     const Quadrature2D& q) {
  require_nonempty(q);
  double mass_in = 0.0, mass_all = 0.0, w_in = 0.0, w_all = 0.0;
  for (std::size_t i = 0; i < q.points.size(); ++i) {
    const double v = phi(q.points[i]);
    const double m = q.weights[i] * v * v;
    mass_all += m;
    w_all += q.weights[i];
    if (in_subregion(q.points[i])) {
      mass_in += m;
      w_in += q.weights[i];
    }
  }
  if (w_in == 0.0)
    throw InvalidParameterError("qe: subregion captures no quadrature weight");
  if (mass_all == 0.0)
    throw InvalidParameterError("qe: eigenfunction vanishes on the quadrature");
  MassRatio r;
  // Both sides are ratios over the same set, so S = whole domain gives gap
  // exactly 0 regardless of discretization.
  r.mass = mass_in / mass_all;
  r.area_fraction = w_in / w_all;
  r.gap = r.mass - r.area_fraction;
  return r;
}

BounceScore bouncing_ball_score(const io::Raster& phi,
                                const geom::Domain& d) {
  if (phi.nx < 64 || phi.ny < 64)
    throw ResolutionError(
        "qe: bouncing-ball scoring needs at least 64 cells per side");

  BounceScore s;

  double a = 0.0, r = 0.0;
  const bool has_rect = stadium_rectangle(d, a, r);
  if (has_rect) {
    double in_rect = 0.0, total = 0.0;
    for (int iy = 0; iy < phi.ny; ++iy)
      for (int ix = 0; ix < phi.nx; ++ix) {
        const double v = phi.at(ix, iy);
        const double e = v * v;
        total += e;
        if (std::abs(phi.center(ix, iy).x) <= a) in_rect += e;
      }
    if (total == 0.0)
      throw InvalidParameterError("qe: raster is identically zero");
    s.rect_mass = in_rect / total;
    s.rect_fraction = (2 * a) * (2 * r) / d.area();
  }

  // 2-D spectral energy by row/column transforms on the zero-padded raster.
  const int px = next_pow2(phi.nx), py = next_pow2(phi.ny);
  std::vector<qgrid::CVec> rows(static_cast<std::size_t>(phi.ny));
  for (int iy = 0; iy < phi.ny; ++iy) {
    qgrid::CVec row(static_cast<std::size_t>(px), 0.0);
    for (int ix = 0; ix < phi.nx; ++ix) row[ix] = phi.at(ix, iy);
    qgrid::fft_inplace(row, false);
    rows[static_cast<std::size_t>(iy)] = std::move(row);
  }
  std::vector<qgrid::CVec> cols(static_cast<std::size_t>(px));
  for (int ix = 0; ix < px; ++ix) {
    qgrid::CVec col(static_cast<std::size_t>(py), 0.0);
    for (int iy = 0; iy < phi.ny; ++iy) col[iy] = rows[static_cast<std::size_t>(iy)][ix];
    qgrid::fft_inplace(col, false);
    cols[static_cast<std::size_t>(ix)] = std::move(col);
  }

  const double cx = (phi.hi.x - phi.lo.x) / phi.nx;
  const double cy = (phi.hi.y - phi.lo.y) / phi.ny;
  const double cone = 15.0 * kPi / 180.0;
  double in_cone = 0.0, total = 0.0;
  for (int ix = 0; ix < px; ++ix)
    for (int iy = 0; iy < py; ++iy) {
      const int fx = ix > px / 2 ? ix - px : ix;
      const int fy = iy > py / 2 ? iy - py : iy;
      if (fx == 0 && fy == 0) continue;
      const double e = std::norm(cols[static_cast<std::size_t>(ix)]
                                     [static_cast<std::size_t>(iy)]);
      total += e;
      const double kx = std::abs(fx) / (px * cx);
      const double ky = std::abs(fy) / (py * cy);
      if (std::atan2(kx, ky) <= cone) in_cone += e;
    }
  if (total == 0.0)
    throw InvalidParameterError("qe: raster is identically zero");
  s.concentration = in_cone / total;

  s.flagged = s.concentration > 0.5 &&
              (!has_rect || s.rect_mass > s.rect_fraction + 0.2);
  return s;
}

QEReport qe_report(const Observable& a, const mps::SpectrumWindow& win,
                   const Quadrature2D& q) {
  const Observable ac = centered(a);
  const auto modes = window_functions(win);

  QEReport rep;
  rep.domain = win.domain;
  rep.observable = a.name;
  rep.lo = win.lo;
  rep.hi = win.hi;
  rep.lambdas = win.eigenvalues();

  const VarianceResult var = qe_variance(ac, modes, q);
  rep.values = var.values;
  rep.epsilon = var.epsilon;
  rep.normalization = "1/#modes";

  const SubsetResult sub = density_one_subset(var.values, var.epsilon);
  rep.in_gamma = sub.in_gamma;
  rep.lambda_density = sub.lambda_density;

  rep.note =
      "reference average = domain-area average of the observable (the "
      "momentum average of a position observable is uniform on each shell)";
  if (win.domain == "rectangle" || win.domain == "disk")
    rep.note +=
        "; integrable domain: a small variance here does not by itself "
        "indicate ergodicity";
  return rep;
}

std::string QEReport::to_json() const {
  nlohmann::json j;
  j["domain"] = domain;
  j["observable"] = observable;
  j["window"] = {lo, hi};
  j["epsilon"] = epsilon;
  j["normalization"] = normalization;
  j["lambda_density"] = lambda_density;
  j["note"] = note;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t k = 0; k < values.size(); ++k)
    rows.push_back({{"lambda", lambdas.size() > k ? lambdas[k] : 0.0},
                    {"value", values[k]},
                    {"in_gamma", static_cast<bool>(in_gamma[k])}});
  j["modes"] = rows;
  return j.dump(2);
}

std::string QEReport::to_csv() const {
  std::ostringstream os;
  os << "lambda,value,in_gamma\n";
  os.precision(17);
  for (std::size_t k = 0; k < values.size(); ++k)
    os << (lambdas.size() > k ? lambdas[k] : 0.0) << ',' << values[k] << ','
       << static_cast<int>(static_cast<bool>(in_gamma[k])) << '\n';
  return os.str();
}

}  // namespace qchaos::qe
