// Billiard dynamics on a Domain: reflection, tracing, twin-trajectory
// separation growth, and chord-wise Birkhoff averages.
#include "qchaos/billiard.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace qchaos::bil {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kCornerTol = 1e-10;   // arclength proximity to a junction
constexpr double kRehitTol = 1e-12;    // minimum ray parameter

// 8-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr double kGlNode[8] = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
    0.7966664774136267,  0.9602898564975363};
constexpr double kGlWeight[8] = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
    0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
    0.2223810344533745, 0.1012285362903763};

Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

void validate_state(const geom::Domain& d, const BilliardState& s0) {
  if (std::abs(norm(s0.direction) - 1.0) > 1e-12)
    throw InvalidParameterError("billiard direction must be a unit vector");
  if (!d.contains(s0.position))
    throw InvalidParameterError("billiard start position is outside the domain");
}

/// True if the junction where piece a ends and piece b begins has a tangent
/// discontinuity (an actual corner rather than a smooth seam).
bool junction_is_corner(const geom::Domain& d, int a, int b) {
  const Vec2 ta = d.pieces()[a].tangent_at(d.pieces()[a].length());
  const Vec2 tb = d.pieces()[b].tangent_at(0.0);
  return norm(ta - tb) > 1e-9;
}

/// Checks whether a hit landed within kCornerTol of a non-smooth junction.
bool hit_is_corner(const geom::Domain& d, const geom::RayHit& hit) {
  const double len = d.pieces()[hit.piece].length();
  if (hit.piece_arclength < kCornerTol &&
      junction_is_corner(d, d.prev_piece_in_loop(hit.piece), hit.piece))
    return true;
  if (len - hit.piece_arclength < kCornerTol &&
      junction_is_corner(d, hit.piece, d.next_piece_in_loop(hit.piece)))
    return true;
  return false;
}

}  // namespace

Vec2 reflect(Vec2 direction, Vec2 normal) {
  const double dn = dot(direction, normal);
  if (dn >= 0)
    throw InvalidIncidenceError(
        "reflect requires an incoming direction (<d,n> < 0)");
  Vec2 out = direction - (2.0 * dn) * normal;
  return normalized(out);
}

TraceResult trace(const geom::Domain& d, const BilliardState& s0,
                  int n_collisions) {
  if (n_collisions < 1)
    throw InvalidParameterError("n_collisions must be at least 1");
  validate_state(d, s0);

  TraceResult result;
  result.records.reserve(static_cast<std::size_t>(n_collisions));
  Vec2 pos = s0.position;
  Vec2 dir = normalized(s0.direction);
  double cum = 0.0;

  for (int k = 1; k <= n_collisions; ++k) {
    const auto hit = d.first_boundary_hit(pos, dir, kRehitTol);
    if (!hit)
      throw InternalError("interior ray failed to meet the boundary");
    if (hit_is_corner(d, *hit)) {
      result.status = TraceStatus::CornerTermination;
      return result;
    }
    const Vec2 t = d.pieces()[hit->piece].tangent_at(hit->piece_arclength);
    const Vec2 nrm = {-t.y, t.x};
    const Vec2 out = reflect(dir, nrm);
    cum += hit->t;
    result.records.push_back(CollisionRecord{k, hit->global_arclength,
                                             hit->point, dir, out, hit->t, cum,
                                             hit->piece});
    pos = hit->point;
    dir = out;
  }
  return result;
}

namespace {

/// Index of the unique full-circle arc piece, or -1 if there is none.
int full_circle_piece(const geom::Domain& d) {
  int found = -1;
  for (std::size_t i = 0; i < d.pieces().size(); ++i) {
    const auto& p = d.pieces()[i];
    if (!p.is_segment() && p.arc().extent >= kTwoPi - 1e-9) {
      if (found >= 0) return -1;  // not unique
      found = static_cast<int>(i);
    }
  }
  return found;
}

double wrapped_distance(double a, double b, double period) {
  double diff = std::abs(a - b);
  diff = std::fmod(diff, period);
  return std::min(diff, period - diff);
}

struct LineFit {
  double intercept = 0.0, slope = 0.0;
};

LineFit least_squares(const std::vector<double>& xs,
                      const std::vector<double>& ys) {
  const std::size_t m = xs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double den = m * sxx - sx * sx;
  LineFit f;
  f.slope = (m * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / m;
  return f;
}

}  // namespace

GrowthFit separation_growth(const geom::Domain& d, const BilliardState& s0,
                            double eps, int N) {
  if (!(eps > 0.0) || eps > 1e-3)
    throw InvalidParameterError("perturbation angle must lie in (0, 1e-3]");
  if (N < 10) throw InvalidParameterError("need at least 10 collisions");

  const TraceResult ref = trace(d, s0, N);
  const BilliardState twin{s0.position, rotate(s0.direction, eps)};
  const TraceResult per = trace(d, twin, N);

  GrowthFit fit;
  fit.partial = ref.status != TraceStatus::Complete ||
                per.status != TraceStatus::Complete;

  // Boundary coordinate: circle angle when the preset has a distinguished
  // circular piece (disk boundary, dispersing obstacle), arclength otherwise.
  const int circle =
      (d.preset() == "disk" || d.preset() == "sinai") ? full_circle_piece(d) : -1;
  double period = d.perimeter();
  std::vector<double> va, vb;
  if (circle >= 0) {
    fit.coord = SeparationCoord::CircleAngle;
    period = kTwoPi;
    const auto& arc = d.pieces()[circle].arc();
    auto angles = [&](const TraceResult& tr, std::vector<double>& out) {
      for (const auto& r : tr.records)
        if (r.piece == circle)
          out.push_back(arc.a0 + arc.orientation *
                                     (r.s - d.piece_offset(circle)) / arc.r);
    };
    angles(ref, va);
    angles(per, vb);
  } else {
    fit.coord = SeparationCoord::Arclength;
    for (const auto& r : ref.records) va.push_back(r.s);
    for (const auto& r : per.records) vb.push_back(r.s);
  }

  const std::size_t m = std::min(va.size(), vb.size());
  if (m < va.size() || m < vb.size()) fit.partial = true;
  fit.separations.resize(m);
  for (std::size_t i = 0; i < m; ++i)
    fit.separations[i] = wrapped_distance(va[i], vb[i], period);
  if (m < 3) return fit;  // too short to fit; caller sees the flag

  // Fit on the pre-saturation prefix: wrapped distances saturate near half
  // the period, so growth laws are only visible well below it.
  const double cap = 0.25 * period;
  std::size_t p = m;
  for (std::size_t i = 0; i < m; ++i) {
    if (fit.separations[i] >= cap) {
      p = i;
      break;
    }
  }
  if (p < 3) p = std::min<std::size_t>(3, m);

  std::vector<double> ns(p), ys(p);
  for (std::size_t i = 0; i < p; ++i) {
    ns[i] = static_cast<double>(i + 1);
    ys[i] = fit.separations[i];
  }

  // Residuals are compared on a relative scale: growth data spans many
  // decades, and absolute residuals would see only the largest points.
  double yscale = 0.0;
  for (double y : ys) yscale = std::max(yscale, std::abs(y));
  const double floor_y = std::max(yscale * 1e-15, 1e-300);
  auto rel_sse = [&](auto&& predict) {
    double sse = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      const double r =
          (predict(ns[i]) - ys[i]) / std::max(std::abs(ys[i]), floor_y);
      sse += r * r;
    }
    return sse;
  };

  const LineFit lin = least_squares(ns, ys);
  fit.linear_slope = lin.slope;
  fit.linear_intercept = lin.intercept;
  fit.sse_linear =
      rel_sse([&](double n) { return lin.intercept + lin.slope * n; });

  // Exponential model fitted in the log domain, compared in the raw domain.
  std::vector<double> lxs, lys;
  for (std::size_t i = 0; i < p; ++i) {
    if (ys[i] > 0) {
      lxs.push_back(ns[i]);
      lys.push_back(std::log(ys[i]));
    }
  }
  if (lxs.size() < 3) {
    fit.sse_exponential = std::numeric_limits<double>::infinity();
    fit.model = GrowthModel::Linear;
    return fit;
  }
  const LineFit loglin = least_squares(lxs, lys);
  fit.exp_rate = loglin.slope;
  fit.exp_amplitude = std::exp(loglin.intercept);
  fit.sse_exponential = rel_sse(
      [&](double n) { return fit.exp_amplitude * std::exp(fit.exp_rate * n); });

  // Both candidate models have two parameters, so an AIC comparison reduces
  // to comparing residual sums.
  fit.model = fit.sse_exponential < fit.sse_linear ? GrowthModel::Exponential
                                                   : GrowthModel::Linear;
  return fit;
}

BirkhoffResult birkhoff_average(const geom::Domain& d, const BilliardState& s0,
                                const std::function<double(Vec2)>& f,
                                double T) {
  if (!(T > 0)) throw InvalidParameterError("path length T must be positive");
  validate_state(d, s0);

  Vec2 pos = s0.position;
  Vec2 dir = normalized(s0.direction);
  double remaining = T;
  double acc = 0.0;
  BirkhoffResult result;

  while (remaining > 0) {
    const auto hit = d.first_boundary_hit(pos, dir, kRehitTol);
    if (!hit)
      throw InternalError("interior ray failed to meet the boundary");
    const double seg = std::min(hit->t, remaining);

    // Composite 8-point Gauss-Legendre along [pos, pos + seg*dir].
    const int nsub = std::max(1, static_cast<int>(std::ceil(seg / 0.25)));
    const double h = seg / nsub;
    for (int i = 0; i < nsub; ++i) {
      const double mid = (i + 0.5) * h;
      for (int q = 0; q < 8; ++q) {
        const double u = mid + 0.5 * h * kGlNode[q];
        acc += 0.5 * h * kGlWeight[q] * f(pos + u * dir);
      }
    }
    remaining -= seg;
    if (seg < hit->t) break;  // requested length reached mid-chord

    if (hit_is_corner(d, *hit)) {
      result.partial = true;
      break;
    }
    const Vec2 t = d.pieces()[hit->piece].tangent_at(hit->piece_arclength);
    const Vec2 nrm = {-t.y, t.x};
    dir = reflect(dir, nrm);
    pos = hit->point;
  }

  result.traversed_length = T - remaining;
  result.average = acc / result.traversed_length;
  return result;
}

BilliardState random_state(const geom::Domain& d, Rng& rng) {
  const Vec2 lo = d.bbox_lo(), hi = d.bbox_hi();
  const double margin =
      1e-9 * std::max({hi.x - lo.x, hi.y - lo.y, 1.0});
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const Vec2 q = {rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y)};
    if (!d.contains(q) || d.boundary_distance(q) <= margin) continue;
    const double ang = rng.uniform(0.0, kTwoPi);
    return BilliardState{q, {std::cos(ang), std::sin(ang)}};
  }
  throw InternalError("failed to sample an interior point");
}

std::string to_csv(const std::vector<CollisionRecord>& records) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "n,s,x,y,dx_out,dy_out,chord,cumlen\n";
  for (const auto& r : records) {
    os << r.n << ',' << r.s << ',' << r.point.x << ',' << r.point.y << ','
       << r.dir_out.x << ',' << r.dir_out.y << ',' << r.chord << ','
       << r.cumlen << '\n';
  }
  return os.str();
}

}  // namespace qchaos::bil
