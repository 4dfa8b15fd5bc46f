// Domain construction, validation, containment, and boundary queries.
#include "qchaos/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

namespace qchaos::geom {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kClosureTol = 1e-12;

double wrap_angle(double a) {
  double w = std::fmod(a, kTwoPi);
  if (w < 0) w += kTwoPi;
  return w;
}

/// Sweep position of angle theta along an arc, in [0, 2pi).
double sweep_position(const Arc& a, double theta) {
  return wrap_angle(static_cast<double>(a.orientation) * (theta - a.a0));
}

bool angle_in_sweep(const Arc& a, double theta, double slack) {
  if (a.extent >= kTwoPi) return true;
  const double w = sweep_position(a, theta);
  return w <= a.extent + slack || w >= kTwoPi - slack;
}

Vec2 arc_point(const Arc& a, double theta) {
  return {a.c.x + a.r * std::cos(theta), a.c.y + a.r * std::sin(theta)};
}

}  // namespace

double BoundaryPiece::length() const {
  if (is_segment()) return norm(segment().p1 - segment().p0);
  return arc().r * arc().extent;
}

Vec2 BoundaryPiece::start() const {
  if (is_segment()) return segment().p0;
  return arc_point(arc(), arc().a0);
}

Vec2 BoundaryPiece::end() const {
  if (is_segment()) return segment().p1;
  const Arc& a = arc();
  return arc_point(a, a.a0 + a.orientation * a.extent);
}

Vec2 BoundaryPiece::point_at(double u) const {
  if (is_segment()) {
    const Segment& s = segment();
    const double len = norm(s.p1 - s.p0);
    return s.p0 + (u / len) * (s.p1 - s.p0);
  }
  const Arc& a = arc();
  return arc_point(a, a.a0 + a.orientation * (u / a.r));
}

Vec2 BoundaryPiece::tangent_at(double u) const {
  if (is_segment()) {
    const Segment& s = segment();
    return normalized(s.p1 - s.p0);
  }
  const Arc& a = arc();
  const double theta = a.a0 + a.orientation * (u / a.r);
  const double o = a.orientation;
  return {-o * std::sin(theta), o * std::cos(theta)};
}

Domain::Domain(std::vector<BoundaryPiece> pieces, std::string preset,
               std::vector<double> params)
    : pieces_(std::move(pieces)),
      preset_(std::move(preset)),
      params_(std::move(params)) {
  validate_and_cache();
}

namespace {

/// Per-piece contribution to the Green's-theorem area (1/2)∮(x dy - y dx).
double green_area(const BoundaryPiece& p) {
  if (p.is_segment()) {
    const Segment& s = p.segment();
    return 0.5 * cross(s.p0, s.p1);
  }
  const Arc& a = p.arc();
  const double delta = a.orientation * a.extent;
  const double a1 = a.a0 + delta;
  return 0.5 * (a.c.x * a.r * (std::sin(a1) - std::sin(a.a0)) -
                a.c.y * a.r * (std::cos(a1) - std::cos(a.a0)) +
                a.r * a.r * delta);
}

/// Chain simplicity: no two pieces intersect except at shared junctions.
/// Intersections within `tol` of a piece endpoint are considered junction
/// contact and allowed.
bool pieces_cross(const BoundaryPiece& pa, const BoundaryPiece& pb, double tol) {
  auto interior_point_of = [&](const BoundaryPiece& p, Vec2 q) {
    return norm(q - p.start()) > tol && norm(q - p.end()) > tol;
  };
  if (pa.is_segment() && pb.is_segment()) {
    const Segment &s1 = pa.segment(), &s2 = pb.segment();
    const Vec2 e1 = s1.p1 - s1.p0, e2 = s2.p1 - s2.p0;
    const double den = cross(e1, e2);
    if (std::abs(den) < 1e-15 * norm(e1) * norm(e2)) return false;  // parallel
    const double t = cross(s2.p0 - s1.p0, e2) / den;
    const double u = cross(s2.p0 - s1.p0, e1) / den;
    if (t < 0 || t > 1 || u < 0 || u > 1) return false;
    const Vec2 q = s1.p0 + t * e1;
    return interior_point_of(pa, q) && interior_point_of(pb, q);
  }
  if (pa.is_segment() != pb.is_segment()) {
    const BoundaryPiece& seg_piece = pa.is_segment() ? pa : pb;
    const BoundaryPiece& arc_piece = pa.is_segment() ? pb : pa;
    const Segment& s = seg_piece.segment();
    const Arc& a = arc_piece.arc();
    const Vec2 e = s.p1 - s.p0;
    const double len = norm(e);
    const Vec2 d = {e.x / len, e.y / len};
    const Vec2 oc = s.p0 - a.c;
    const double b = dot(d, oc);
    const double c = norm_sq(oc) - a.r * a.r;
    const double disc = b * b - c;
    if (disc <= 0) return false;
    const double sq = std::sqrt(disc);
    for (double t : {-b - sq, -b + sq}) {
      if (t < 0 || t > len) continue;
      const Vec2 q = s.p0 + t * d;
      const double theta = std::atan2(q.y - a.c.y, q.x - a.c.x);
      if (!angle_in_sweep(a, theta, 0.0)) continue;
      if (interior_point_of(seg_piece, q) && interior_point_of(arc_piece, q))
        return true;
    }
    return false;
  }
  // arc-arc
  const Arc &a1 = pa.arc(), &a2 = pb.arc();
  const Vec2 d = a2.c - a1.c;
  const double dist = norm(d);
  if (dist < 1e-15) return false;  // concentric: same circle would be caught by closure checks
  if (dist > a1.r + a2.r || dist < std::abs(a1.r - a2.r)) return false;
  const double x = (dist * dist + a1.r * a1.r - a2.r * a2.r) / (2 * dist);
  const double h2 = a1.r * a1.r - x * x;
  const double h = h2 > 0 ? std::sqrt(h2) : 0.0;
  const Vec2 u = {d.x / dist, d.y / dist};
  const Vec2 base = a1.c + x * u;
  for (double sgn : {+1.0, -1.0}) {
    const Vec2 q = {base.x - sgn * h * u.y, base.y + sgn * h * u.x};
    const double th1 = std::atan2(q.y - a1.c.y, q.x - a1.c.x);
    const double th2 = std::atan2(q.y - a2.c.y, q.x - a2.c.x);
    if (!angle_in_sweep(a1, th1, 0.0) || !angle_in_sweep(a2, th2, 0.0)) continue;
    auto interior_of = [&](const BoundaryPiece& p) {
      return norm(q - p.start()) > tol && norm(q - p.end()) > tol;
    };
    if (interior_of(pa) && interior_of(pb)) return true;
    if (h == 0.0) break;
  }
  return false;
}

}  // namespace

void Domain::validate_and_cache() {
  if (pieces_.empty())
    throw InvalidGeometryError("domain requires at least one boundary piece");

  for (const auto& p : pieces_) {
    if (p.is_segment()) {
      if (!(norm(p.segment().p1 - p.segment().p0) > 0))
        throw InvalidGeometryError("zero-length segment");
    } else {
      const Arc& a = p.arc();
      if (!(a.r > 0)) throw InvalidGeometryError("arc radius must be positive");
      if (!(a.extent > 0) || a.extent > kTwoPi + 1e-12)
        throw InvalidGeometryError("arc extent must lie in (0, 2pi]");
      if (a.orientation != 1 && a.orientation != -1)
        throw InvalidGeometryError("arc orientation must be +1 or -1");
    }
  }

  // Closure: the chain is a sequence of loops; each piece either continues
  // the current loop or closes it (next piece starts a new loop). Record each
  // piece's in-loop predecessor for corner-normal lookups at exact junctions.
  prev_in_loop_.assign(pieces_.size(), 0);
  std::size_t loop_start = 0;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const Vec2 e = pieces_[i].end();
    const bool closes_loop = norm(e - pieces_[loop_start].start()) <= kClosureTol;
    const bool continues =
        i + 1 < pieces_.size() && norm(e - pieces_[i + 1].start()) <= kClosureTol;
    if (i + 1 == pieces_.size()) {
      if (!closes_loop)
        throw InvalidGeometryError("boundary chain does not close (tolerance 1e-12)");
      prev_in_loop_[loop_start] = static_cast<int>(i);
    } else if (!continues) {
      if (!closes_loop)
        throw InvalidGeometryError("consecutive pieces do not share endpoints (tolerance 1e-12)");
      prev_in_loop_[loop_start] = static_cast<int>(i);
      loop_start = i + 1;
    } else {
      prev_in_loop_[i + 1] = static_cast<int>(i);
    }
  }
  next_in_loop_.assign(pieces_.size(), 0);
  for (std::size_t i = 0; i < pieces_.size(); ++i)
    next_in_loop_[prev_in_loop_[i]] = static_cast<int>(i);

  // Simplicity: non-neighboring pieces must not cross.
  const double junction_tol = 1e-9;
  for (std::size_t i = 0; i < pieces_.size(); ++i)
    for (std::size_t j = i + 1; j < pieces_.size(); ++j)
      if (pieces_cross(pieces_[i], pieces_[j], junction_tol))
        throw InvalidGeometryError("self-intersecting boundary chain");

  // Cached arclength table, perimeter, signed area, bounding box.
  cum_len_.assign(pieces_.size() + 1, 0.0);
  double area = 0.0;
  bbox_lo_ = {1e300, 1e300};
  bbox_hi_ = {-1e300, -1e300};
  auto grow = [&](Vec2 q) {
    bbox_lo_.x = std::min(bbox_lo_.x, q.x);
    bbox_lo_.y = std::min(bbox_lo_.y, q.y);
    bbox_hi_.x = std::max(bbox_hi_.x, q.x);
    bbox_hi_.y = std::max(bbox_hi_.y, q.y);
  };
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    cum_len_[i + 1] = cum_len_[i] + pieces_[i].length();
    area += green_area(pieces_[i]);
    grow(pieces_[i].start());
    grow(pieces_[i].end());
    if (!pieces_[i].is_segment()) {
      const Arc& a = pieces_[i].arc();
      for (double axis : {0.0, 0.25 * kTwoPi, 0.5 * kTwoPi, 0.75 * kTwoPi})
        if (angle_in_sweep(a, axis, 0.0)) grow(arc_point(a, axis));
    }
  }
  perimeter_ = cum_len_.back();
  area_ = area;
  if (!(area_ > 0))
    throw InvalidGeometryError("domain area must be positive (check orientation)");

  // Interior probe: coarse lattice over the bounding box, keep the sample
  // farthest from the boundary (a stand-in for the largest inscribed ball).
  double best = -1.0;
  const int kGrid = 48;
  for (int iy = 1; iy < kGrid; ++iy) {
    for (int ix = 1; ix < kGrid; ++ix) {
      const Vec2 q = {bbox_lo_.x + (bbox_hi_.x - bbox_lo_.x) * ix / kGrid,
                      bbox_lo_.y + (bbox_hi_.y - bbox_lo_.y) * iy / kGrid};
      if (!contains(q)) continue;
      const double dist = boundary_distance(q);
      if (dist > best) {
        best = dist;
        interior_ = q;
      }
    }
  }
  if (best <= 0)
    throw InvalidGeometryError("no interior point found (degenerate chain?)");
}

double Domain::boundary_distance(Vec2 q) const {
  double best = 1e300;
  for (const auto& p : pieces_) {
    if (p.is_segment()) {
      const Segment& s = p.segment();
      const Vec2 e = s.p1 - s.p0;
      const double t = std::clamp(dot(q - s.p0, e) / norm_sq(e), 0.0, 1.0);
      best = std::min(best, norm(q - (s.p0 + t * e)));
    } else {
      const Arc& a = p.arc();
      const double theta = std::atan2(q.y - a.c.y, q.x - a.c.x);
      if (angle_in_sweep(a, theta, 0.0)) {
        best = std::min(best, std::abs(norm(q - a.c) - a.r));
      } else {
        best = std::min({best, norm(q - p.start()), norm(q - p.end())});
      }
    }
  }
  return best;
}

bool Domain::contains(Vec2 q) const {
  if (boundary_distance(q) <= 1e-12) return true;

  const double scale =
      std::max({bbox_hi_.x - bbox_lo_.x, bbox_hi_.y - bbox_lo_.y, 1.0});
  const double eps_clean = 1e-11 * scale;

  // Even-odd ray cast along +x. Grazing configurations (endpoint or tangent
  // within eps_clean of the ray) are retried with a slightly nudged ray; the
  // nudge stays far below the 1e-6 scale of the containment property tests.
  for (int attempt = 0; attempt < 12; ++attempt) {
    const double dy = (attempt == 0) ? 0.0
                                     : ((attempt % 2 ? 1.0 : -1.0) *
                                        (attempt + 1) * 2.5e-10 * scale);
    const double qy = q.y + dy;
    int crossings = 0;
    bool dirty = false;
    for (const auto& p : pieces_) {
      if (p.is_segment()) {
        const Segment& s = p.segment();
        if (std::abs(s.p0.y - qy) < eps_clean || std::abs(s.p1.y - qy) < eps_clean) {
          dirty = true;
          break;
        }
        if ((s.p0.y > qy) == (s.p1.y > qy)) continue;
        const double x_int =
            s.p0.x + (qy - s.p0.y) * (s.p1.x - s.p0.x) / (s.p1.y - s.p0.y);
        if (x_int > q.x) ++crossings;
      } else {
        const Arc& a = p.arc();
        const double dyc = qy - a.c.y;
        if (std::abs(a.r - std::abs(dyc)) < eps_clean) {
          dirty = true;  // near-tangent ray
          break;
        }
        if (std::abs(dyc) > a.r) continue;
        const double half = std::sqrt(a.r * a.r - dyc * dyc);
        for (double x : {a.c.x - half, a.c.x + half}) {
          if (x <= q.x) continue;
          const double theta = std::atan2(dyc, x - a.c.x);
          if (a.extent < kTwoPi) {
            const double w = sweep_position(a, theta);
            if (w < eps_clean / a.r || w > a.extent - eps_clean / a.r) {
              if (std::abs(w - a.extent) < eps_clean / a.r || w < eps_clean / a.r) {
                dirty = true;
                break;
              }
              continue;
            }
          }
          ++crossings;
        }
        if (dirty) break;
      }
    }
    if (!dirty) return (crossings % 2) == 1;
  }
  throw InternalError("containment ray cast failed to find a clean ray");
}

BoundarySample Domain::boundary_point_and_normal(double s) const {
  if (!(s >= 0.0) || s >= perimeter_)
    throw RangeError("arclength outside [0, perimeter)");
  // Piece lookup; exact junction values use the arriving (left) piece.
  auto it = std::upper_bound(cum_len_.begin(), cum_len_.end(), s);
  int idx = static_cast<int>(it - cum_len_.begin()) - 1;
  double u = s - cum_len_[idx];
  if (u == 0.0) {  // exact junction: take the end of the arriving piece
    idx = prev_in_loop_[idx];
    u = pieces_[idx].length();
  }
  const Vec2 t = pieces_[idx].tangent_at(u);
  return BoundarySample{pieces_[idx].point_at(u), Vec2{-t.y, t.x}, idx, u};
}

std::optional<RayHit> Domain::first_boundary_hit(Vec2 origin, Vec2 dir,
                                                 double t_min) const {
  std::optional<RayHit> best;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const auto& p = pieces_[i];
    if (p.is_segment()) {
      const Segment& s = p.segment();
      const Vec2 e = s.p1 - s.p0;
      const double den = cross(dir, e);
      if (std::abs(den) < 1e-16) continue;  // parallel
      const double t = cross(s.p0 - origin, e) / den;
      const double u = cross(s.p0 - origin, dir) / den;
      const double len = norm(e);
      if (t <= t_min || u < -1e-12 || u > 1.0 + 1e-12) continue;
      if (!best || t < best->t) {
        const double uu = std::clamp(u, 0.0, 1.0);
        best = RayHit{t, s.p0 + uu * e, static_cast<int>(i), uu * len,
                      cum_len_[i] + uu * len};
      }
    } else {
      const Arc& a = p.arc();
      const Vec2 oc = origin - a.c;
      const double b = dot(dir, oc);
      const double c = norm_sq(oc) - a.r * a.r;
      const double disc = b * b - c;
      if (disc <= 0) continue;
      const double sq = std::sqrt(disc);
      // Numerically stable pair of roots.
      const double qroot = -(b + (b >= 0 ? sq : -sq));
      const double roots[2] = {qroot, (qroot != 0.0) ? c / qroot : -2.0 * b};
      for (double t : roots) {
        if (t <= t_min) continue;
        const Vec2 hit = origin + t * dir;
        const double theta = std::atan2(hit.y - a.c.y, hit.x - a.c.x);
        const double slack = 1e-9;
        if (!angle_in_sweep(a, theta, slack)) continue;
        if (!best || t < best->t) {
          double w = sweep_position(a, theta);
          if (w > a.extent) w = (w > 0.5 * (a.extent + kTwoPi)) ? 0.0 : a.extent;
          const double u = w * a.r;
          best = RayHit{t, hit, static_cast<int>(i), u, cum_len_[i] + u};
        }
      }
    }
  }
  return best;
}

std::string Domain::to_json() const {
  nlohmann::json j;
  j["preset"] = preset_;
  j["params"] = params_;
  j["pieces"] = nlohmann::json::array();
  for (const auto& p : pieces_) {
    nlohmann::json pj;
    if (p.is_segment()) {
      const Segment& s = p.segment();
      pj["kind"] = "segment";
      pj["p0"] = {s.p0.x, s.p0.y};
      pj["p1"] = {s.p1.x, s.p1.y};
    } else {
      const Arc& a = p.arc();
      pj["kind"] = "arc";
      pj["center"] = {a.c.x, a.c.y};
      pj["radius"] = a.r;
      pj["start_angle"] = a.a0;
      pj["extent"] = a.extent;
      pj["orientation"] = a.orientation;
    }
    j["pieces"].push_back(pj);
  }
  return j.dump(2);
}

Domain Domain::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameterError(std::string("bad domain JSON: ") + e.what());
  }
  std::vector<BoundaryPiece> pieces;
  try {
    for (const auto& pj : j.at("pieces")) {
      const std::string kind = pj.at("kind");
      if (kind == "segment") {
        Segment s;
        s.p0 = {pj.at("p0")[0], pj.at("p0")[1]};
        s.p1 = {pj.at("p1")[0], pj.at("p1")[1]};
        pieces.push_back({s});
      } else if (kind == "arc") {
        Arc a;
        a.c = {pj.at("center")[0], pj.at("center")[1]};
        a.r = pj.at("radius");
        a.a0 = pj.at("start_angle");
        a.extent = pj.at("extent");
        a.orientation = pj.at("orientation");
        pieces.push_back({a});
      } else {
        throw InvalidParameterError("unknown piece kind: " + kind);
      }
    }
    std::vector<double> params;
    if (j.contains("params")) params = j["params"].get<std::vector<double>>();
    return Domain(std::move(pieces),
                  j.value("preset", std::string("custom")), params);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameterError(std::string("bad domain JSON: ") + e.what());
  }
}

namespace {
void require_positive(double v, const char* name) {
  if (!(v > 0))
    throw InvalidParameterError(std::string(name) + " must be positive");
}
}  // namespace

Domain make_rectangle(double a, double b) {
  require_positive(a, "rectangle side a");
  require_positive(b, "rectangle side b");
  std::vector<BoundaryPiece> pcs = {
      {Segment{{0, 0}, {a, 0}}},
      {Segment{{a, 0}, {a, b}}},
      {Segment{{a, b}, {0, b}}},
      {Segment{{0, b}, {0, 0}}},
  };
  return Domain(std::move(pcs), "rectangle", {a, b});
}

Domain make_disk(double r) {
  require_positive(r, "disk radius");
  std::vector<BoundaryPiece> pcs = {{Arc{{0, 0}, r, 0.0, kTwoPi, +1}}};
  return Domain(std::move(pcs), "disk", {r});
}

namespace {
Domain make_stadium_chain(double half_w, double half_h, const std::string& tag,
                          std::vector<double> params) {
  const double r = half_h;
  std::vector<BoundaryPiece> pcs = {
      {Segment{{-half_w, -half_h}, {half_w, -half_h}}},
      {Arc{{half_w, 0}, r, -0.25 * kTwoPi, 0.5 * kTwoPi, +1}},
      {Segment{{half_w, half_h}, {-half_w, half_h}}},
      {Arc{{-half_w, 0}, r, 0.25 * kTwoPi, 0.5 * kTwoPi, +1}},
  };
  return Domain(std::move(pcs), tag, std::move(params));
}
}  // namespace

Domain make_bunimovich(double t) {
  require_positive(t, "stadium aspect t");
  const double half_pi = 0.25 * kTwoPi;
  return make_stadium_chain(t * half_pi, half_pi, "bunimovich", {t});
}

Domain make_stadium(double w, double h_rect, double r) {
  require_positive(w, "stadium width");
  require_positive(h_rect, "stadium height");
  require_positive(r, "stadium cap radius");
  if (std::abs(r - 0.5 * h_rect) > 1e-9 * h_rect)
    throw InvalidParameterError("stadium cap radius must equal h_rect/2");
  return make_stadium_chain(0.5 * w, 0.5 * h_rect, "stadium", {w, h_rect, r});
}

Domain make_sinai(double side, double r_inner) {
  require_positive(side, "sinai side");
  require_positive(r_inner, "sinai inner radius");
  if (!(r_inner < 0.5 * side))
    throw InvalidParameterError("sinai inner radius must be < side/2");
  const double s2 = 0.5 * side;
  std::vector<BoundaryPiece> pcs = {
      {Segment{{-s2, -s2}, {s2, -s2}}},
      {Segment{{s2, -s2}, {s2, s2}}},
      {Segment{{s2, s2}, {-s2, s2}}},
      {Segment{{-s2, s2}, {-s2, -s2}}},
      // Obstacle traversed clockwise so its left side is the domain interior.
      {Arc{{0, 0}, r_inner, 0.0, kTwoPi, -1}},
  };
  return Domain(std::move(pcs), "sinai", {side, r_inner});
}

Domain make_triangle(Vec2 v0, Vec2 v1, Vec2 v2) {
  const double doubled = cross(v1 - v0, v2 - v0);
  if (std::abs(doubled) < 1e-14)
    throw InvalidParameterError("triangle vertices are collinear");
  if (doubled < 0) std::swap(v1, v2);  // normalize to CCW
  std::vector<BoundaryPiece> pcs = {
      {Segment{v0, v1}}, {Segment{v1, v2}}, {Segment{v2, v0}}};
  return Domain(std::move(pcs), "triangle",
                {v0.x, v0.y, v1.x, v1.y, v2.x, v2.y});
}

Domain build_domain(const std::string& preset, const std::vector<double>& p) {
  auto need = [&](std::size_t n) {
    if (p.size() != n)
      throw InvalidParameterError("preset '" + preset + "' expects " +
                                  std::to_string(n) + " parameters");
  };
  if (preset == "rectangle") {
    need(2);
    return make_rectangle(p[0], p[1]);
  }
  if (preset == "disk") {
    need(1);
    return make_disk(p[0]);
  }
  if (preset == "bunimovich") {
    need(1);
    return make_bunimovich(p[0]);
  }
  if (preset == "stadium") {
    need(3);
    return make_stadium(p[0], p[1], p[2]);
  }
  if (preset == "sinai") {
    need(2);
    return make_sinai(p[0], p[1]);
  }
  if (preset == "triangle") {
    need(6);
    return make_triangle({p[0], p[1]}, {p[2], p[3]}, {p[4], p[5]});
  }
  throw InvalidParameterError("unknown preset: " + preset);
}

}  // namespace qchaos::geom
