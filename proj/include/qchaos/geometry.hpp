// Planar domains bounded by closed chains of line segments and circular
// arcs: presets, containment, boundary parametrization with inward normals,
// exact area/perimeter, ray-boundary intersection, JSON (de)serialization.
#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qchaos/common.hpp"

namespace qchaos::geom {

/// Straight boundary piece from p0 to p1 (length > 0).
struct Segment {
  Vec2 p0, p1;
};

/// Circular boundary piece: center c, radius r, traversed from angle a0
/// through a signed sweep of orientation*extent, extent in (0, 2pi].
/// orientation = +1 counterclockwise, -1 clockwise.
struct Arc {
  Vec2 c;
  double r = 0.0;
  double a0 = 0.0;
  double extent = 0.0;
  int orientation = +1;
};

/// One piece of a boundary chain.
struct BoundaryPiece {
  std::variant<Segment, Arc> shape;

  bool is_segment() const { return std::holds_alternative<Segment>(shape); }
  const Segment& segment() const { return std::get<Segment>(shape); }
  const Arc& arc() const { return std::get<Arc>(shape); }

  double length() const;
  Vec2 start() const;
  Vec2 end() const;
  /// Point at arclength u in [0, length] along the piece.
  Vec2 point_at(double u) const;
  /// Unit tangent in traversal direction at arclength u.
  Vec2 tangent_at(double u) const;
};

/// Result of boundary_point_and_normal.
struct BoundarySample {
  Vec2 point;
  Vec2 normal;  ///< unit, pointing into the domain interior
  int piece = 0;
  double piece_arclength = 0.0;
};

/// Ray-boundary intersection record (parameters of origin + t*dir).
struct RayHit {
  double t = 0.0;
  Vec2 point;
  int piece = 0;
  double piece_arclength = 0.0;
  double global_arclength = 0.0;
};

/// Immutable planar domain bounded by a closed CCW chain (plus, for the
/// Sinai preset, a CW inner obstacle). All queries are pure.
class Domain {
 public:
  /// Builds from an explicit chain list; validates closure (1e-12), piece
  /// positivity, and chain simplicity. Preset builders below are preferred.
  Domain(std::vector<BoundaryPiece> pieces, std::string preset,
         std::vector<double> params);

  const std::vector<BoundaryPiece>& pieces() const { return pieces_; }
  const std::string& preset() const { return preset_; }
  const std::vector<double>& params() const { return params_; }

  double area() const { return area_; }
  double perimeter() const { return perimeter_; }
  Vec2 bbox_lo() const { return bbox_lo_; }
  Vec2 bbox_hi() const { return bbox_hi_; }
  /// A point guaranteed to lie strictly inside.
  Vec2 interior_point() const { return interior_; }

  /// True iff q is in the open region; points within 1e-12 of the boundary
  /// report true.
  bool contains(Vec2 q) const;

  /// Unsigned distance from q to the boundary chain.
  double boundary_distance(Vec2 q) const;

  /// Point and inward unit normal at global arclength s in [0, perimeter).
  /// Exact junctions take the arriving (left) piece's normal.
  BoundarySample boundary_point_and_normal(double s) const;

  /// Nearest boundary intersection of the ray origin + t*dir with t > t_min.
  /// Returns nothing if the ray escapes (possible only for points outside).
  std::optional<RayHit> first_boundary_hit(Vec2 origin, Vec2 dir,
                                           double t_min = 1e-12) const;

  /// Global arclength at the start of piece i.
  double piece_offset(int i) const { return cum_len_[i]; }

  /// Neighbors of piece i within its boundary loop (a single-piece loop,
  /// e.g. a full circle, is its own neighbor on both sides).
  int prev_piece_in_loop(int i) const { return prev_in_loop_[i]; }
  int next_piece_in_loop(int i) const { return next_in_loop_[i]; }

  /// JSON round-trip: {preset, params, pieces:[...]}.
  std::string to_json() const;
  static Domain from_json(const std::string& text);

 private:
  void validate_and_cache();

  std::vector<BoundaryPiece> pieces_;
  std::string preset_;
  std::vector<double> params_;
  std::vector<double> cum_len_;  // size pieces+1
  std::vector<int> prev_in_loop_;  // predecessor of each piece within its loop
  std::vector<int> next_in_loop_;  // successor of each piece within its loop
  double area_ = 0.0;
  double perimeter_ = 0.0;
  Vec2 bbox_lo_, bbox_hi_;
  Vec2 interior_;
};

/// Axis-aligned rectangle [0,a] x [0,b].
Domain make_rectangle(double a, double b);
/// Disk of radius r centered at the origin.
Domain make_disk(double r);
/// Stadium with rectangle [-t*pi/2, t*pi/2] x [-pi/2, pi/2] and half-disk
/// caps of radius pi/2 centered at (+-t*pi/2, 0).
Domain make_bunimovich(double t);
/// Unnormalized stadium: rectangle [-w/2,w/2] x [-h/2,h/2] with half-disk
/// caps of radius r = h/2 at (+-w/2, 0). r must equal h/2.
Domain make_stadium(double w, double h_rect, double r);
/// Square of the given side centered at the origin with a clockwise circular
/// obstacle of radius r_inner at the center (r_inner < side/2).
Domain make_sinai(double side, double r_inner);
/// Triangle through three vertices (any orientation; normalized to CCW).
Domain make_triangle(Vec2 v0, Vec2 v1, Vec2 v2);

/// Dispatch by preset name ("rectangle", "disk", "bunimovich", "stadium",
/// "sinai", "triangle") with positional parameters.
Domain build_domain(const std::string& preset, const std::vector<double>& params);

}  // namespace qchaos::geom
