// Classical billiard flow: specular reflection, trajectory tracing,
// perturbation-growth experiments, and Birkhoff time averages along chords.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qchaos/geometry.hpp"
#include "qchaos/rng.hpp"

namespace qchaos::bil {

/// Instantaneous state of the point particle (unit speed).
struct BilliardState {
  Vec2 position;   ///< inside the domain (boundary points allowed)
  Vec2 direction;  ///< unit vector within 1e-12
};

/// One boundary collision along a trajectory.
struct CollisionRecord {
  int n = 0;              ///< 1-based collision index
  double s = 0.0;         ///< global boundary arclength of the impact
  Vec2 point;             ///< impact point
  Vec2 dir_in, dir_out;   ///< unit directions before/after reflection
  double chord = 0.0;     ///< straight-line distance since the previous impact
  double cumlen = 0.0;    ///< cumulative path length including this chord
  int piece = 0;          ///< boundary piece that was hit
};

enum class TraceStatus {
  Complete,            ///< requested number of collisions reached
  CornerTermination,   ///< impact within 1e-10 of a non-smooth junction
};

struct TraceResult {
  std::vector<CollisionRecord> records;
  TraceStatus status = TraceStatus::Complete;
};

/// Specular reflection d' = d - 2<d,n>n. Requires <d,n> < 0 (incoming);
/// throws InvalidIncidenceError otherwise.
Vec2 reflect(Vec2 direction, Vec2 normal);

/// Traces n_collisions boundary collisions from the given state. Stops early
/// with CornerTermination if an impact lands within 1e-10 (arclength) of a
/// junction where the boundary tangent is discontinuous.
TraceResult trace(const geom::Domain& d, const BilliardState& s0,
                  int n_collisions);

/// Boundary coordinate used for perturbation separations.
enum class SeparationCoord {
  CircleAngle,  ///< angle on the circular piece (disk boundary or obstacle)
  Arclength,    ///< global boundary arclength, wrapped by the perimeter
};

enum class GrowthModel { Linear, Exponential };

/// Result of a twin-trajectory perturbation experiment.
struct GrowthFit {
  std::vector<double> separations;  ///< per paired collision, coord units
  SeparationCoord coord = SeparationCoord::Arclength;
  GrowthModel model = GrowthModel::Linear;
  double linear_slope = 0.0;      ///< fit separation ~ intercept + slope*n
  double linear_intercept = 0.0;
  double exp_rate = 0.0;          ///< fit separation ~ amp*exp(rate*n)
  double exp_amplitude = 0.0;
  double sse_linear = 0.0;        ///< raw-scale residual sums used for choice
  double sse_exponential = 0.0;
  bool partial = false;           ///< a trajectory terminated before N
};

/// Traces the trajectory from s0 and a twin whose initial direction is
/// rotated by eps, then measures per-collision separations in a boundary
/// coordinate: the circle angle on disk/sinai presets (on the sinai preset
/// only obstacle impacts are paired, matching how dispersing reflections are
/// bookkept), global arclength otherwise. Fits linear and exponential growth
/// models to the pre-saturation prefix and selects by residual comparison.
/// Requires eps in (0, 1e-3] and N >= 10.
GrowthFit separation_growth(const geom::Domain& d, const BilliardState& s0,
                            double eps, int N);

struct BirkhoffResult {
  double average = 0.0;           ///< time average over the traversed path
  double traversed_length = 0.0;  ///< equals T unless terminated early
  bool partial = false;           ///< corner termination before length T
};

/// Time average (1/T) * integral of f along the trajectory, computed chord by
/// chord with composite 8-point Gauss-Legendre quadrature (sub-segments of
/// length <= 0.25 so that discontinuous observables self-average).
BirkhoffResult birkhoff_average(const geom::Domain& d, const BilliardState& s0,
                                const std::function<double(Vec2)>& f, double T);

/// Uniform random interior state: rejection-sampled position, uniform angle.
BilliardState random_state(const geom::Domain& d, Rng& rng);

/// CSV export with header n,s,x,y,dx_out,dy_out,chord,cumlen.
std::string to_csv(const std::vector<CollisionRecord>& records);

}  // namespace qchaos::bil
