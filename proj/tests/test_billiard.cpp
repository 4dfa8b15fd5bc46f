// Billiard dynamics: reflection law, disk angle bookkeeping, separation
// growth (linear vs exponential), Birkhoff averages, CSV export.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "qchaos/billiard.hpp"

using namespace qchaos;
using namespace qchaos::bil;
using qchaos::geom::Domain;

namespace {
constexpr double kPi = std::numbers::pi;

// Independent oracle for the rectangle billiard: unfold reflections into a
// straight line in the plane; impacts are the lattice-line crossings folded
// back into the box by the period-2L triangle wave.
double fold(double u, double period) {
  double v = std::fmod(u, 2 * period);
  if (v < 0) v += 2 * period;
  return v <= period ? v : 2 * period - v;
}

std::vector<Vec2> unfolded_impacts(double a, double b, Vec2 p0, Vec2 dir,
                                   int n) {
  std::vector<double> ts;
  auto push_axis = [&](double x0, double dx, double period) {
    if (std::abs(dx) < 1e-15) return;
    const double step = period / std::abs(dx);
    double m = dx > 0 ? std::ceil(x0 / period) : std::floor(x0 / period);
    if (dx > 0 && m * period <= x0) m += 1;
    if (dx < 0 && m * period >= x0) m -= 1;
    double t = (m * period - x0) / dx;
    for (int i = 0; i < 4 * n && t > 0; ++i) {
      ts.push_back(t);
      t += step;
    }
  };
  push_axis(p0.x, dir.x, a);
  push_axis(p0.y, dir.y, b);
  std::sort(ts.begin(), ts.end());
  std::vector<Vec2> impacts;
  for (std::size_t i = 0; i < ts.size() && impacts.size() < std::size_t(n);
       ++i) {
    if (i + 1 < ts.size() && ts[i + 1] - ts[i] < 1e-12)
      throw std::runtime_error("oracle trajectory passes through a corner");
    impacts.push_back(
        {fold(p0.x + ts[i] * dir.x, a), fold(p0.y + ts[i] * dir.y, b)});
  }
  return impacts;
}

BilliardState disk_boundary_start(double r, double phi0, double alpha) {
  const Vec2 p = {r * std::cos(phi0), r * std::sin(phi0)};
  const Vec2 t = {-std::sin(phi0), std::cos(phi0)};  // CCW tangent
  const Vec2 nrm = {-std::cos(phi0), -std::sin(phi0)};  // inward
  return {p, std::cos(alpha) * t + std::sin(alpha) * nrm};
}

double impact_angle(const Domain& d, const CollisionRecord& r) {
  const Vec2 t = d.pieces()[r.piece].tangent_at(
      r.s - d.piece_offset(r.piece));
  const Vec2 nrm = {-t.y, t.x};
  return std::atan2(dot(r.dir_out, nrm), dot(r.dir_out, t));
}
}  // namespace

TEST_CASE("specular reflection obeys the mirror law") {
  // Head-on reversal and 45-degree mirror.
  Vec2 out = reflect({0, -1}, {0, 1});
  CHECK(out.x == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(out.y == doctest::Approx(1.0).epsilon(1e-15));
  out = reflect(normalized(Vec2{1, -1}), {0, 1});
  CHECK(out.x == doctest::Approx(1 / std::sqrt(2)).epsilon(1e-15));
  CHECK(out.y == doctest::Approx(1 / std::sqrt(2)).epsilon(1e-15));

  // Tangential component preserved, normal component negated; reflecting the
  // reversed outgoing ray recovers the reversed incoming one.
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double na = rng.uniform(0.0, 2 * kPi);
    const Vec2 nrm = {std::cos(na), std::sin(na)};
    const double da = rng.uniform(0.1, kPi - 0.1);
    const Vec2 t = {-nrm.y, nrm.x};
    const Vec2 d = std::cos(kPi + da) * nrm + std::sin(kPi + da) * t;
    if (dot(d, nrm) >= 0) continue;
    const Vec2 r = reflect(d, nrm);
    CHECK(norm(r) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dot(r, t) == doctest::Approx(dot(d, t)).epsilon(1e-12));
    CHECK(dot(r, nrm) == doctest::Approx(-dot(d, nrm)).epsilon(1e-12));
    const Vec2 back = reflect(-1.0 * r, nrm);
    CHECK(norm(back + d) < 1e-12);
  }

  CHECK_THROWS_AS(reflect({0, 1}, {0, 1}), InvalidIncidenceError);
  CHECK_THROWS_AS(reflect({1, 0}, {0, 1}), InvalidIncidenceError);
}

TEST_CASE("disk impacts follow the rotation law phi_n = phi_0 + 2 n alpha") {
  const Domain disk = geom::make_disk(1.0);
  const double alpha = kPi / 3;
  const auto tr = trace(disk, disk_boundary_start(1.0, 0.0, alpha), 200);
  REQUIRE(tr.status == TraceStatus::Complete);
  REQUIRE(tr.records.size() == 200);
  for (const auto& r : tr.records) {
    const double phi = std::atan2(r.point.y, r.point.x);
    const double want = std::fmod(2.0 * r.n * alpha, 2 * kPi);
    double diff = std::abs(phi - want);
    diff = std::fmod(diff, 2 * kPi);
    diff = std::min(diff, 2 * kPi - diff);
    CHECK(diff <= 1e-9 * r.n);
    // All chords subtend the same angle: length 2 sin(alpha).
    CHECK(r.chord == doctest::Approx(2 * std::sin(alpha)).epsilon(1e-12));
  }
  // phi_5 = 10*pi/3 mod 2*pi = 4*pi/3.
  const auto& r5 = tr.records[4];
  const double phi5 = std::atan2(r5.point.y, r5.point.x) + 2 * kPi;
  CHECK(phi5 == doctest::Approx(4 * kPi / 3).epsilon(1e-9));
}

TEST_CASE("disk tangent angle is conserved over ten thousand collisions") {
  const Domain disk = geom::make_disk(1.0);
  const auto tr = trace(disk, disk_boundary_start(1.0, 0.4, 0.77), 10000);
  REQUIRE(tr.status == TraceStatus::Complete);
  const double alpha0 = impact_angle(disk, tr.records.front());
  double worst = 0.0;
  for (const auto& r : tr.records)
    worst = std::max(worst, std::abs(impact_angle(disk, r) - alpha0));
  CHECK(worst <= 1e-10);
}

TEST_CASE("vertical bouncing orbit in the unit square") {
  const Domain rect = geom::make_rectangle(1.0, 1.0);
  const auto tr = trace(rect, {{0.5, 0.5}, {0, 1}}, 40);
  REQUIRE(tr.status == TraceStatus::Complete);
  double cum = 0.0;
  for (const auto& r : tr.records) {
    CHECK(r.point.x == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(r.point.y - (r.n % 2 == 1 ? 1.0 : 0.0)) < 1e-12);
    CHECK(r.chord == doctest::Approx(r.n == 1 ? 0.5 : 1.0).epsilon(1e-12));
    cum += r.chord;
    CHECK(r.cumlen == doctest::Approx(cum).epsilon(1e-15));
    CHECK(norm(r.dir_out) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("rectangle impacts match the unfolding oracle") {
  const double a = 1.0, b = 1.0;
  const Domain rect = geom::make_rectangle(a, b);
  const Vec2 p0 = {0.3, 0.45678};
  const Vec2 dir = {std::cos(0.83), std::sin(0.83)};
  const int n = 40;
  const auto oracle = unfolded_impacts(a, b, p0, dir, n);
  const auto tr = trace(rect, {p0, dir}, n);
  REQUIRE(tr.status == TraceStatus::Complete);
  REQUIRE(tr.records.size() == std::size_t(n));
  for (int i = 0; i < n; ++i)
    CHECK(norm(tr.records[i].point - oracle[i]) < 1e-9);
}

TEST_CASE("trajectories aimed at a corner terminate with partial results") {
  const Domain rect = geom::make_rectangle(1.0, 1.0);
  // Straight into the corner: no completed collision.
  const auto direct = trace(rect, {{0.25, 0.25}, normalized(Vec2{1, 1})}, 10);
  CHECK(direct.status == TraceStatus::CornerTermination);
  CHECK(direct.records.empty());

  // One clean bounce off the bottom wall, then into the corner (1,1).
  const Vec2 din = normalized(Vec2{0.5, -1.0});
  const Vec2 start = Vec2{0.5, 0.0} - 0.4 * din;
  const auto tr = trace(rect, {start, din}, 10);
  CHECK(tr.status == TraceStatus::CornerTermination);
  REQUIRE(tr.records.size() == 1);
  CHECK(tr.records[0].point.x == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(tr.records[0].point.y == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("smooth stadium seams are not corners") {
  // The wall-cap junctions of the stadium are tangent-continuous; a shot
  // aimed exactly at one must reflect, not terminate.
  const Domain stad = geom::make_bunimovich(1.0);
  const Vec2 seam = {kPi / 2, -kPi / 2};  // bottom wall meets the right cap
  const Vec2 start = {0.0, 0.0};
  const auto tr = trace(stad, {start, normalized(seam - start)}, 5);
  CHECK(tr.status == TraceStatus::Complete);
  CHECK(tr.records.size() == 5);
}

TEST_CASE("time reversal retraces impact points") {
  // Integrable tables only: on chaotic tables the positive Lyapunov exponent
  // amplifies double-precision roundoff beyond any fixed tolerance within a
  // few dozen collisions, for any correct implementation.
  for (const Domain& d :
       {geom::make_rectangle(2.0, 1.0), geom::make_disk(1.0),
        geom::make_triangle({0, 0}, {2, 0}, {0.7, 1.3})}) {
    INFO("preset ", d.preset());
    const BilliardState s0 = {d.interior_point(),
                              {std::cos(0.9), std::sin(0.9)}};
    const int n = 50;
    const auto fwd = trace(d, s0, n);
    REQUIRE(fwd.status == TraceStatus::Complete);
    const auto& last = fwd.records.back();
    const auto rev = trace(d, {last.point, -1.0 * last.dir_in}, n - 1);
    REQUIRE(rev.status == TraceStatus::Complete);
    for (int i = 0; i < n - 1; ++i) {
      const Vec2 want = fwd.records[n - 2 - i].point;
      CHECK(norm(rev.records[i].point - want) < 1e-6);
    }
  }
}

TEST_CASE("disk separation growth is exactly linear in collision count") {
  const Domain disk = geom::make_disk(1.0);
  const double eps = 1e-4;
  const auto fit =
      separation_growth(disk, disk_boundary_start(1.0, 0.0, 0.7), eps, 100);
  CHECK_FALSE(fit.partial);
  CHECK(fit.coord == SeparationCoord::CircleAngle);
  REQUIRE(fit.separations.size() == 100);
  for (std::size_t i = 0; i < fit.separations.size(); ++i) {
    const double n = static_cast<double>(i + 1);
    CHECK(std::abs(fit.separations[i] - 2 * eps * n) <= 1e-9 * n);
  }
  CHECK(fit.model == GrowthModel::Linear);
  CHECK(fit.linear_slope == doctest::Approx(2 * eps).epsilon(1e-6));
}

TEST_CASE("dispersing obstacle amplifies perturbations exponentially") {
  const Domain sd = geom::make_sinai(180.0, 30.0);
  // Vertical period-2 orbit between the obstacle top and the upper wall,
  // perturbed by a tiny angle; separations are measured in the obstacle's
  // angular coordinate at successive obstacle impacts.
  const double eps0 = 1e-9;
  const auto fit = separation_growth(sd, {{0.0, 30.0}, {0, 1}}, eps0, 30);
  CHECK(fit.coord == SeparationCoord::CircleAngle);
  REQUIRE(fit.separations.size() >= 6);
  double factor = 3.0;
  for (int k = 1; k <= 6; ++k) {
    CHECK(fit.separations[k - 1] > factor * eps0);
    factor *= 3.0;
  }
  CHECK(fit.model == GrowthModel::Exponential);
  CHECK(fit.exp_rate > std::log(3.0));
}

TEST_CASE("rectangle separations stay within a linear envelope") {
  const Domain rect = geom::make_rectangle(1.0, 1.0);
  const double eps = 1e-5;
  const BilliardState s0 = {{0.3, 0.45678}, {std::cos(0.83), std::sin(0.83)}};
  const auto fit = separation_growth(rect, s0, eps, 60);
  CHECK_FALSE(fit.partial);
  CHECK(fit.coord == SeparationCoord::Arclength);
  REQUIRE(fit.separations.size() == 60);
  // Mean free path is below the domain diameter sqrt(2), so a generous
  // linear envelope in n bounds any integrable-system separation.
  for (std::size_t i = 0; i < fit.separations.size(); ++i)
    CHECK(fit.separations[i] <= 10.0 * eps * std::sqrt(2.0) * double(i + 1));
}

TEST_CASE("Birkhoff average of the constant observable is one") {
  const Domain stad = geom::make_bunimovich(1.0);
  const auto r = birkhoff_average(stad, {{0.3, 0.2}, {std::cos(1.1), std::sin(1.1)}},
                                  [](Vec2) { return 1.0; }, 100.0);
  CHECK_FALSE(r.partial);
  CHECK(r.traversed_length == doctest::Approx(100.0).epsilon(1e-15));
  CHECK(r.average == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("non-ergodic bouncing orbit fails equidistribution") {
  const Domain rect = geom::make_rectangle(1.0, 1.0);
  const auto r = birkhoff_average(
      rect, {{0.5, 0.5}, {0, 1}},
      [](Vec2 q) { return q.x < 0.25 ? 1.0 : 0.0; }, 200.0);
  CHECK(r.average == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("stadium time average approaches the area fraction") {
  const Domain stad = geom::make_bunimovich(1.0);
  const auto f = [](Vec2 q) { return q.x < 0.0 ? 1.0 : 0.0; };
  const auto r = birkhoff_average(
      stad, {{0.37, 0.12}, {std::cos(1.1), std::sin(1.1)}}, f, 5000.0);
  CHECK_FALSE(r.partial);
  // Left half carries exactly half the area by symmetry.
  CHECK(std::abs(r.average - 0.5) < 0.025);
}

TEST_CASE("corner termination yields a flagged partial average") {
  const Domain rect = geom::make_rectangle(1.0, 1.0);
  const Vec2 din = normalized(Vec2{0.5, -1.0});
  const Vec2 start = Vec2{0.5, 0.0} - 0.4 * din;
  const auto r = birkhoff_average(rect, {start, din},
                                  [](Vec2) { return 1.0; }, 500.0);
  CHECK(r.partial);
  CHECK(r.traversed_length < 500.0);
  CHECK(r.average == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("CSV export has the documented columns") {
  const Domain disk = geom::make_disk(1.0);
  const auto tr = trace(disk, disk_boundary_start(1.0, 0.0, 0.7), 5);
  const std::string csv = to_csv(tr.records);
  std::istringstream is(csv);
  std::string line;
  REQUIRE(std::getline(is, line));
  CHECK(line == "n,s,x,y,dx_out,dy_out,chord,cumlen");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 7);
  }
  CHECK(rows == 5);
}

TEST_CASE("random states are deterministic in the seed and valid") {
  const Domain stad = geom::make_bunimovich(1.4);
  Rng r1(77), r2(77);
  for (int i = 0; i < 100; ++i) {
    const BilliardState a = random_state(stad, r1);
    const BilliardState b = random_state(stad, r2);
    CHECK(a.position.x == b.position.x);
    CHECK(a.position.y == b.position.y);
    CHECK(a.direction.x == b.direction.x);
    CHECK(stad.contains(a.position));
    CHECK(norm(a.direction) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("invalid billiard inputs are rejected") {
  const Domain rect = geom::make_rectangle(1.0, 1.0);
  CHECK_THROWS_AS(trace(rect, {{0.5, 0.5}, {0, 2}}, 5), InvalidParameterError);
  CHECK_THROWS_AS(trace(rect, {{2.5, 0.5}, {0, 1}}, 5), InvalidParameterError);
  CHECK_THROWS_AS(trace(rect, {{0.5, 0.5}, {0, 1}}, 0), InvalidParameterError);
  CHECK_THROWS_AS(
      separation_growth(rect, {{0.5, 0.5}, {0, 1}}, 0.0, 20),
      InvalidParameterError);
  CHECK_THROWS_AS(
      separation_growth(rect, {{0.5, 0.5}, {0, 1}}, 0.01, 20),
      InvalidParameterError);
  CHECK_THROWS_AS(
      separation_growth(rect, {{0.5, 0.5}, {0, 1}}, 1e-5, 5),
      InvalidParameterError);
  CHECK_THROWS_AS(birkhoff_average(rect, {{0.5, 0.5}, {0, 1}},
                                   [](Vec2) { return 1.0; }, 0.0),
                  InvalidParameterError);
}
