// Closed-form spectra: ordering against brute enumeration, eigenvalue
// equation residuals, orthonormality, Weyl counting, CSV table.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "qchaos/analytic_spectra.hpp"
#include "qchaos/rng.hpp"
#include "qchaos/special.hpp"

using namespace qchaos;
using namespace qchaos::spec;

namespace {
constexpr double kPi = std::numbers::pi;

// 5-point finite-difference Laplacian residual |(-Lap - lambda) f| at q.
double laplace_residual(const EigenPair& p, Vec2 q, double step) {
  const double lap =
      (4.0 * p.eval(q) - p.eval({q.x + step, q.y}) - p.eval({q.x - step, q.y}) -
       p.eval({q.x, q.y + step}) - p.eval({q.x, q.y - step})) /
      (step * step);
  return std::abs(lap - p.lambda * p.eval(q));
}

// Schrödinger residual |(-h^2 Lap + |x|^2 - E) psi| for oscillator modes.
double sho_residual(const EigenPair& p, Vec2 q, double h, int dim,
                    double step) {
  double lap;
  if (dim == 1) {
    lap = (2.0 * p.eval(q) - p.eval({q.x + step, q.y}) -
           p.eval({q.x - step, q.y})) /
          (step * step);
  } else {
    lap = (4.0 * p.eval(q) - p.eval({q.x + step, q.y}) -
           p.eval({q.x - step, q.y}) - p.eval({q.x, q.y + step}) -
           p.eval({q.x, q.y - step})) /
          (step * step);
  }
  const double pot = dim == 1 ? q.x * q.x : q.x * q.x + q.y * q.y;
  return std::abs(h * h * lap + (pot - p.lambda) * p.eval(q));
}

// Gram matrix deviation from identity, given mode values sampled on a
// common quadrature grid with weights.
double gram_deviation(const std::vector<std::vector<double>>& values,
                      const std::vector<double>& weights) {
  const std::size_t n = values.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double g = 0.0;
      for (std::size_t q = 0; q < weights.size(); ++q)
        g += weights[q] * values[i][q] * values[j][q];
      worst = std::max(worst, std::abs(g - (i == j ? 1.0 : 0.0)));
    }
  }
  return worst;
}
}  // namespace

TEST_CASE("rectangle modes: known eigenvalues and lexicographic ties") {
  const auto dir = rectangle_modes(1.0, 1.0, Bc::Dirichlet, 10);
  CHECK(dir[0].lambda == doctest::Approx(2 * kPi * kPi).epsilon(1e-14));
  CHECK(dir[0].index == std::array<int, 2>{1, 1});
  // Degenerate pair 5 pi^2 ordered (1,2) before (2,1).
  CHECK(dir[1].lambda == doctest::Approx(5 * kPi * kPi).epsilon(1e-14));
  CHECK(dir[1].index == std::array<int, 2>{1, 2});
  CHECK(dir[2].index == std::array<int, 2>{2, 1});

  const auto neu = rectangle_modes(1.0, 1.0, Bc::Neumann, 5);
  CHECK(neu[0].lambda == 0.0);
  CHECK(neu[0].index == std::array<int, 2>{0, 0});
  // Constant eigenfunction 1/sqrt(area).
  CHECK(neu[0].eval({0.3, 0.8}) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(neu[0].eval({0.9, 0.1}) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("rectangle ordering matches brute-force enumeration") {
  const double a = 1.0, b = 2.0;
  const int count = 100;
  // Oracle: enumerate all (j,k) <= 40 and sort.
  struct JK {
    double lambda;
    int j, k;
  };
  std::vector<JK> oracle;
  for (int j = 1; j <= 40; ++j)
    for (int k = 1; k <= 40; ++k)
      oracle.push_back({std::pow(j * kPi / a, 2) + std::pow(k * kPi / b, 2),
                        j, k});
  std::sort(oracle.begin(), oracle.end(), [](const JK& x, const JK& y) {
    if (x.lambda != y.lambda) return x.lambda < y.lambda;
    return std::pair(x.j, x.k) < std::pair(y.j, y.k);
  });

  const auto modes = rectangle_modes(a, b, Bc::Dirichlet, count);
  REQUIRE(modes.size() == std::size_t(count));
  for (int i = 0; i < count; ++i) {
    CHECK(modes[i].lambda == doctest::Approx(oracle[i].lambda).epsilon(1e-14));
    CHECK(modes[i].index[0] == oracle[i].j);
    CHECK(modes[i].index[1] == oracle[i].k);
  }
}

TEST_CASE("disk modes: Bessel ground state and degenerate pairs") {
  const auto modes = disk_modes(25);
  const double j01 = fn::bessel_zero(0, 1);
  CHECK(modes[0].lambda == doctest::Approx(j01 * j01).epsilon(1e-12));
  CHECK(modes[0].lambda == doctest::Approx(5.7831859629467845).epsilon(1e-9));
  CHECK(modes[0].index == std::array<int, 2>{0, 1});

  // k >= 1 levels appear as adjacent cos/sin pairs with equal eigenvalue.
  for (std::size_t i = 0; i + 1 < modes.size(); ++i) {
    if (modes[i].index[0] >= 1 && modes[i].component == 0) {
      CHECK(modes[i + 1].lambda == modes[i].lambda);
      CHECK(modes[i + 1].index == modes[i].index);
      CHECK(modes[i + 1].component == 1);
    }
  }
  // Sorted ascending.
  for (std::size_t i = 1; i < modes.size(); ++i)
    CHECK(modes[i].lambda >= modes[i - 1].lambda);
}

TEST_CASE("circle modes: n^2 spectrum with the right multiplicities") {
  const auto modes = circle_modes(9);
  const double want[] = {0, 1, 1, 4, 4, 9, 9, 16, 16};
  for (int i = 0; i < 9; ++i)
    CHECK(modes[i].lambda == doctest::Approx(want[i]).epsilon(1e-15));
  // Pairwise orthogonality of the first 10 modes on a uniform grid.
  const auto ten = circle_modes(10);
  const int grid = 4096;
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    for (int j = i + 1; j < 10; ++j) {
      double g = 0.0;
      for (int q = 0; q < grid; ++q) {
        const double th = 2 * kPi * q / grid;
        const Vec2 pt = {std::cos(th), std::sin(th)};
        g += (2 * kPi / grid) * ten[i].eval(pt) * ten[j].eval(pt);
      }
      worst = std::max(worst, std::abs(g));
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("oscillator modes: spectra and ground-state shape") {
  const auto one = sho_modes(1, 1.0, 6);
  for (int n = 0; n < 6; ++n)
    CHECK(one[n].lambda == doctest::Approx(2.0 * n + 1.0).epsilon(1e-15));

  const auto two = sho_modes(2, 0.5, 6);
  CHECK(two[0].lambda == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(two[1].lambda == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(two[2].lambda == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(two[1].index == std::array<int, 2>{0, 1});
  CHECK(two[2].index == std::array<int, 2>{1, 0});
  CHECK(two[3].lambda == doctest::Approx(3.0).epsilon(1e-15));

  // psi_0 peaks at the origin and has no nodes.
  const auto& g = one[0];
  CHECK(g.eval({0, 0}) > g.eval({0.5, 0}));
  CHECK(g.eval({0, 0}) > g.eval({-0.5, 0}));
  for (double x = -4.0; x <= 4.0; x += 0.25) CHECK(g.eval({x, 0}) > 0.0);
}

TEST_CASE("eigenvalue equation residuals hold at random interior points") {
  Rng rng(11);
  const double step = 1e-3;

  for (const auto& p : rectangle_modes(1.0, 2.0, Bc::Dirichlet, 15)) {
    for (int t = 0; t < 20; ++t) {
      const Vec2 q = {rng.uniform(0.05, 0.95), rng.uniform(0.05, 1.95)};
      CHECK(laplace_residual(p, q, step) < 1e-4 * (1 + p.lambda));
    }
  }
  for (const auto& p : rectangle_modes(1.0, 1.0, Bc::Neumann, 15)) {
    for (int t = 0; t < 20; ++t) {
      const Vec2 q = {rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)};
      CHECK(laplace_residual(p, q, step) < 1e-4 * (1 + p.lambda));
    }
  }
  for (const auto& p : disk_modes(15)) {
    for (int t = 0; t < 20; ++t) {
      const double r = rng.uniform(0.05, 0.9);
      const double th = rng.uniform(0.0, 2 * kPi);
      const Vec2 q = {r * std::cos(th), r * std::sin(th)};
      CHECK(laplace_residual(p, q, step) < 1e-4 * (1 + p.lambda));
    }
  }
  for (const auto& p : sho_modes(1, 0.5, 10)) {
    for (int t = 0; t < 20; ++t) {
      const Vec2 q = {rng.uniform(-2.0, 2.0), 0.0};
      CHECK(sho_residual(p, q, 0.5, 1, step) < 1e-4 * (1 + p.lambda));
    }
  }
  for (const auto& p : sho_modes(2, 0.5, 10)) {
    for (int t = 0; t < 20; ++t) {
      const Vec2 q = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
      CHECK(sho_residual(p, q, 0.5, 2, step) < 1e-4 * (1 + p.lambda));
    }
  }
}

TEST_CASE("Gram matrices of the first 15 modes are the identity") {
  const auto gl64 = fn::gauss_legendre(64);

  SUBCASE("rectangle, Dirichlet and Neumann") {
    for (Bc bc : {Bc::Dirichlet, Bc::Neumann}) {
      const double a = 1.0, b = 2.0;
      const auto modes = rectangle_modes(a, b, bc, 15);
      std::vector<double> w;
      std::vector<Vec2> pts;
      for (int i = 0; i < 64; ++i) {
        for (int j = 0; j < 64; ++j) {
          pts.push_back({0.5 * a * (gl64.nodes[i] + 1),
                         0.5 * b * (gl64.nodes[j] + 1)});
          w.push_back(0.25 * a * b * gl64.weights[i] * gl64.weights[j]);
        }
      }
      std::vector<std::vector<double>> vals(15);
      for (int m = 0; m < 15; ++m)
        for (const auto& q : pts) vals[m].push_back(modes[m].eval(q));
      CHECK(gram_deviation(vals, w) < 1e-6);
    }
  }

  SUBCASE("disk: radial Gauss-Legendre times uniform angles") {
    const auto modes = disk_modes(15);
    const int na = 256;
    std::vector<double> w;
    std::vector<Vec2> pts;
    for (int i = 0; i < 64; ++i) {
      const double r = 0.5 * (gl64.nodes[i] + 1);
      for (int j = 0; j < na; ++j) {
        const double th = 2 * kPi * j / na;
        pts.push_back({r * std::cos(th), r * std::sin(th)});
        w.push_back(0.5 * gl64.weights[i] * r * (2 * kPi / na));
      }
    }
    std::vector<std::vector<double>> vals(15);
    for (int m = 0; m < 15; ++m)
      for (const auto& q : pts) vals[m].push_back(modes[m].eval(q));
    CHECK(gram_deviation(vals, w) < 1e-6);
  }

  SUBCASE("oscillator in one and two dimensions") {
    const double h = 0.7;
    const auto gl200 = fn::gauss_legendre(200);
    const double L = 12.0 * std::sqrt(h);
    {
      const auto modes = sho_modes(1, h, 15);
      std::vector<double> w;
      std::vector<Vec2> pts;
      for (int i = 0; i < 200; ++i) {
        pts.push_back({L * gl200.nodes[i], 0.0});
        w.push_back(L * gl200.weights[i]);
      }
      std::vector<std::vector<double>> vals(15);
      for (int m = 0; m < 15; ++m)
        for (const auto& q : pts) vals[m].push_back(modes[m].eval(q));
      CHECK(gram_deviation(vals, w) < 1e-6);
    }
    {
      const auto modes = sho_modes(2, h, 15);
      const auto gl120 = fn::gauss_legendre(120);
      std::vector<double> w;
      std::vector<Vec2> pts;
      for (int i = 0; i < 120; ++i) {
        for (int j = 0; j < 120; ++j) {
          pts.push_back({L * gl120.nodes[i], L * gl120.nodes[j]});
          w.push_back(L * L * gl120.weights[i] * gl120.weights[j]);
        }
      }
      std::vector<std::vector<double>> vals(15);
      for (int m = 0; m < 15; ++m)
        for (const auto& q : pts) vals[m].push_back(modes[m].eval(q));
      CHECK(gram_deviation(vals, w) < 1e-6);
    }
  }
}

TEST_CASE("Dirichlet counting matches the lattice oracle up to 1e4") {
  // Oracle: count lattice pairs with pi^2 (j^2 + k^2) <= lambda directly.
  auto oracle_count = [](double lambda) {
    int c = 0;
    for (int j = 1; j <= 40; ++j)
      for (int k = 1; k <= 40; ++k)
        if (kPi * kPi * (j * j + k * k) <= lambda) ++c;
    return c;
  };
  const auto modes = rectangle_modes(1.0, 1.0, Bc::Dirichlet, 1100);
  REQUIRE(modes.back().lambda > 1e4);
  for (double lambda : {100.0, 1000.0, 5000.0, 9999.0, 10000.0}) {
    const int got = static_cast<int>(
        std::count_if(modes.begin(), modes.end(),
                      [&](const EigenPair& p) { return p.lambda <= lambda; }));
    CHECK(got == oracle_count(lambda));
  }
}

TEST_CASE("mode table CSV lists multiplicities") {
  const auto modes = disk_modes(5);
  const std::string csv = mode_table_csv(modes);
  std::istringstream is(csv);
  std::string line;
  REQUIRE(std::getline(is, line));
  CHECK(line == "family,j,k,component,lambda,multiplicity");
  int rows = 0;
  bool saw_pair = false;
  while (std::getline(is, line)) {
    ++rows;
    if (line.find("disk,1,1,") == 0 && line.back() == '2') saw_pair = true;
  }
  CHECK(rows == 5);
  CHECK(saw_pair);
}
