// Counting statistics: staircase counts against brute enumeration,
// asymptotic fits, Monte Carlo volumes with a semiclassical bridge,
// unfolding sanity, and spacing-law discrimination on synthetic samples.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "qchaos/analytic_spectra.hpp"
#include "qchaos/geometry.hpp"
#include "qchaos/rng.hpp"
#include "qchaos/special.hpp"
#include "qchaos/spectral_stats.hpp"

using namespace qchaos;
using namespace qchaos::stats;

namespace {
constexpr double kPi = std::numbers::pi;

std::vector<double> lambdas(const std::vector<spec::EigenPair>& modes) {
  std::vector<double> out;
  out.reserve(modes.size());
  for (const auto& m : modes) out.push_back(m.lambda);
  return out;
}
}  // namespace

TEST_CASE("count_levels counts strictly smaller eigenvalues") {
  SpectrumWindow rect(lambdas(spec::rectangle_modes(1, 1, spec::Bc::Dirichlet,
                                                    10)));
  CHECK(count_levels(rect, 20.0) == 1);  // only 2 pi^2 ~ 19.74
  CHECK(count_levels(rect, 2 * kPi * kPi) == 0);  // strict: the level itself
  CHECK(count_levels(SpectrumWindow({}), 1e9) == 0);

  // Disk: against direct enumeration of squared Bessel zeros with
  // angular multiplicity.
  SpectrumWindow disk(lambdas(spec::disk_modes(20)));
  int oracle = 0;
  for (int k = 0; k <= 10; ++k) {
    for (int m = 1; m <= 10; ++m) {
      const double z = fn::bessel_zero(k, m);
      if (z * z < 30.0) oracle += (k == 0 ? 1 : 2);
    }
  }
  CHECK(oracle == 5);
  CHECK(count_levels(disk, 30.0) == oracle);
}

TEST_CASE("window construction rejects malformed spectra") {
  CHECK_THROWS_AS(SpectrumWindow({1.0, 0.5}), InvalidParameterError);
  CHECK_THROWS_AS(SpectrumWindow({-1.0}), InvalidParameterError);
  CHECK_THROWS_AS(SpectrumWindow({std::nan("")}), InvalidParameterError);
  CHECK_NOTHROW(SpectrumWindow({1.0, 1.0, 2.0}));  // ties are fine
}

TEST_CASE("counting fit recovers area/(4 pi) on the square") {
  auto modes = spec::rectangle_modes(1, 1, spec::Bc::Dirichlet, 1100);
  std::vector<double> ev;
  for (const auto& m : modes)
    if (m.lambda <= 1e4) ev.push_back(m.lambda);
  REQUIRE(ev.size() > 500);
  SpectrumWindow w(std::move(ev), "square dirichlet");
  const auto d = geom::make_rectangle(1, 1);
  const WeylFit fit = weyl_fit(w, d);
  CHECK(fit.reference_c1 == doctest::Approx(1.0 / (4 * kPi)).epsilon(1e-14));
  CHECK(fit.relative_error < 0.02);
  CHECK(w.unfolding().has_value());
}

TEST_CASE("counting fit on the disk: c1 near 1/4") {
  SpectrumWindow w(lambdas(spec::disk_modes(500)), "disk dirichlet");
  const auto d = geom::make_disk(1.0);
  const WeylFit fit = weyl_fit(w, d);
  CHECK(fit.reference_c1 == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(std::abs(fit.coeffs.c1 - 0.25) / 0.25 < 0.03);
}

TEST_CASE("counting fit requires 50 levels") {
  SpectrumWindow w(lambdas(spec::disk_modes(30)));
  const auto d = geom::make_disk(1.0);
  CHECK_THROWS_AS(weyl_fit(w, d), InsufficientDataError);
}

TEST_CASE("oscillator level count matches 1/(2h)") {
  SpectrumWindow w(lambdas(spec::sho_modes(1, 0.01, 60)), "sho", 0.01, 1);
  // E = (2n+1)h < 1 for n = 0..49.
  CHECK(count_levels(w, 1.0) == 50);
  CHECK(count_levels(w, 1.0) == int(std::lround(1.0 / (2 * 0.01))));
}

TEST_CASE("Monte Carlo volume: unit disk and 4-ball") {
  Rng rng(101);
  auto circ = [](const std::vector<double>& y) {
    return y[0] * y[0] + y[1] * y[1];
  };
  const auto disk =
      phase_volume(circ, {-1.5, -1.5}, {1.5, 1.5}, 0.0, 1.0, 400000, rng);
  CHECK(std::abs(disk.volume - kPi) <= 3 * disk.standard_error);

  auto ball4 = [](const std::vector<double>& y) {
    return y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + y[3] * y[3];
  };
  const auto b4 = phase_volume(ball4, {-1.1, -1.1, -1.1, -1.1},
                               {1.1, 1.1, 1.1, 1.1}, 0.0, 1.0, 400000, rng);
  // |{|x|^2 + |p|^2 <= 1}| in 4 coordinates = pi^2/2.
  CHECK(std::abs(b4.volume - kPi * kPi / 2) <= 3 * b4.standard_error);
}

TEST_CASE("Monte Carlo volume: empty shell, box errors, monotonicity") {
  Rng rng(7);
  auto circ = [](const std::vector<double>& y) {
    return y[0] * y[0] + y[1] * y[1];
  };
  const auto empty =
      phase_volume(circ, {-1, -1}, {1, 1}, 5.0, 6.0, 100000, rng);
  CHECK(empty.volume == 0.0);
  CHECK(empty.hits == 0);

  // Disk of radius 1 clipped by a box of half-width 0.9: the level region
  // touches the faces, which must be reported rather than silently clipped.
  CHECK_THROWS_AS(
      phase_volume(circ, {-0.9, -0.9}, {0.9, 0.9}, 0.0, 1.0, 400000, rng),
      BoxTooSmallError);

  CHECK_THROWS_AS(phase_volume(circ, {-1}, {1, 1}, 0, 1, 100000, rng),
                  InvalidParameterError);
  CHECK_THROWS_AS(phase_volume(circ, {-1, -1}, {1, 1}, 1, 0, 100000, rng),
                  InvalidParameterError);
  CHECK_THROWS_AS(phase_volume(circ, {-1, -1}, {1, 1}, 0, 1, 999, rng),
                  InvalidParameterError);

  // Nested shells: volume grows with b.
  double prev = 0.0;
  for (double b : {0.5, 1.0, 1.5}) {
    Rng local(42);
    const auto v =
        phase_volume(circ, {-2, -2}, {2, 2}, 0.0, b, 200000, local);
    CHECK(v.volume >= prev - 3 * v.standard_error);
    prev = v.volume;
  }
  CHECK(prev > 4.0);  // 1.5 pi ~ 4.71
}

TEST_CASE("volume bridge: level counts near volume/(2 pi h)^n") {
  Rng rng(33);
  auto circ = [](const std::vector<double>& y) {
    return y[0] * y[0] + y[1] * y[1];
  };
  const auto v2 =
      phase_volume(circ, {-1.5, -1.5}, {1.5, 1.5}, 0.0, 1.0, 400000, rng);
  SpectrumWindow one(lambdas(spec::sho_modes(1, 0.05, 40)), "sho", 0.05, 1);
  const double predicted1 = v2.volume / (2 * kPi * 0.05);
  const int got1 = count_levels(one, 1.0);
  CHECK(got1 == 10);
  CHECK(std::abs(got1 - predicted1) / predicted1 < 0.05);

  auto ball4 = [](const std::vector<double>& y) {
    return y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + y[3] * y[3];
  };
  const auto v4 = phase_volume(ball4, {-1.15, -1.15, -1.15, -1.15},
                               {1.15, 1.15, 1.15, 1.15}, 0.0, 1.0201, 400000,
                               rng);
  SpectrumWindow two(lambdas(spec::sho_modes(2, 0.02, 400)), "sho", 0.02, 2);
  // b = 1.01 sits between the degenerate ladders at 1.00 and 1.04, keeping
  // the strict count unambiguous; the volume uses b^2 = 1.0201.
  const double predicted2 = v4.volume / std::pow(2 * kPi * 0.02, 2);
  const int got2 = count_levels(two, 1.01);
  CHECK(got2 == 325);
  CHECK(std::abs(got2 - predicted2) / predicted2 < 0.05);
}

TEST_CASE("unfolding the square: unit mean, monotone, no drift") {
  auto modes = spec::rectangle_modes(1, 1, spec::Bc::Dirichlet, 5000);
  SpectrumWindow w(lambdas(modes), "square");
  const auto d = geom::make_rectangle(1, 1);
  const SpacingSample sample = unfold(w, d);
  CHECK(sample.sorted_spacings().size() == 4999);
  CHECK(std::abs(sample.mean() - 1.0) < 0.02);

  const WeylCoeffs c = *w.unfolding();
  const auto& ev = w.eigenvalues();
  // Monotone map over the window.
  for (std::size_t i = 1; i < ev.size(); ++i)
    CHECK(c(ev[i]) >= c(ev[i - 1]));
  // No systematic drift: |N_smooth(lambda_i) - i| stays o(i).
  double worst = 0.0;
  for (std::size_t i = ev.size() / 2; i < ev.size(); ++i) {
    const double rank = static_cast<double>(i + 1);
    worst = std::max(worst, std::abs(c(ev[i]) - rank) / rank);
  }
  CHECK(worst < 0.05);
}

TEST_CASE("reference spacing laws normalize to unit mass and mean") {
  const auto gl = fn::gauss_legendre(128);
  double mass_p = 0, mean_p = 0, mass_w = 0, mean_w = 0;
  for (int i = 0; i < 128; ++i) {
    const double s = 10.0 * (gl.nodes[i] + 1);  // [0, 20]: e^{-20} < 1e-8
    const double w = 10.0 * gl.weights[i];
    mass_p += w * poisson_spacing_pdf(s);
    mean_p += w * s * poisson_spacing_pdf(s);
    mass_w += w * wigner_spacing_pdf(s);
    mean_w += w * s * wigner_spacing_pdf(s);
  }
  CHECK(mass_p == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(mean_p == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(mass_w == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(mean_w == doctest::Approx(1.0).epsilon(1e-6));
  // CDFs match the densities where it matters.
  CHECK(wigner_spacing_cdf(1.0) ==
        doctest::Approx(1.0 - std::exp(-kPi / 4)).epsilon(1e-15));
}

TEST_CASE("spacing test separates synthetic Poisson and GOE samples") {
  Rng rng(2025);
  std::vector<double> expo, goe;
  for (int i = 0; i < 5000; ++i) {
    double u = rng.uniform();
    while (u == 0.0) u = rng.uniform();
    expo.push_back(-std::log(u));
    double v = rng.uniform();
    goe.push_back(std::sqrt(-4.0 * std::log1p(-v) / kPi));
  }
  const auto p = spacing_test(SpacingSample::from_spacings(expo));
  CHECK(p.ks_poisson < 0.03);
  CHECK(p.verdict == SpacingVerdict::Poisson);
  CHECK(p.ks_goe - p.ks_poisson > 0.05);

  const auto g = spacing_test(SpacingSample::from_spacings(goe));
  CHECK(g.ks_goe < 0.03);
  CHECK(g.verdict == SpacingVerdict::GOE);

  CHECK_THROWS_AS(
      spacing_test(SpacingSample::from_spacings(std::vector<double>(50, 1.0))),
      InsufficientDataError);
}

TEST_CASE("irrational rectangle unfolds to Poisson statistics") {
  const double b = kPi / std::exp(1.0);  // aspect with irrational a^2/b^2
  auto modes = spec::rectangle_modes(1.0, b, spec::Bc::Dirichlet, 5000);
  SpectrumWindow w(lambdas(modes), "rectangle 1 x pi/e");
  const auto d = geom::make_rectangle(1.0, b);
  const auto t = spacing_test(unfold(w, d));
  CHECK(t.ks_poisson < 0.05);
  CHECK(t.verdict == SpacingVerdict::Poisson);
}

TEST_CASE("CSV and JSON output formats") {
  SpectrumWindow w({1.0, 2.5}, "demo");
  const std::string counts = counting_csv(w);
  CHECK(counts == "lambda,N\n1,1\n2.5,2\n");

  auto s = SpacingSample::from_spacings({0.5, 1.5});
  const std::string sp = spacing_csv(s);
  CHECK(sp == "s,ecdf\n0.5,0.5\n1.5,1\n");
  CHECK(s.ecdf(0.4) == 0.0);
  CHECK(s.ecdf(0.5) == 0.5);
  CHECK(s.ecdf(2.0) == 1.0);

  SpacingTest t{0.01, 0.2, SpacingVerdict::Poisson};
  const std::string j = verdict_json(t);
  CHECK(j.find("\"ks_poisson\": 0.01") != std::string::npos);
  CHECK(j.find("\"verdict\": \"poisson\"") != std::string::npos);
}
