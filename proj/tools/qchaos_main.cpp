// qchaos: command-line front end for the billiard / spectra / quantization
// toolkit. Every subcommand writes plot-ready CSV/JSON plus a manifest
// recording the resolved configuration; reruns with the same flags and seed
// reproduce the data files byte for byte (only manifest timings move).
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qchaos/analytic_spectra.hpp"
#include "qchaos/billiard.hpp"
#include "qchaos/egorov.hpp"
#include "qchaos/geometry.hpp"
#include "qchaos/grid.hpp"
#include "qchaos/io.hpp"
#include "qchaos/mps.hpp"
#include "qchaos/qe.hpp"
#include "qchaos/quantize.hpp"
#include "qchaos/rng.hpp"
#include "qchaos/special.hpp"
#include "qchaos/spectral_stats.hpp"

namespace {
using nlohmann::json;
using namespace qchaos;

constexpr double kPi = std::numbers::pi;

void write_json(const std::string& path, const json& j) {
  io::write_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Domain selection shared by the geometry-facing subcommands.

struct DomainOpts {
  std::string domain;
  double a = 1.0, b = 1.0;      // rectangle
  double radius = 1.0;          // disk
  double t = 1.0;               // bunimovich aspect
  double w = 4.0, h = 2.0;      // stadium
  double side = 2.0, r_inner = 0.5;  // sinai
};

void add_domain_flags(CLI::App* c, DomainOpts& d) {
  c->set_help_flag("--help", "Print help and exit");  // frees -h for --h
  c->add_option("--domain", d.domain,
                "Preset: rectangle, disk, bunimovich, stadium, sinai")
      ->required();
  c->add_option("--a", d.a, "Rectangle width (default 1)");
  c->add_option("--b", d.b, "Rectangle height (default 1)");
  c->add_option("--radius", d.radius, "Disk radius (default 1)");
  c->add_option("--t", d.t, "Bunimovich aspect parameter (default 1)");
  c->add_option("--w", d.w, "Stadium full width (default 4)");
  c->add_option("--h", d.h, "Stadium height (default 2; cap radius h/2)");
  c->add_option("--side", d.side, "Sinai square side (default 2)");
  c->add_option("--r-inner", d.r_inner, "Sinai obstacle radius (default 0.5)");
}

geom::Domain build_domain(const DomainOpts& o, json& cfg) {
  cfg["domain"] = o.domain;
  if (o.domain == "rectangle") {
    cfg["a"] = o.a;
    cfg["b"] = o.b;
    return geom::make_rectangle(o.a, o.b);
  }
  if (o.domain == "disk") {
    cfg["radius"] = o.radius;
    return geom::make_disk(o.radius);
  }
  if (o.domain == "bunimovich") {
    cfg["t"] = o.t;
    return geom::make_bunimovich(o.t);
  }
  if (o.domain == "stadium") {
    cfg["w"] = o.w;
    cfg["h"] = o.h;
    return geom::make_stadium(o.w, o.h, 0.5 * o.h);
  }
  if (o.domain == "sinai") {
    cfg["side"] = o.side;
    cfg["r_inner"] = o.r_inner;
    return geom::make_sinai(o.side, o.r_inner);
  }
  throw InvalidParameterError("unknown --domain '" + o.domain +
                              "' (rectangle, disk, bunimovich, stadium, "
                              "sinai)");
}

bool is_stadium(const geom::Domain& d) {
  return d.preset() == "bunimovich" || d.preset() == "stadium";
}

// Half-length of the stadium's straight rectangle part.
double stadium_half_width(const geom::Domain& d) {
  return d.preset() == "bunimovich" ? d.params()[0] * kPi / 2
                                    : d.params()[0] / 2;
}

// ---------------------------------------------------------------------------
// Helmholtz-solver options shared by spectrum / spacing / qe / bounce.

struct SolverOpts {
  double lo = 0.0, hi = 0.0;
  int basis_size = 120;
  int boundary_points = 360;
  int interior_points = 240;
  double threshold = -1.0;  // <0: 1e-6 on exact-basis domains, 5e-3 stadium
  double scan_step = 0.0;
  std::string sector = "automatic";
  int normalization_samples = 50000;
};

void add_solver_flags(CLI::App* c, SolverOpts& s, bool window_required) {
  auto* lo = c->add_option("--lo", s.lo, "Window lower edge (eigenvalue)");
  auto* hi = c->add_option("--hi", s.hi, "Window upper edge (eigenvalue)");
  if (window_required) {
    lo->required();
    hi->required();
  }
  c->add_option("--basis-size", s.basis_size, "Trial basis size (default 120)");
  c->add_option("--boundary-points", s.boundary_points,
                "Boundary collocation points (default 360)");
  c->add_option("--interior-points", s.interior_points,
                "Interior collocation points (default 240)");
  c->add_option("--threshold", s.threshold,
                "Tension acceptance threshold (default: 1e-6; 5e-3 on "
                "stadium presets, whose plane-wave bases converge only "
                "algebraically at the straight/arc junction)");
  c->add_option("--scan-step", s.scan_step,
                "Tension scan step (default: eighth of the mean spacing)");
  c->add_option("--sector", s.sector,
                "Symmetry sector: automatic, none, odd-odd, even-even, "
                "odd-even, even-odd");
  c->add_option("--normalization-samples", s.normalization_samples,
                "Monte Carlo points for eigenfunction normalization");
}

mps::Sector parse_sector(const std::string& s) {
  if (s == "automatic") return mps::Sector::automatic;
  if (s == "none") return mps::Sector::none;
  if (s == "odd-odd") return mps::Sector::odd_odd;
  if (s == "even-even") return mps::Sector::even_even;
  if (s == "odd-even") return mps::Sector::odd_even;
  if (s == "even-odd") return mps::Sector::even_odd;
  throw InvalidParameterError("unknown --sector '" + s + "'");
}

mps::MpsConfig build_solver_config(const SolverOpts& o, const geom::Domain& d,
                                   int seed, json& cfg) {
  mps::MpsConfig c;
  c.basis_size = o.basis_size;
  c.boundary_points = o.boundary_points;
  c.interior_points = o.interior_points;
  c.threshold = o.threshold > 0 ? o.threshold : (is_stadium(d) ? 5e-3 : 1e-6);
  c.scan_step = o.scan_step;
  c.sector = parse_sector(o.sector);
  c.seed = static_cast<std::uint64_t>(seed);
  c.normalization_samples = o.normalization_samples;
  cfg["lo"] = o.lo;
  cfg["hi"] = o.hi;
  cfg["basis_size"] = c.basis_size;
  cfg["boundary_points"] = c.boundary_points;
  cfg["interior_points"] = c.interior_points;
  cfg["threshold"] = c.threshold;
  cfg["scan_step"] = c.scan_step;
  cfg["sector"] = o.sector;
  cfg["normalization_samples"] = c.normalization_samples;
  return c;
}

// ---------------------------------------------------------------------------
// Analytic eigenvalue enumeration for weyl / spacing.

std::vector<double> rectangle_levels_below(double a, double b, double lmax) {
  std::vector<double> out;
  const double wa = kPi / a, wb = kPi / b;
  for (int j = 1; j * j * wa * wa <= lmax; ++j)
    for (int k = 1;; ++k) {
      const double lam = j * j * wa * wa + k * k * wb * wb;
      if (lam > lmax) break;
      out.push_back(lam);
    }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> disk_levels_below(double radius, double lmax) {
  std::vector<double> out;
  const double jmax = std::sqrt(lmax) * radius;
  for (int k = 0;; ++k) {
    if (fn::bessel_zero(k, 1) > jmax) break;
    for (int m = 1;; ++m) {
      const double z = fn::bessel_zero(k, m);
      if (z > jmax) break;
      const double lam = z * z / (radius * radius);
      out.push_back(lam);
      if (k > 0) out.push_back(lam);  // cos/sin degeneracy
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Smallest lambda whose Weyl count reaches n, by two fixed-point rounds.
double weyl_inverse(const geom::Domain& d, int n) {
  double lam = 4 * kPi * n / d.area();
  for (int it = 0; it < 3; ++it)
    lam = (4 * kPi * n + d.perimeter() * std::sqrt(lam)) / d.area();
  return lam;
}

// ---------------------------------------------------------------------------
// Symbols for the quantization check battery (and egorov's observable).

double cutoff(double r, double r0, double r1) {
  if (r <= r0) return 1.0;
  if (r >= r1) return 0.0;
  const double s = (r - r0) / (r1 - r0);
  auto g = [](double u) { return std::exp(-1.0 / u); };
  return g(1.0 - s) / (g(1.0 - s) + g(s));
}

qz::SymbolField gaussian_observable(double r0, double r1) {
  qz::SymbolField s;
  s.eval = [r0, r1](double x, double p) {
    const double r = std::sqrt(x * x + p * p);
    return std::complex<double>(
        std::exp(-(x * x + p * p)) * cutoff(r, r0, r1), 0.0);
  };
  s.real_valued = true;
  s.support_x = r1;
  s.support_p = r1;
  return s;
}

int grid_points_for(double h) {
  // Keeps resolution proportional to 1/h (25.6/h -> 128 at h = 0.2).
  int n = 64;
  while (n < 25.6 / h && n < 1024) n *= 2;
  return n;
}

std::vector<qgrid::GridSpec> grids_for(const std::vector<double>& hs,
                                       double length) {
  std::vector<qgrid::GridSpec> g;
  for (double h : hs) g.emplace_back(grid_points_for(h), length, h);
  return g;
}

double loglog_slope(const std::vector<double>& hs,
                    const std::vector<double>& errs) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto n = static_cast<double>(hs.size());
  for (std::size_t i = 0; i < hs.size(); ++i) {
    const double x = std::log(hs[i]), y = std::log(errs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

qgrid::CVec gaussian_state(const qgrid::GridSpec& g, double x0, double width,
                           bool chirped) {
  qgrid::CVec f(static_cast<std::size_t>(g.n()));
  for (int j = 0; j < g.n(); ++j) {
    const double u = g.x(j) - x0;
    const double mag = std::exp(-u * u / (2 * width * width));
    const double phase = chirped ? u * u / (2 * g.h()) : 0.0;
    f[static_cast<std::size_t>(j)] =
        mag * std::complex<double>(std::cos(phase), std::sin(phase));
  }
  return f;
}

// ---------------------------------------------------------------------------
// Subcommand bodies. Each returns the files it wrote (for the manifest).

struct RunOutput {
  json config;
  std::vector<std::string> files;
};

RunOutput run_billiard(const DomainOpts& dom, int collisions, int seed,
                       double x, double y, double angle, bool explicit_start,
                       double eps, const std::string& out) {
  RunOutput r;
  const geom::Domain d = build_domain(dom, r.config);
  if (collisions < 1)
    throw InvalidParameterError("--collisions must be at least 1");
  r.config["collisions"] = collisions;
  r.config["seed"] = seed;

  bil::BilliardState s0;
  if (explicit_start) {
    s0.position = {x, y};
    s0.direction = {std::cos(angle), std::sin(angle)};
    if (!d.contains(s0.position))
      throw InvalidParameterError("start position lies outside the domain");
    r.config["start"] = {{"x", x}, {"y", y}, {"angle", angle}};
  } else {
    Rng rng(static_cast<std::uint64_t>(seed));
    s0 = bil::random_state(d, rng);
    r.config["start"] = "random";
  }

  const bil::TraceResult tr = bil::trace(d, s0, collisions);
  io::write_file(out + "/collisions.csv", bil::to_csv(tr.records));
  r.files.push_back("collisions.csv");

  json summary{
      {"seed", seed},
      {"collisions", tr.records.size()},
      {"status", tr.status == bil::TraceStatus::Complete ? "complete"
                                                         : "corner"},
      {"path_length",
       tr.records.empty() ? 0.0 : tr.records.back().cumlen}};
  if (eps > 0) {
    r.config["eps"] = eps;
    const bil::GrowthFit fit = bil::separation_growth(d, s0, eps, collisions);
    summary["growth"] = {
        {"model",
         fit.model == bil::GrowthModel::Exponential ? "exponential"
                                                    : "linear"},
        {"linear_slope", fit.linear_slope},
        {"exp_rate", fit.exp_rate},
        {"exp_amplitude", fit.exp_amplitude},
        {"pairs", fit.separations.size()},
        {"partial", fit.partial}};
  }
  write_json(out + "/billiard.json", summary);
  r.files.push_back("billiard.json");
  return r;
}

RunOutput run_spectrum(const DomainOpts& dom, const SolverOpts& sol, int seed,
                       bool scan_only, const std::string& out) {
  RunOutput r;
  const geom::Domain d = build_domain(dom, r.config);
  const mps::MpsConfig cfg = build_solver_config(sol, d, seed, r.config);
  r.config["seed"] = seed;
  r.config["scan_only"] = scan_only;

  if (scan_only) {
    const mps::TensionCurve c = mps::tension_scan(d, sol.lo, sol.hi, cfg);
    std::ostringstream csv;
    csv << std::setprecision(17) << "lambda,tension\n";
    for (std::size_t i = 0; i < c.lambdas.size(); ++i)
      csv << c.lambdas[i] << "," << c.tensions[i] << "\n";
    io::write_file(out + "/tension.csv", csv.str());
    r.files.push_back("tension.csv");
    write_json(out + "/scan.json",
               json{{"seed", seed},
                    {"minima", c.minima},
                    {"merged_warning", c.merged_warning}});
    r.files.push_back("scan.json");
    return r;
  }

  const mps::SpectrumWindow w = mps::mps_solve(d, sol.lo, sol.hi, cfg);
  io::write_file(out + "/spectrum.json", w.to_json() + "\n");
  r.files.push_back("spectrum.json");

  std::ostringstream csv;
  csv << std::setprecision(17)
      << "lambda,tension,multiplicity,boundary_residual\n";
  for (const auto& m : w.modes)
    csv << m.lambda << "," << m.tension << "," << m.multiplicity << ","
        << m.boundary_residual << "\n";
  io::write_file(out + "/spectrum.csv", csv.str());
  r.files.push_back("spectrum.csv");
  return r;
}

RunOutput run_weyl(const DomainOpts& dom, double lmax, int seed,
                   const std::string& out) {
  RunOutput r;
  const geom::Domain d = build_domain(dom, r.config);
  if (lmax <= 0) throw InvalidParameterError("--lmax must be positive");
  r.config["lmax"] = lmax;
  r.config["seed"] = seed;

  std::vector<double> levels;
  if (d.preset() == "rectangle")
    levels = rectangle_levels_below(dom.a, dom.b, lmax);
  else if (d.preset() == "disk")
    levels = disk_levels_below(dom.radius, lmax);
  else
    throw InvalidParameterError(
        "weyl enumerates closed-form spectra: --domain rectangle or disk "
        "(use `spectrum` for numeric windows)");

  stats::SpectrumWindow w(levels, d.preset() + " dirichlet");
  const stats::WeylFit fit = stats::weyl_fit(w, d);
  write_json(out + "/weyl.json",
             json{{"seed", seed},
                  {"levels", levels.size()},
                  {"lmax", lmax},
                  {"c1", fit.coeffs.c1},
                  {"c2", fit.coeffs.c2},
                  {"c3", fit.coeffs.c3},
                  {"reference_c1", fit.reference_c1},
                  {"relative_error", fit.relative_error}});
  r.files.push_back("weyl.json");
  io::write_file(out + "/counting.csv", stats::counting_csv(w));
  r.files.push_back("counting.csv");
  return r;
}

RunOutput run_spacing(const DomainOpts& dom, const SolverOpts& sol, int count,
                      int seed, const std::string& out) {
  RunOutput r;
  const geom::Domain d = build_domain(dom, r.config);
  r.config["seed"] = seed;

  std::vector<double> levels;
  std::string source;
  if (d.preset() == "rectangle" || d.preset() == "disk") {
    if (count < 1) throw InvalidParameterError("--count must be positive");
    r.config["count"] = count;
    const double lmax = weyl_inverse(d, count + 50);
    levels = d.preset() == "rectangle"
                 ? rectangle_levels_below(dom.a, dom.b, lmax)
                 : disk_levels_below(dom.radius, lmax);
    if (levels.size() > static_cast<std::size_t>(count))
      levels.resize(static_cast<std::size_t>(count));
    source = d.preset() + " dirichlet analytic";
  } else {
    const mps::MpsConfig cfg = build_solver_config(sol, d, seed, r.config);
    const mps::SpectrumWindow w = mps::mps_solve(d, sol.lo, sol.hi, cfg);
    levels = w.eigenvalues();
    source = d.preset() + " " + w.sector + " numeric";
  }

  stats::SpectrumWindow w(levels, source);
  const stats::WeylFit fit = stats::weyl_fit(w, d);
  const stats::SpacingSample sample = stats::unfold(w, d);
  const stats::SpacingTest test = stats::spacing_test(sample);

  json verdict = json::parse(stats::verdict_json(test));
  verdict["seed"] = seed;
  verdict["source"] = source;
  verdict["levels"] = levels.size();
  verdict["weyl_relative_error"] = fit.relative_error;
  write_json(out + "/verdict.json", verdict);
  r.files.push_back("verdict.json");
  io::write_file(out + "/spacing.csv", stats::spacing_csv(sample));
  r.files.push_back("spacing.csv");
  return r;
}

RunOutput run_quantize_check(const std::vector<double>& hs,
                             const std::string& checks, int seed,
                             const std::string& out) {
  RunOutput r;
  if (hs.empty()) throw InvalidParameterError("--h needs at least one value");
  for (double h : hs)
    if (h <= 0) throw InvalidParameterError("--h values must be positive");
  r.config["h"] = hs;
  r.config["checks"] = checks;
  r.config["seed"] = seed;

  auto wants = [&checks](const std::string& name) {
    return checks == "all" || checks.find(name) != std::string::npos;
  };
  json records = json::array();

  if (wants("hermitian")) {
    qz::SymbolField mixed;
    mixed.eval = [](double x, double p) {
      return std::complex<double>(2.0 + std::sin(x) * std::cos(p), 0.0);
    };
    mixed.real_valued = true;
    std::vector<double> errs;
    for (const auto& g : grids_for(hs, 4 * kPi)) {
      const qz::QOperator A = qz::quantize(mixed, g, 0.5);
      const Eigen::MatrixXcd gap = A.matrix - A.matrix.adjoint();
      errs.push_back(qz::operator_norm(gap) /
                     std::max(1.0, qz::operator_norm(A.matrix)));
    }
    const bool pass =
        std::all_of(errs.begin(), errs.end(), [](double e) { return e < 1e-10; });
    records.push_back(
        json::parse(qz::check_report_json("hermitian", hs, errs, 0.0, pass)));
  }

  if (wants("commutator")) {
    qz::SymbolField sinx;
    sinx.eval = [](double x, double) {
      return std::complex<double>(std::sin(x), 0.0);
    };
    sinx.d_dx = [](double x, double) {
      return std::complex<double>(std::cos(x), 0.0);
    };
    sinx.d_dp = [](double, double) { return std::complex<double>(0.0, 0.0); };
    sinx.real_valued = true;
    qz::SymbolField tapered;  // kinetic symbol, smoothed before the band edge
    tapered.eval = [](double, double p) {
      return std::complex<double>(p * p * cutoff(std::abs(p), 4.0, 5.5), 0.0);
    };
    tapered.real_valued = true;
    tapered.support_p = 5.5;
    const qz::SlopeCheck c =
        qz::commutator_check(sinx, tapered, grids_for(hs, 4 * kPi));
    records.push_back(json::parse(qz::check_report_json(
        "commutator", c.h_list, c.errors, c.slope, c.slope >= 2.0)));
  }

  if (wants("moyal")) {
    qz::SymbolField a;
    a.eval = [](double x, double p) {
      return std::complex<double>(std::exp(-0.7 * (x * x + p * p)), 0.0);
    };
    a.d_dx = [](double x, double p) {
      return std::complex<double>(-1.4 * x * std::exp(-0.7 * (x * x + p * p)),
                                  0.0);
    };
    a.d_dp = [](double x, double p) {
      return std::complex<double>(-1.4 * p * std::exp(-0.7 * (x * x + p * p)),
                                  0.0);
    };
    a.real_valued = true;
    a.support_x = a.support_p = 4.0;
    qz::SymbolField b;
    b.eval = [](double x, double p) {
      const double u = x - 0.5, v = p + 0.3;
      return std::complex<double>(std::exp(-0.7 * (u * u + v * v)), 0.0);
    };
    b.real_valued = true;
    b.support_x = b.support_p = 4.0;
    std::vector<double> errs;
    for (const auto& g : grids_for(hs, 20.0))
      errs.push_back(qz::moyal_product(a, b, g).err_order1);
    const double slope = loglog_slope(hs, errs);
    records.push_back(json::parse(qz::check_report_json(
        "moyal", hs, errs, slope, slope > 1.6 && slope < 2.4)));
  }

  if (wants("garding")) {
    qz::SymbolField xp2;
    xp2.eval = [](double x, double p) {
      const double rr = std::sqrt(x * x + p * p);
      return std::complex<double>(
          1.0 + x * x * p * p * cutoff(rr, 2.2, 3.4), 0.0);
    };
    xp2.real_valued = true;
    const qz::GardingResult g = qz::garding_check(xp2, grids_for(hs, 6 * kPi));
    bool pass = g.min_eigenvalue.back() >= 0.9;
    for (std::size_t i = 1; i < g.min_eigenvalue.size(); ++i)
      pass = pass && g.min_eigenvalue[i] >= g.min_eigenvalue[i - 1] - 1e-3;
    records.push_back(json::parse(qz::check_report_json(
        "garding", g.h_list, g.min_eigenvalue, 0.0, pass)));
  }

  if (wants("uncertainty")) {
    std::vector<double> gauss_err, chirp_ratio;
    for (const auto& g : grids_for(hs, 20.0)) {
      const double w = std::sqrt(g.h());
      gauss_err.push_back(std::abs(
          qz::uncertainty_check(gaussian_state(g, 0.0, w, false), g).ratio -
          1.0));
      chirp_ratio.push_back(
          qz::uncertainty_check(gaussian_state(g, 0.0, w, true), g).ratio);
    }
    const bool gpass = std::all_of(gauss_err.begin(), gauss_err.end(),
                                   [](double e) { return e <= 1e-3; });
    records.push_back(json::parse(
        qz::check_report_json("uncertainty-gaussian", hs, gauss_err, 0.0,
                              gpass)));
    const bool cpass = std::all_of(chirp_ratio.begin(), chirp_ratio.end(),
                                   [](double v) { return v > 1.05; });
    records.push_back(json::parse(qz::check_report_json(
        "uncertainty-chirped", hs, chirp_ratio, 0.0, cpass)));
  }

  if (records.empty())
    throw InvalidParameterError(
        "--checks matched nothing (hermitian, commutator, moyal, garding, "
        "uncertainty, or all)");
  write_json(out + "/checks.json", json{{"seed", seed}, {"checks", records}});
  r.files.push_back("checks.json");
  return r;
}

RunOutput run_egorov(const std::string& vname, double t,
                     const std::vector<double>& hs, double r0, double r1,
                     int seed, const std::string& out) {
  RunOutput r;
  if (t <= 0) throw InvalidParameterError("--t must be positive");
  if (hs.empty()) throw InvalidParameterError("--h needs at least one value");
  r.config["V"] = vname;
  r.config["t"] = t;
  r.config["h"] = hs;
  r.config["r0"] = r0;
  r.config["r1"] = r1;
  r.config["seed"] = seed;

  std::function<double(double)> v, vp;
  if (vname == "cos") {
    v = [](double x) { return std::cos(x); };
    vp = [](double x) { return -std::sin(x); };
  } else if (vname == "zero") {
    v = [](double) { return 0.0; };
    vp = [](double) { return 0.0; };
  } else {
    throw InvalidParameterError("unknown --V '" + vname +
                                "' (cos or zero)");
  }

  const qz::SymbolField a = gaussian_observable(r0, r1);
  const egorov::EgorovCheck c =
      egorov::egorov_check(a, v, vp, grids_for(hs, 6 * kPi), t);
  json rep = json::parse(qz::check_report_json("egorov", c.h_list, c.errors,
                                               c.slope, c.slope >= 0.8));
  rep["seed"] = seed;
  rep["V"] = vname;
  rep["t"] = t;
  write_json(out + "/egorov.json", rep);
  r.files.push_back("egorov.json");

  std::ostringstream csv;
  csv << std::setprecision(17) << "h,error\n";
  for (std::size_t i = 0; i < c.h_list.size(); ++i)
    csv << c.h_list[i] << "," << c.errors[i] << "\n";
  io::write_file(out + "/errors.csv", csv.str());
  r.files.push_back("errors.csv");
  return r;
}

RunOutput run_qe(const DomainOpts& dom, const SolverOpts& sol,
                 std::string observable, int seed, const std::string& out) {
  RunOutput r;
  const geom::Domain d = build_domain(dom, r.config);
  const mps::MpsConfig cfg = build_solver_config(sol, d, seed, r.config);
  r.config["seed"] = seed;
  if (observable == "auto")
    observable = is_stadium(d) ? "rect-part" : "left-half";
  r.config["observable"] = observable;

  const mps::SpectrumWindow win = mps::mps_solve(d, sol.lo, sol.hi, cfg);
  const qe::Quadrature2D quad = qe::normalization_quadrature(d, cfg);

  qe::Observable a;
  a.name = observable;
  if (observable == "rect-part") {
    if (!is_stadium(d))
      throw InvalidParameterError(
          "--observable rect-part needs a stadium preset");
    const double half = stadium_half_width(d);
    a.value = [half](Vec2 p) { return std::abs(p.x) <= half ? 1.0 : 0.0; };
  } else if (observable == "left-half") {
    const double mid = 0.5 * (d.bbox_lo().x + d.bbox_hi().x);
    a.value = [mid](Vec2 p) { return p.x < mid ? 1.0 : 0.0; };
  } else {
    throw InvalidParameterError("unknown --observable '" + observable +
                                "' (rect-part, left-half, auto)");
  }
  a.average = qe::domain_average(a.value, quad);

  const qe::QEReport rep = qe::qe_report(a, win, quad);
  json j = json::parse(rep.to_json());
  j["seed"] = seed;
  write_json(out + "/qe.json", j);
  r.files.push_back("qe.json");
  io::write_file(out + "/qe.csv", rep.to_csv());
  r.files.push_back("qe.csv");
  return r;
}

RunOutput run_bounce(const DomainOpts& dom, const SolverOpts& sol, int nx,
                     int seed, const std::string& out) {
  RunOutput r;
  const geom::Domain d = build_domain(dom, r.config);
  const mps::MpsConfig cfg = build_solver_config(sol, d, seed, r.config);
  r.config["seed"] = seed;
  r.config["nx"] = nx;
  if (nx < 64)
    throw InvalidParameterError("--nx must be at least 64 for the score");

  const mps::SpectrumWindow win = mps::mps_solve(d, sol.lo, sol.hi, cfg);
  const Vec2 lo = d.bbox_lo(), hi = d.bbox_hi();
  const int ny = std::max(
      64, static_cast<int>(std::lround(nx * (hi.y - lo.y) / (hi.x - lo.x))));

  std::ostringstream csv;
  csv << std::setprecision(17)
      << "lambda,rect_mass,rect_fraction,concentration,flagged\n";
  int flagged = 0;
  double max_conc = 0.0, max_lambda = 0.0;
  std::size_t count = 0;
  for (const auto& m : win.modes)
    for (const auto& f : m.functions) {
      const io::Raster field = mps::field_raster(
          [&f](Vec2 q) { return f(q); }, d, nx, ny);
      const qe::BounceScore s = qe::bouncing_ball_score(field, d);
      csv << m.lambda << "," << s.rect_mass << "," << s.rect_fraction << ","
          << s.concentration << "," << (s.flagged ? 1 : 0) << "\n";
      if (s.flagged) ++flagged;
      if (s.concentration > max_conc) {
        max_conc = s.concentration;
        max_lambda = m.lambda;
      }
      ++count;
    }
  if (count == 0)
    throw InsufficientDataError("window contains no modes to score");

  io::write_file(out + "/bounce.csv", csv.str());
  r.files.push_back("bounce.csv");
  write_json(out + "/bounce.json", json{{"seed", seed},
                                        {"modes", count},
                                        {"flagged", flagged},
                                        {"max_concentration", max_conc},
                                        {"max_concentration_lambda",
                                         max_lambda}});
  r.files.push_back("bounce.json");
  return r;
}

// ---------------------------------------------------------------------------
// Config-file merge: a flat JSON object whose keys mirror the long flag
// names is turned into tokens injected before the user's flags, so
// explicit flags win (every option takes the last occurrence).

std::vector<std::string> config_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameterError("cannot read --config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InvalidParameterError("bad JSON in --config " + path + ": " +
                                e.what());
  }
  if (!j.is_object())
    throw InvalidParameterError("--config must hold a JSON object");
  std::vector<std::string> tokens;
  for (const auto& [key, val] : j.items()) {
    if (val.is_boolean()) {
      if (val.get<bool>()) tokens.push_back("--" + key);
      continue;
    }
    std::string text;
    if (val.is_array()) {
      for (std::size_t i = 0; i < val.size(); ++i) {
        if (i) text += ",";
        text += val[i].is_string() ? val[i].get<std::string>()
                                   : val[i].dump();
      }
    } else if (val.is_string()) {
      text = val.get<std::string>();
    } else {
      text = val.dump();
    }
    tokens.push_back("--" + key);
    tokens.push_back(text);
  }
  return tokens;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "qchaos: classical billiards, Helmholtz spectra, spacing statistics, "
      "and semiclassical quantization checks. Outputs are CSV/JSON under "
      "--out; QCHAOS_THREADS caps worker threads."};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print help and exit");  // frees -h / --h

  // Shared state filled by whichever subcommand parses.
  DomainOpts dom;
  SolverOpts sol;
  std::string out = "out", config_path, checks = "all", vname = "cos",
              observable = "auto";
  int seed = 1, collisions = 200, count = 5000, nx = 128;
  double x = 0, y = 0, angle = 0, eps = 0, lmax = 10000, t = 1.0, r0 = 2.0,
         r1 = 2.8;
  std::vector<double> hs{0.2, 0.1, 0.05};
  bool scan_only = false;

  auto add_common = [&](CLI::App* c) {
    c->set_help_flag("--help", "Print help and exit");
    c->add_option("--out", out, "Output directory (default ./out)");
    c->add_option("--config", config_path,
                  "JSON file whose keys mirror the long flags; explicit "
                  "flags override it");
    c->add_option("--seed", seed, "RNG seed recorded in every output");
  };

  CLI::App* billiard = app.add_subcommand(
      "billiard", "Trace specular collisions; optional twin-separation fit");
  add_domain_flags(billiard, dom);
  add_common(billiard);
  billiard->add_option("--collisions", collisions,
                       "Number of boundary collisions (default 200)");
  auto* xopt = billiard->add_option("--x", x, "Start x (with --y)");
  billiard->add_option("--y", y, "Start y");
  billiard->add_option("--angle", angle, "Start direction angle (radians)");
  billiard->add_option("--eps", eps,
                       "Twin-trajectory perturbation for a growth fit");

  CLI::App* spectrum = app.add_subcommand(
      "spectrum", "Dirichlet eigenvalues in a window by boundary collocation");
  add_domain_flags(spectrum, dom);
  add_solver_flags(spectrum, sol, true);
  add_common(spectrum);
  spectrum->add_flag("--scan-only", scan_only,
                     "Write the tension curve without refining modes");

  CLI::App* weyl = app.add_subcommand(
      "weyl", "Counting-function fit against the area law");
  add_domain_flags(weyl, dom);
  add_common(weyl);
  weyl->add_option("--lmax", lmax, "Count levels up to this eigenvalue");

  CLI::App* spacing = app.add_subcommand(
      "spacing", "Unfolded nearest-neighbor spacings and KS verdict");
  add_domain_flags(spacing, dom);
  add_solver_flags(spacing, sol, false);
  add_common(spacing);
  spacing->add_option("--count", count,
                      "Levels to enumerate on closed-form domains");

  CLI::App* qcheck = app.add_subcommand(
      "quantize-check", "Self-checks of the discrete quantization engine");
  add_common(qcheck);
  qcheck->add_option("--h", hs, "Comma-separated h values")->delimiter(',');
  qcheck->add_option("--checks", checks,
                     "Comma list: hermitian,commutator,moyal,garding,"
                     "uncertainty (default all)");

  CLI::App* egorov_cmd = app.add_subcommand(
      "egorov", "Propagation-commutation error versus h");
  add_common(egorov_cmd);
  egorov_cmd->add_option("--V", vname, "Potential: cos or zero");
  egorov_cmd->add_option("--t", t, "Evolution time (default 1.0)");
  egorov_cmd->add_option("--h", hs, "Comma-separated h values")
      ->delimiter(',');
  egorov_cmd->add_option("--r0", r0, "Observable core radius");
  egorov_cmd->add_option("--r1", r1, "Observable support radius");

  CLI::App* qe_cmd = app.add_subcommand(
      "qe", "Matrix-element variance and density-one subset for a window");
  add_domain_flags(qe_cmd, dom);
  add_solver_flags(qe_cmd, sol, true);
  add_common(qe_cmd);
  qe_cmd->add_option("--observable", observable,
                     "rect-part, left-half, or auto");

  CLI::App* bounce = app.add_subcommand(
      "bounce", "Directional concentration scores for window eigenfunctions");
  add_domain_flags(bounce, dom);
  add_solver_flags(bounce, sol, true);
  add_common(bounce);
  bounce->add_option("--nx", nx, "Raster width in cells (default 128)");

  for (CLI::App* c : {billiard, spectrum, weyl, spacing, qcheck, egorov_cmd,
                      qe_cmd, bounce})
    for (CLI::Option* o : c->get_options())
      o->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  // Inject config-file tokens right after the subcommand token.
  std::vector<std::string> tokens(argv + 1, argv + argc);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::string path;
    if (tokens[i] == "--config" && i + 1 < tokens.size())
      path = tokens[i + 1];
    else if (tokens[i].rfind("--config=", 0) == 0)
      path = tokens[i].substr(9);
    if (!path.empty()) {
      std::vector<std::string> extra;
      try {
        extra = config_tokens(path);
      } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
      }
      tokens.insert(tokens.begin() + 1, extra.begin(), extra.end());
      break;
    }
  }
  std::vector<const char*> cargv{argv[0]};
  for (const auto& s : tokens) cargv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  const auto t0 = std::chrono::steady_clock::now();
  RunOutput result;
  std::string command;
  try {
    if (app.got_subcommand(billiard)) {
      command = "billiard";
      result = run_billiard(dom, collisions, seed, x, y, angle,
                            xopt->count() > 0, eps, out);
    } else if (app.got_subcommand(spectrum)) {
      command = "spectrum";
      result = run_spectrum(dom, sol, seed, scan_only, out);
    } else if (app.got_subcommand(weyl)) {
      command = "weyl";
      result = run_weyl(dom, lmax, seed, out);
    } else if (app.got_subcommand(spacing)) {
      command = "spacing";
      result = run_spacing(dom, sol, count, seed, out);
    } else if (app.got_subcommand(qcheck)) {
      command = "quantize-check";
      result = run_quantize_check(hs, checks, seed, out);
    } else if (app.got_subcommand(egorov_cmd)) {
      command = "egorov";
      result = run_egorov(vname, t, hs, r0, r1, seed, out);
    } else if (app.got_subcommand(qe_cmd)) {
      command = "qe";
      result = run_qe(dom, sol, observable, seed, out);
    } else if (app.got_subcommand(bounce)) {
      command = "bounce";
      result = run_bounce(dom, sol, nx, seed, out);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  try {
    json manifest;
    manifest["command"] = command;
    manifest["config"] = result.config;
    manifest["versions"] = json{{"qchaos", kVersion}, {"outputs", 1}};
    manifest["timings"] = json{{"total_seconds", elapsed}};
    manifest["files"] = result.files;
    write_json(out + "/manifest.json", manifest);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
