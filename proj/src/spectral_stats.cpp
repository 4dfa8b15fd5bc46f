#include "qchaos/spectral_stats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

namespace qchaos::stats {

namespace {
constexpr double kPi = std::numbers::pi;
}

SpectrumWindow::SpectrumWindow(std::vector<double> eigenvalues,
                               std::string source, std::optional<double> h,
                               std::optional<int> dim)
    : eigenvalues_(std::move(eigenvalues)),
      source_(std::move(source)),
      h_(h),
      dim_(dim) {
  for (std::size_t i = 0; i < eigenvalues_.size(); ++i) {
    if (!std::isfinite(eigenvalues_[i]) || eigenvalues_[i] < 0.0)
      throw InvalidParameterError(
          "spectrum window: eigenvalues must be finite and nonnegative");
    if (i > 0 && eigenvalues_[i] < eigenvalues_[i - 1])
      throw InvalidParameterError(
          "spectrum window: eigenvalues must be nondecreasing");
  }
  if (h_ && *h_ <= 0.0)
    throw InvalidParameterError("spectrum window: h must be positive");
  if (dim_ && *dim_ < 1)
    throw InvalidParameterError("spectrum window: dimension must be >= 1");
}

int count_levels(const SpectrumWindow& w, double lambda) {
  if (!std::isfinite(lambda))
    throw InvalidParameterError("count_levels: lambda must be finite");
  const auto& ev = w.eigenvalues();
  return static_cast<int>(std::lower_bound(ev.begin(), ev.end(), lambda) -
                          ev.begin());
}

WeylFit weyl_fit(SpectrumWindow& w, const geom::Domain& d) {
  const auto& ev = w.eigenvalues();
  if (ev.size() < 50)
    throw InsufficientDataError("weyl_fit: needs at least 50 levels, got " +
                                std::to_string(ev.size()));

  const auto n = static_cast<Eigen::Index>(ev.size());
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd target(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lambda = ev[static_cast<std::size_t>(i)];
    design(i, 0) = lambda;
    design(i, 1) = std::sqrt(lambda);
    design(i, 2) = 1.0;
    // Midpoint of the staircase jump at lambda_i.
    target(i) = static_cast<double>(i) + 0.5;
  }
  const Eigen::Vector3d c = design.colPivHouseholderQr().solve(target);

  WeylFit fit;
  fit.coeffs = {c(0), c(1), c(2)};
  fit.reference_c1 = d.area() / (4.0 * kPi);
  fit.relative_error =
      std::abs(fit.coeffs.c1 - fit.reference_c1) / fit.reference_c1;
  w.set_unfolding(fit.coeffs);
  return fit;
}

SpacingSample SpacingSample::from_spacings(std::vector<double> s) {
  SpacingSample out;
  double sum = 0.0;
  for (double v : s) {
    if (!std::isfinite(v) || v < 0.0)
      throw InvalidParameterError(
          "spacing sample: spacings must be finite and nonnegative");
    sum += v;
  }
  std::sort(s.begin(), s.end());
  out.spacings_ = std::move(s);
  out.mean_ = out.spacings_.empty()
                  ? 0.0
                  : sum / static_cast<double>(out.spacings_.size());
  return out;
}

double SpacingSample::ecdf(double s) const {
  const auto below = std::upper_bound(spacings_.begin(), spacings_.end(), s) -
                     spacings_.begin();
  return spacings_.empty()
             ? 0.0
             : static_cast<double>(below) /
                   static_cast<double>(spacings_.size());
}

SpacingSample unfold(SpectrumWindow& w, const geom::Domain& d) {
  if (!w.unfolding()) weyl_fit(w, d);
  const WeylCoeffs& c = *w.unfolding();
  const auto& ev = w.eigenvalues();

  std::vector<double> spacings;
  spacings.reserve(ev.size() - 1);
  for (std::size_t i = 1; i < ev.size(); ++i) {
    // The smooth model is monotone over a sane window, but a fitted c2 < 0
    // can dip at tiny lambda; clamp so spacings stay nonnegative.
    spacings.push_back(std::max(0.0, c(ev[i]) - c(ev[i - 1])));
  }
  auto sample = SpacingSample::from_spacings(std::move(spacings));
  if (std::abs(sample.mean() - 1.0) > 0.02)
    throw InternalError("unfold: mean spacing " +
                        std::to_string(sample.mean()) +
                        " is off unity; counting fit is suspect");
  return sample;
}

double poisson_spacing_pdf(double s) { return std::exp(-s); }
double poisson_spacing_cdf(double s) { return 1.0 - std::exp(-s); }
double wigner_spacing_pdf(double s) {
  return 0.5 * kPi * s * std::exp(-0.25 * kPi * s * s);
}
double wigner_spacing_cdf(double s) {
  return 1.0 - std::exp(-0.25 * kPi * s * s);
}

namespace {
double ks_distance(const std::vector<double>& sorted,
                   double (*cdf)(double)) {
  const auto n = static_cast<double>(sorted.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    worst = std::max(worst, std::abs(static_cast<double>(i + 1) / n - f));
    worst = std::max(worst, std::abs(static_cast<double>(i) / n - f));
  }
  return worst;
}
}  // namespace

SpacingTest spacing_test(const SpacingSample& sample) {
  const auto& s = sample.sorted_spacings();
  if (s.size() < 100)
    throw InsufficientDataError("spacing_test: needs at least 100 spacings");

  SpacingTest out;
  out.ks_poisson = ks_distance(s, &poisson_spacing_cdf);
  out.ks_goe = ks_distance(s, &wigner_spacing_cdf);
  if (std::abs(out.ks_poisson - out.ks_goe) > 0.05)
    out.verdict = out.ks_poisson < out.ks_goe ? SpacingVerdict::Poisson
                                              : SpacingVerdict::GOE;
  else
    out.verdict = SpacingVerdict::Inconclusive;
  return out;
}

VolumeEstimate phase_volume(
    const std::function<double(const std::vector<double>&)>& symbol,
    const std::vector<double>& box_lo, const std::vector<double>& box_hi,
    double a, double b, std::size_t samples, Rng& rng) {
  const std::size_t dims = box_lo.size();
  if (dims == 0 || box_hi.size() != dims)
    throw InvalidParameterError("phase_volume: box bounds must be nonempty "
                                "and of equal dimension");
  double box_volume = 1.0;
  for (std::size_t d = 0; d < dims; ++d) {
    if (!std::isfinite(box_lo[d]) || !std::isfinite(box_hi[d]) ||
        box_lo[d] >= box_hi[d])
      throw InvalidParameterError("phase_volume: box must have lo < hi");
    box_volume *= box_hi[d] - box_lo[d];
  }
  if (!(a <= b))
    throw InvalidParameterError("phase_volume: level range needs a <= b");
  if (samples < 100000)
    throw InvalidParameterError(
        "phase_volume: at least 1e5 samples required");

  std::size_t hits = 0;
  std::size_t face_hits = 0;
  std::vector<double> y(dims);
  for (std::size_t k = 0; k < samples; ++k) {
    bool near_face = false;
    for (std::size_t d = 0; d < dims; ++d) {
      const double extent = box_hi[d] - box_lo[d];
      y[d] = box_lo[d] + extent * rng.uniform();
      if (y[d] - box_lo[d] < 1e-3 * extent || box_hi[d] - y[d] < 1e-3 * extent)
        near_face = true;
    }
    const double v = symbol(y);
    if (a <= v && v <= b) {
      ++hits;
      if (near_face) ++face_hits;
    }
  }
  if (hits > 0 &&
      static_cast<double>(face_hits) >= 1e-3 * static_cast<double>(hits))
    throw BoxTooSmallError(
        "phase_volume: level region reaches the sampling box boundary (" +
        std::to_string(face_hits) + " of " + std::to_string(hits) +
        " hits on faces); enlarge the box");

  const double frac = static_cast<double>(hits) / static_cast<double>(samples);
  VolumeEstimate out;
  out.volume = box_volume * frac;
  out.standard_error = box_volume *
                       std::sqrt(std::max(0.0, frac * (1.0 - frac) /
                                                   static_cast<double>(samples)));
  out.hits = hits;
  return out;
}

std::string counting_csv(const SpectrumWindow& w) {
  std::ostringstream os;
  os.precision(17);
  os << "lambda,N\n";
  const auto& ev = w.eigenvalues();
  for (std::size_t i = 0; i < ev.size(); ++i)
    os << ev[i] << ',' << (i + 1) << '\n';
  return os.str();
}

std::string spacing_csv(const SpacingSample& s) {
  std::ostringstream os;
  os.precision(17);
  os << "s,ecdf\n";
  const auto& sp = s.sorted_spacings();
  for (std::size_t i = 0; i < sp.size(); ++i)
    os << sp[i] << ','
       << static_cast<double>(i + 1) / static_cast<double>(sp.size()) << '\n';
  return os.str();
}

std::string verdict_json(const SpacingTest& t) {
  nlohmann::json j;
  j["ks_poisson"] = t.ks_poisson;
  j["ks_goe"] = t.ks_goe;
  switch (t.verdict) {
    case SpacingVerdict::Poisson: j["verdict"] = "poisson"; break;
    case SpacingVerdict::GOE: j["verdict"] = "goe"; break;
    case SpacingVerdict::Inconclusive: j["verdict"] = "inconclusive"; break;
  }
  return j.dump(2);
}

}  // namespace qchaos::stats
