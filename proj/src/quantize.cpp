#include "qchaos/quantize.hpp"

#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "qchaos/parallel.hpp"

namespace qchaos::qz {

namespace {
constexpr double kPi = std::numbers::pi;
const std::complex<double> kI(0.0, 1.0);

using Partial = std::function<std::complex<double>(double, double)>;

// Wraps a declared partial, or synthesizes one by central differences with
// a two-step Richardson consistency check.
Partial make_partial(const SymbolField& s, bool wrt_x) {
  const Partial& declared = wrt_x ? s.d_dx : s.d_dp;
  if (declared) return declared;
  const auto eval = s.eval;
  return [eval, wrt_x](double x, double p) {
    const double step = 1e-5;
    auto at = [&](double off) {
      return wrt_x ? eval(x + off, p) : eval(x, p + off);
    };
    const std::complex<double> d1 = (at(step) - at(-step)) / (2 * step);
    const std::complex<double> d2 =
        (at(2 * step) - at(-2 * step)) / (4 * step);
    const std::complex<double> extrap = (4.0 * d1 - d2) / 3.0;
    if (std::abs(d1 - d2) > 1e-3 * (1.0 + std::abs(extrap)))
      throw NeedsDerivativesError(
          "symbol partial derivatives are unreliable under finite "
          "differences; supply analytic partials");
    return extrap;
  };
}

void check_support(const SymbolField& a, const qgrid::GridSpec& g) {
  if (std::isfinite(a.support_x) && a.support_x > 0.5 * g.length())
    throw AliasingError("symbol support exceeds the position box");
  if (std::isfinite(a.support_p) && a.support_p > g.p_max())
    throw AliasingError("symbol support exceeds the momentum band");
}

double lsq_slope(const std::vector<double>& logx,
                 const std::vector<double>& logy) {
  const auto n = static_cast<double>(logx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < logx.size(); ++i) {
    sx += logx[i];
    sy += logy[i];
    sxx += logx[i] * logx[i];
    sxy += logx[i] * logy[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}
}  // namespace

QOperator quantize(const SymbolField& a, const qgrid::GridSpec& g, double t) {
  if (!a.eval) throw InvalidParameterError("quantize: symbol has no evaluator");
  if (t != 0.0 && t != 0.5 && t != 1.0)
    throw InvalidParameterError("quantize: t must be one of 0, 1/2, 1");
  check_support(a, g);

  const int n = g.n();
  // Distinct midpoints t x_m + (1-t) x_n: the x-grid itself for t in
  // {0,1}, the full half-step circle (2n points) for t = 1/2.  Midpoints
  // are taken along the short way around the circle, so index pairs that
  // are adjacent across the box seam evaluate the symbol near the seam,
  // not at the box center.
  const int mid_count = (t == 0.5) ? 2 * n : n;
  auto mid_value = [&](int idx) {
    return (t == 0.5) ? -0.5 * g.length() + 0.5 * idx * g.dx() : g.x(idx);
  };

  // For each midpoint, sum_k a(mid, p_k) w^{kd} over the momentum grid is
  // one unnormalized inverse FFT, giving every displacement d at once.
  Eigen::MatrixXcd rows(mid_count, n);
  parallel_for(static_cast<std::size_t>(mid_count), [&](std::size_t row) {
    const int mi = static_cast<int>(row);
    const double mid = mid_value(mi);
    qgrid::CVec work(static_cast<std::size_t>(n));
    for (int k = -n / 2; k < n / 2; ++k)
      work[static_cast<std::size_t>((k + n) % n)] = a.eval(mid, g.dp() * k);
    qgrid::fft_inplace(work, true);  // (1/N) sum_k ... w^{+kd}
    for (int d = 0; d < n; ++d) rows(mi, d) = work[static_cast<std::size_t>(d)];
  });

  QOperator out{Eigen::MatrixXcd(n, n), g, t == 0.5 && a.real_valued};
  for (int m = 0; m < n; ++m) {
    for (int nn = 0; nn < n; ++nn) {
      const int col = ((m - nn) % n + n) % n;
      if (t != 0.5) {
        out.matrix(m, nn) = rows(t == 1.0 ? m : nn, col);
        continue;
      }
      // Signed displacement in [-n/2, n/2); midpoint = x_nn + d*dx/2 on
      // the half-step circle.
      const int d = ((m - nn + n / 2) % n + n) % n - n / 2;
      const int mi = ((2 * nn + d) % (2 * n) + 2 * n) % (2 * n);
      if (d == -n / 2) {
        // Antipodal pairs have two equally short midpoints; average them
        // to keep the construction symmetric in (m, nn).
        out.matrix(m, nn) =
            0.5 * (rows(mi, col) + rows((mi + n) % (2 * n), col));
      } else {
        out.matrix(m, nn) = rows(mi, col);
      }
    }
  }
  return out;
}

double operator_norm(const Eigen::MatrixXcd& m) {
  // Largest singular value by power iteration on M*M.  The deterministic
  // start vector has nonzero overlap with every singular direction it is
  // likely to meet; the estimate converges even when the top of the
  // spectrum is degenerate.
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  Eigen::VectorXcd v(m.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v(i) = std::complex<double>(1.0 + 0.3 * std::cos(0.7 * double(i)),
                                0.2 * std::sin(1.3 * double(i) + 0.4));
  v /= v.norm();
  double sigma = 0.0;
  for (int it = 0; it < 5000; ++it) {
    const Eigen::VectorXcd w = m.adjoint() * (m * v);
    const double lam = w.norm();  // -> sigma_max^2
    if (lam == 0.0) return 0.0;
    v = w / lam;
    const double next = std::sqrt(lam);
    const bool settled =
        it >= 8 && std::abs(next - sigma) <= 1e-11 * std::max(1.0, next);
    sigma = next;
    if (settled) break;
  }
  return sigma;
}

std::complex<double> poisson_bracket(const SymbolField& a,
                                     const SymbolField& b, double x,
                                     double p) {
  const Partial ax = make_partial(a, true), ap = make_partial(a, false);
  const Partial bx = make_partial(b, true), bp = make_partial(b, false);
  return ax(x, p) * bp(x, p) - ap(x, p) * bx(x, p);
}

namespace {
SymbolField product_symbol(const SymbolField& a, const SymbolField& b) {
  SymbolField c;
  c.eval = [ea = a.eval, eb = b.eval](double x, double p) {
    return ea(x, p) * eb(x, p);
  };
  c.support_x = std::min(a.support_x, b.support_x);
  c.support_p = std::min(a.support_p, b.support_p);
  c.real_valued = a.real_valued && b.real_valued;
  return c;
}
}  // namespace

MoyalResult moyal_product(const SymbolField& a, const SymbolField& b,
                          const qgrid::GridSpec& g) {
  const QOperator A = quantize(a, g, 0.5);
  const QOperator B = quantize(b, g, 0.5);

  MoyalResult out{QOperator{A.matrix * B.matrix, g, false}, 0.0, 0.0};

  const SymbolField c0 = product_symbol(a, b);
  out.err_order0 = operator_norm(out.product.matrix - quantize(c0, g, 0.5).matrix);

  // First-order symbol ab + (ih/2) {a,b}; bind the partials up front so a
  // finite-difference failure surfaces here, not mid-build.
  const Partial ax = make_partial(a, true), ap = make_partial(a, false);
  const Partial bx = make_partial(b, true), bp = make_partial(b, false);
  SymbolField c1 = c0;
  const double h = g.h();
  c1.eval = [=, ea = a.eval, eb = b.eval](double x, double p) {
    const std::complex<double> bracket =
        ax(x, p) * bp(x, p) - ap(x, p) * bx(x, p);
    return ea(x, p) * eb(x, p) + kI * (0.5 * h) * bracket;
  };
  c1.real_valued = false;
  out.err_order1 = operator_norm(out.product.matrix - quantize(c1, g, 0.5).matrix);
  return out;
}

SlopeCheck commutator_check(const SymbolField& a, const SymbolField& b,
                            const std::vector<qgrid::GridSpec>& grids) {
  if (grids.empty())
    throw InvalidParameterError("commutator_check: no grids supplied");

  const Partial ax = make_partial(a, true), ap = make_partial(a, false);
  const Partial bx = make_partial(b, true), bp = make_partial(b, false);
  SymbolField bracket;
  bracket.eval = [=](double x, double p) {
    return ax(x, p) * bp(x, p) - ap(x, p) * bx(x, p);
  };
  bracket.support_x = std::min(a.support_x, b.support_x);
  bracket.support_p = std::min(a.support_p, b.support_p);

  SlopeCheck out;
  bool exact = false;
  for (const auto& g : grids) {
    const Eigen::MatrixXcd A = quantize(a, g, 0.5).matrix;
    const Eigen::MatrixXcd B = quantize(b, g, 0.5).matrix;
    const Eigen::MatrixXcd C = quantize(bracket, g, 0.5).matrix;
    const double rem =
        operator_norm(A * B - B * A - kI * g.h() * C);
    out.h_list.push_back(g.h());
    out.errors.push_back(rem);
    const double scale =
        std::max(1.0, operator_norm(A) * operator_norm(B));
    if (rem <= 1e-13 * scale) exact = true;
  }
  if (exact || out.errors.size() < 2) {
    out.slope = std::numeric_limits<double>::quiet_NaN();
  } else {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < out.errors.size(); ++i) {
      lx.push_back(std::log(out.h_list[i]));
      ly.push_back(std::log(out.errors[i]));
    }
    out.slope = lsq_slope(lx, ly);
  }
  return out;
}

UncertaintyCheck uncertainty_check(const qgrid::CVec& f,
                                   const qgrid::GridSpec& g) {
  const double nf = qgrid::position_norm(f, g);
  if (!(nf > 0.0))
    throw InvalidParameterError("uncertainty_check: state must be nonzero");

  const qgrid::CVec F = qgrid::sft(f, g);
  const double nF = qgrid::momentum_norm(F, g);

  double xsq = 0.0, psq = 0.0;
  for (int j = 0; j < g.n(); ++j)
    xsq += g.x(j) * g.x(j) * std::norm(f[static_cast<std::size_t>(j)]) * g.dx();
  for (int i = 0; i < g.n(); ++i)
    psq += g.p(i) * g.p(i) * std::norm(F[static_cast<std::size_t>(i)]) * g.dp();

  UncertaintyCheck out;
  out.lhs = 0.5 * g.h() * nf * nF;
  out.rhs = std::sqrt(xsq) * std::sqrt(psq);
  out.ratio = out.rhs / out.lhs;
  return out;
}

GardingResult garding_check(const SymbolField& a,
                            const std::vector<qgrid::GridSpec>& grids) {
  if (!a.real_valued)
    throw InvalidParameterError(
        "garding_check: lower bounds need a real symbol");
  GardingResult out;
  for (const auto& g : grids) {
    const QOperator A = quantize(a, g, 0.5);
    // Symmetrize away roundoff before the self-adjoint solve.
    const Eigen::MatrixXcd H =
        0.5 * (A.matrix + A.matrix.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H,
                                                       Eigen::EigenvaluesOnly);
    out.h_list.push_back(g.h());
    out.min_eigenvalue.push_back(es.eigenvalues().minCoeff());
  }
  return out;
}

std::string check_report_json(const std::string& name,
                              const std::vector<double>& h_list,
                              const std::vector<double>& errors, double slope,
                              bool pass) {
  nlohmann::json j;
  j["name"] = name;
  j["h_list"] = h_list;
  j["errors"] = errors;
  if (std::isfinite(slope))
    j["slope"] = slope;
  else
    j["slope"] = nullptr;
  j["pass"] = pass;
  return j.dump(2);
}

io::Raster symbol_raster(const SymbolField& a, const qgrid::GridSpec& g,
                         int nx, int np) {
  io::Raster r{nx, np, {-0.5 * g.length(), -g.p_max()},
               {0.5 * g.length(), g.p_max()},
               std::vector<double>(std::size_t(nx) * np)};
  for (int ip = 0; ip < np; ++ip)
    for (int ix = 0; ix < nx; ++ix) {
      const Vec2 c = r.center(ix, ip);
      r.at(ix, ip) = a.eval(c.x, c.y).real();
    }
  return r;
}

io::Raster husimi_raster(const qgrid::CVec& f, const qgrid::GridSpec& g,
                         int nx, int np) {
  io::Raster r{nx, np, {-0.5 * g.length(), -g.p_max()},
               {0.5 * g.length(), g.p_max()},
               std::vector<double>(std::size_t(nx) * np)};
  const double h = g.h();
  const double amp = std::pow(kPi * h, -0.25);
  for (int ip = 0; ip < np; ++ip) {
    for (int ix = 0; ix < nx; ++ix) {
      const Vec2 c = r.center(ix, ip);
      std::complex<double> overlap = 0.0;
      for (int j = 0; j < g.n(); ++j) {
        const double x = g.x(j);
        const std::complex<double> coherent =
            amp * std::exp(-0.5 * (x - c.x) * (x - c.x) / h) *
            std::exp(kI * (c.y * x / h));
        overlap += std::conj(coherent) * f[static_cast<std::size_t>(j)];
      }
      r.at(ix, ip) = std::norm(overlap * g.dx());
    }
  }
  return r;
}

Eigen::VectorXcd to_eigen(const qgrid::CVec& f) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(f.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v(i) = f[static_cast<std::size_t>(i)];
  return v;
}

qgrid::CVec from_eigen(const Eigen::VectorXcd& v) {
  qgrid::CVec f(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i)
    f[static_cast<std::size_t>(i)] = v(i);
  return f;
}

}  // namespace qchaos::qz
