#include "qchaos/egorov.hpp"

#include <cmath>
#include <limits>

namespace qchaos::egorov {

namespace {
const std::complex<double> kI(0.0, 1.0);

double wrap(double x, double period) {
  if (period <= 0.0) return x;
  return x - period * std::round(x / period);
}
}  // namespace

PhasePoint integrate(PhasePoint start,
                     const std::function<double(double)>& v_prime, double t,
                     int steps, double period, double p_limit) {
  if (steps < 1) throw InvalidParameterError("integrate: steps must be >= 1");
  const double dt = t / steps;
  double x = start.x, p = start.p;
  double force = -v_prime(wrap(x, period));
  for (int s = 0; s < steps; ++s) {
    const double p_half = p + 0.5 * dt * force;
    x += dt * p_half;
    force = -v_prime(wrap(x, period));
    p = p_half + 0.5 * dt * force;
    if (p_limit > 0.0 && std::abs(p) > p_limit)
      throw BandwidthError(
          "classical trajectory leaves the momentum band");
  }
  return {x, p};
}

Eigen::MatrixXcd propagator(const qz::QOperator& hamiltonian, double t) {
  if (!hamiltonian.hermitian)
    throw InvalidParameterError("propagator: generator must be hermitian");
  const Eigen::MatrixXcd sym =
      0.5 * (hamiltonian.matrix + hamiltonian.matrix.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sym);
  const Eigen::VectorXd& ev = es.eigenvalues();
  Eigen::VectorXcd phases(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    phases(i) = std::exp(-kI * (t * ev(i) / hamiltonian.grid.h()));
  return es.eigenvectors() * phases.asDiagonal() *
         es.eigenvectors().adjoint();
}

namespace {

// The transported-symbol lattice for one grid: all quantization midpoints
// (half-step lattice) by all momentum slots.
struct TransportTable {
  int n;
  double length;
  double dp;
  std::vector<double> values;  // 2n x n, row = half-step midpoint index

  double& at(int mi, int ki) { return values[std::size_t(mi) * n + ki]; }
  double at(int mi, int ki) const { return values[std::size_t(mi) * n + ki]; }
};

struct EnergyBounds {
  double lo;
  double hi;
};

// Range of p^2/2 + V over the symbol's declared support rectangle; any
// trajectory whose conserved energy lies outside can never enter the
// support, so its transported value is zero without integration.
EnergyBounds support_energy_range(const qz::SymbolField& a,
                                  const std::function<double(double)>& v) {
  EnergyBounds b{std::numeric_limits<double>::infinity(),
                 -std::numeric_limits<double>::infinity()};
  const int grid = 101;
  for (int i = 0; i < grid; ++i) {
    const double x = a.support_x * (2.0 * i / (grid - 1) - 1.0);
    for (int j = 0; j < grid; ++j) {
      const double p = a.support_p * (2.0 * j / (grid - 1) - 1.0);
      const double xi = 0.5 * p * p + v(x);
      b.lo = std::min(b.lo, xi);
      b.hi = std::max(b.hi, xi);
    }
  }
  return b;
}

}  // namespace

EgorovCheck egorov_check(const qz::SymbolField& a,
                         const std::function<double(double)>& v,
                         const std::function<double(double)>& v_prime,
                         const std::vector<qgrid::GridSpec>& grids,
                         double t) {
  if (grids.empty())
    throw InvalidParameterError("egorov_check: no grids supplied");
  if (!std::isfinite(t))
    throw InvalidParameterError("egorov_check: time must be finite");
  const bool can_skip =
      std::isfinite(a.support_x) && std::isfinite(a.support_p);

  EgorovCheck out;
  out.slope = std::numeric_limits<double>::quiet_NaN();

  for (const auto& g : grids) {
    const double L = g.length();
    if (std::abs(v(-0.5 * L) - v(0.5 * L)) >
        1e-9 * (1.0 + std::abs(v(0.5 * L))))
      throw InvalidParameterError(
          "egorov_check: potential is not periodic over the grid box");

    qz::SymbolField xi;
    xi.eval = [&v](double x, double p) {
      return std::complex<double>(0.5 * p * p + v(x), 0.0);
    };
    xi.real_valued = true;
    const qz::QOperator hamtn = qz::quantize(xi, g, 0.5);
    const qz::QOperator A = qz::quantize(a, g, 0.5);

    out.h_list.push_back(g.h());
    if (t == 0.0) {
      out.errors.push_back(0.0);
      continue;
    }

    const int n = g.n();
    const int mids = 2 * n;
    EnergyBounds bounds{-std::numeric_limits<double>::infinity(),
                        std::numeric_limits<double>::infinity()};
    double margin = 0.0;
    if (can_skip) {
      bounds = support_energy_range(a, v);
      margin = 1e-3 * (1.0 + bounds.hi - bounds.lo);
    }

    // Collect the trajectories that can matter.
    std::vector<std::pair<int, int>> active;
    for (int mi = 0; mi < mids; ++mi) {
      const double x0 = -0.5 * L + 0.5 * mi * g.dx();
      for (int ki = 0; ki < n; ++ki) {
        const double p0 = g.p(ki);
        if (can_skip) {
          const double e0 = 0.5 * p0 * p0 + v(wrap(x0, L));
          if (e0 > bounds.hi + margin || e0 < bounds.lo - margin) continue;
        }
        active.emplace_back(mi, ki);
      }
    }

    // Calibrate the step count on a probe subset: halving the step must
    // move the transported samples by less than 1e-8.
    auto transported = [&](int mi, int ki, int steps) {
      const PhasePoint end =
          integrate({-0.5 * L + 0.5 * mi * g.dx(), g.p(ki)}, v_prime, t,
                    steps, L, g.p_max());
      return a.eval(wrap(end.x, L), end.p).real();
    };

    int steps = std::max(64, static_cast<int>(std::ceil(std::abs(t) / 0.01)));
    const std::size_t stride = std::max<std::size_t>(1, active.size() / 256);
    for (;; steps *= 2) {
      if (steps > (1 << 20))
        throw InternalError("egorov_check: step calibration did not settle");
      double worst = 0.0;
      for (std::size_t i = 0; i < active.size(); i += stride) {
        const auto [mi, ki] = active[i];
        worst = std::max(worst, std::abs(transported(mi, ki, steps) -
                                         transported(mi, ki, 2 * steps)));
      }
      if (worst < 1e-8) {
        steps *= 2;
        break;
      }
    }

    TransportTable table{n, L, g.dp(),
                         std::vector<double>(std::size_t(mids) * n, 0.0)};
    for (const auto& [mi, ki] : active)
      table.at(mi, ki) = transported(mi, ki, steps);

    // Quantize the transported symbol straight off the lattice values.
    qz::SymbolField at_sym;
    at_sym.real_valued = a.real_valued;
    at_sym.eval = [&table, &g, L](double x, double p) {
      const int mi = static_cast<int>(std::lround((x + 0.5 * L) / (0.5 * g.dx())));
      const int ki = static_cast<int>(std::lround(p / g.dp())) + g.n() / 2;
      if (mi < 0 || mi >= 2 * g.n() || ki < 0 || ki >= g.n())
        throw InternalError("egorov_check: off-lattice symbol request");
      return std::complex<double>(table.at(mi, ki), 0.0);
    };
    const qz::QOperator At = qz::quantize(at_sym, g, 0.5);

    const Eigen::MatrixXcd U = propagator(hamtn, t);
    const Eigen::MatrixXcd heisenberg = U.adjoint() * A.matrix * U;
    out.errors.push_back(qz::operator_norm(heisenberg - At.matrix));
  }

  bool degenerate = out.errors.size() < 2;
  for (double e : out.errors)
    if (e <= 1e-13) degenerate = true;
  if (!degenerate) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto m = static_cast<double>(out.errors.size());
    for (std::size_t i = 0; i < out.errors.size(); ++i) {
      const double lx = std::log(out.h_list[i]);
      const double ly = std::log(out.errors[i]);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    out.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  return out;
}

}  // namespace qchaos::egorov
