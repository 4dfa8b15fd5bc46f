// Quantum-classical propagation comparison: conjugating a quantized
// observable by the Schrödinger propagator of p^2/2 + V(x) versus
// quantizing the observable transported along the classical flow.
#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

#include "qchaos/grid.hpp"
#include "qchaos/quantize.hpp"

namespace qchaos::egorov {

struct PhasePoint {
  double x;
  double p;
};

/// Stormer-Verlet (kick-drift-kick) integration of xdot = p,
/// pdot = -V'(x) over time t with a fixed number of steps. The position
/// fed to V' is reduced modulo `period` (pass 0 for no reduction). A
/// positive p_limit raises BandwidthError as soon as |p| exceeds it at a
/// step boundary.
PhasePoint integrate(PhasePoint start,
                     const std::function<double(double)>& v_prime, double t,
                     int steps, double period, double p_limit = 0.0);

/// exp(-i t H / h) via eigendecomposition. Requires the hermitian flag.
Eigen::MatrixXcd propagator(const qz::QOperator& hamiltonian, double t);

/// Per-grid error e(h) = ||U(-t) Op(a) U(t) - Op(a o Phi^t)|| and its
/// log-log slope across the grids. The classical step count is calibrated
/// until halving it changes the transported samples by < 1e-8. Trajectories
/// whose energy shell cannot reach the symbol's declared support are not
/// integrated (the transported value is zero); integrated trajectories that
/// leave the momentum band raise BandwidthError. V must be grid-periodic.
struct EgorovCheck {
  std::vector<double> h_list;
  std::vector<double> errors;
  double slope;
};

EgorovCheck egorov_check(const qz::SymbolField& a,
                         const std::function<double(double)>& v,
                         const std::function<double(double)>& v_prime,
                         const std::vector<qgrid::GridSpec>& grids, double t);

}  // namespace qchaos::egorov
