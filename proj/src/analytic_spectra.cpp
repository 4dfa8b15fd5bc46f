#include "qchaos/analytic_spectra.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "qchaos/special.hpp"

namespace qchaos::spec {
namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
}

std::vector<EigenPair> rectangle_modes(double a, double b, Bc bc, int count) {
  if (!(a > 0) || !(b > 0))
    throw InvalidParameterError("rectangle sides must be positive");
  if (count < 1) throw InvalidParameterError("count must be >= 1");
  if (bc == Bc::None)
    throw InvalidParameterError("rectangle modes need dirichlet or neumann");

  const int lo = (bc == Bc::Dirichlet) ? 1 : 0;
  // Grow the index box until the K-th eigenvalue provably lies inside it:
  // any (j,k) outside the box beats min((J pi/a)^2, (J pi/b)^2).
  int box = static_cast<int>(std::ceil(2 * std::sqrt(double(count)))) + 3;
  std::vector<EigenPair> modes;
  for (;;) {
    modes.clear();
    for (int j = lo; j <= box; ++j) {
      for (int k = lo; k <= box; ++k) {
        EigenPair p;
        p.family = "rectangle";
        p.bc = bc;
        p.index = {j, k};
        p.lambda = (j * kPi / a) * (j * kPi / a) + (k * kPi / b) * (k * kPi / b);
        modes.push_back(std::move(p));
      }
    }
    std::sort(modes.begin(), modes.end(), [](const auto& x, const auto& y) {
      if (x.lambda != y.lambda) return x.lambda < y.lambda;
      return x.index < y.index;
    });
    const double guard = std::pow(box * kPi / std::max(a, b), 2);
    if (static_cast<int>(modes.size()) >= count &&
        modes[count - 1].lambda <= guard)
      break;
    box *= 2;
  }
  modes.resize(count);

  for (auto& p : modes) {
    const int j = p.index[0], k = p.index[1];
    const double cj = (bc == Bc::Dirichlet || j > 0) ? std::sqrt(2.0 / a)
                                                     : std::sqrt(1.0 / a);
    const double ck = (bc == Bc::Dirichlet || k > 0) ? std::sqrt(2.0 / b)
                                                     : std::sqrt(1.0 / b);
    p.norm_const = cj * ck;
    const double wj = j * kPi / a, wk = k * kPi / b;
    const double c = p.norm_const;
    if (bc == Bc::Dirichlet) {
      p.eval = [c, wj, wk](Vec2 q) {
        return c * std::sin(wj * q.x) * std::sin(wk * q.y);
      };
    } else {
      p.eval = [c, wj, wk](Vec2 q) {
        return c * std::cos(wj * q.x) * std::cos(wk * q.y);
      };
    }
  }
  return modes;
}

std::vector<EigenPair> disk_modes(int count) {
  if (count < 1) throw InvalidParameterError("count must be >= 1");

  // Collect all zeros j_{k,m} <= X (using j_{k,1} > k to bound the orders),
  // growing X until enough modes (with angular multiplicity) are available.
  // Initial cap from the leading counting asymptotics N ~ X^2/4.
  double X = 2.0 * std::sqrt(static_cast<double>(count)) + 5.0;
  std::vector<EigenPair> modes;
  for (;;) {
    modes.clear();
    for (int k = 0; static_cast<double>(k) < X; ++k) {
      for (int m = 1;; ++m) {
        const double z = fn::bessel_zero(k, m);
        if (z > X) break;
        for (int comp = 0; comp < (k == 0 ? 1 : 2); ++comp) {
          EigenPair p;
          p.family = "disk";
          p.bc = Bc::Dirichlet;
          p.index = {k, m};
          p.component = comp;
          p.lambda = z * z;
          // Normalization on the unit disk: the radial integral of
          // J_k(z r)^2 r dr is J_{k+1}(z)^2 / 2; angular integral is
          // 2 pi (k=0) or pi (k>=1).
          const double radial = 0.5 * std::pow(fn::bessel_j(k + 1, z), 2);
          const double angular = (k == 0) ? 2 * kPi : kPi;
          p.norm_const = 1.0 / std::sqrt(angular * radial);
          const double c = p.norm_const;
          const int kk = k;
          p.eval = [c, kk, z, comp](Vec2 q) {
            const double r = std::sqrt(q.x * q.x + q.y * q.y);
            const double th = std::atan2(q.y, q.x);
            const double ang =
                comp == 0 ? std::cos(kk * th) : std::sin(kk * th);
            return c * fn::bessel_j(kk, z * r) * ang;
          };
          modes.push_back(std::move(p));
        }
      }
    }
    if (static_cast<int>(modes.size()) >= count) break;
    X *= 1.5;
  }
  std::sort(modes.begin(), modes.end(), [](const auto& x, const auto& y) {
    if (x.lambda != y.lambda) return x.lambda < y.lambda;
    if (x.index != y.index) return x.index < y.index;
    return x.component < y.component;
  });
  modes.resize(count);
  return modes;
}

std::vector<EigenPair> circle_modes(int count) {
  if (count < 1) throw InvalidParameterError("count must be >= 1");
  std::vector<EigenPair> modes;
  for (int n = 0; static_cast<int>(modes.size()) < count; ++n) {
    for (int comp = 0; comp < (n == 0 ? 1 : 2); ++comp) {
      if (static_cast<int>(modes.size()) == count) break;
      EigenPair p;
      p.family = "circle";
      p.bc = Bc::None;
      p.index = {n, 0};
      p.component = comp;
      p.lambda = static_cast<double>(n) * n;
      p.norm_const =
          (n == 0) ? 1.0 / std::sqrt(2 * kPi) : 1.0 / std::sqrt(kPi);
      const double c = p.norm_const;
      p.eval = [c, n, comp](Vec2 q) {
        const double th = std::atan2(q.y, q.x);
        if (n == 0) return c;
        return c * (comp == 0 ? std::cos(n * th) : std::sin(n * th));
      };
      modes.push_back(std::move(p));
    }
  }
  return modes;
}

std::vector<EigenPair> sho_modes(int dim, double h, int count) {
  if (dim != 1 && dim != 2)
    throw InvalidParameterError("oscillator dimension must be 1 or 2");
  if (!(h > 0)) throw InvalidParameterError("h must be positive");
  if (count < 1) throw InvalidParameterError("count must be >= 1");

  const double sqrt_h = std::sqrt(h);
  std::vector<EigenPair> modes;
  if (dim == 1) {
    for (int n = 0; n < count; ++n) {
      EigenPair p;
      p.family = "sho1";
      p.bc = Bc::None;
      p.index = {n, 0};
      p.lambda = (2.0 * n + 1.0) * h;
      p.norm_const = std::pow(h, -0.25);
      const double c = p.norm_const;
      p.eval = [c, n, sqrt_h](Vec2 q) {
        return c * fn::hermite_function(n, q.x / sqrt_h);
      };
      modes.push_back(std::move(p));
    }
    return modes;
  }
  for (int shell = 0; static_cast<int>(modes.size()) < count; ++shell) {
    for (int a1 = 0; a1 <= shell; ++a1) {
      if (static_cast<int>(modes.size()) == count) break;
      const int a2 = shell - a1;
      EigenPair p;
      p.family = "sho2";
      p.bc = Bc::None;
      p.index = {a1, a2};
      p.lambda = (2.0 * shell + 2.0) * h;
      p.norm_const = std::pow(h, -0.5);
      const double c = p.norm_const;
      p.eval = [c, a1, a2, sqrt_h](Vec2 q) {
        return c * fn::hermite_function(a1, q.x / sqrt_h) *
               fn::hermite_function(a2, q.y / sqrt_h);
      };
      modes.push_back(std::move(p));
    }
  }
  return modes;
}

std::string mode_table_csv(const std::vector<EigenPair>& modes) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "family,j,k,component,lambda,multiplicity\n";
  for (const auto& p : modes) {
    int mult = 0;
    for (const auto& q : modes)
      if (q.family == p.family &&
          std::abs(q.lambda - p.lambda) <= 1e-12 * (1.0 + p.lambda))
        ++mult;
    os << p.family << ',' << p.index[0] << ',' << p.index[1] << ','
       << p.component << ',' << p.lambda << ',' << mult << '\n';
  }
  return os.str();
}

}  // namespace qchaos::spec
