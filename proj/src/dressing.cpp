#include "polariton/dressing.hpp"

#include <cmath>
#include <stdexcept>

namespace polariton {

void CavityParams::validate() const {
  if (!(omega_c > 0.0)) throw std::invalid_argument("cavity: omega_c must be positive");
  if (!(eps_c >= 0.0)) throw std::invalid_argument("cavity: eps_c must be non-negative");
  if (n_c != 0) throw std::invalid_argument("cavity: only the vacuum state n_c = 0 is supported");
}

CavityParams cavity_from_resonance(const BareSystem& system, const Grid& grid, double q_res,
                                   double g_max) {
  const auto& q = grid.points();
  if (q_res < q[0] || q_res > q[q.size() - 1]) {
    throw std::invalid_argument("cavity: resonance point outside the grid");
  }
  if (!(g_max > 0.0)) throw std::invalid_argument("cavity: g_max must be positive");
  double mu_max = 0.0;
  for (int j = 0; j < grid.size(); ++j) mu_max = std::max(mu_max, std::abs(system.mu_eg(q[j])));
  if (mu_max == 0.0) {
    throw std::invalid_argument("cavity: transition dipole vanishes on the whole grid");
  }
  CavityParams c;
  c.omega_c = system.Ve(q_res) - system.Vg(q_res);
  c.eps_c = 2.0 * g_max / mu_max;
  c.validate();
  return c;
}

DressedPoint dress_point(double Vg, double Ve, double mu_eg, const CavityParams& cavity) {
  DressedPoint p;
  p.delta_c = (Ve - Vg) - cavity.omega_c;
  p.g = 0.5 * cavity.eps_c * mu_eg;
  p.Omega = std::sqrt(4.0 * p.g * p.g * (cavity.n_c + 1) + p.delta_c * p.delta_c);
  const double mean = 0.5 * (Ve + Vg);
  p.V_plus = mean + 0.5 * p.Omega;
  p.V_minus = mean - 0.5 * p.Omega;
  return p;
}

namespace {

DressedSurfaces allocate(int n) {
  DressedSurfaces ds;
  for (Field* f : {&ds.q, &ds.delta_c, &ds.g, &ds.Omega, &ds.cos_theta, &ds.sin_theta,
                   &ds.V_plus, &ds.V_minus, &ds.V_g0, &ds.mu_g_plus, &ds.mu_g_minus,
                   &ds.mu_minus_plus, &ds.mu_eg, &ds.f_ge}) {
    f->setZero(n);
  }
  return ds;
}

}  // namespace

DressedSurfaces dressed_fields(const BareSystem& system, const CavityParams& cavity,
                               const Field& points) {
  cavity.validate();
  const int n = static_cast<int>(points.size());
  DressedSurfaces ds = allocate(n);
  ds.cavity = cavity;
  ds.offset_g0 = 0.5 * cavity.omega_c;
  ds.offset_pm = cavity.omega_c;
  for (int j = 0; j < n; ++j) {
    const double q = points[j];
    const double Vg = system.Vg(q);
    const double Ve = system.Ve(q);
    const double mu = system.mu_eg(q);
    const DressedPoint p = dress_point(Vg, Ve, mu, cavity);
    ds.q[j] = q;
    ds.delta_c[j] = p.delta_c;
    ds.g[j] = p.g;
    ds.Omega[j] = p.Omega;
    ds.V_plus[j] = p.V_plus;
    ds.V_minus[j] = p.V_minus;
    ds.V_g0[j] = Vg;
    ds.mu_eg[j] = mu;
    ds.f_ge[j] = system.f_ge(q);
    double c, s;
    if (p.Omega > 0.0) {
      // Take the larger of the two from the square root and the other from c s = g / Omega;
      // (Omega + delta) cancels badly when delta is close to -Omega.
      if (p.delta_c >= 0.0) {
        c = std::sqrt((p.Omega + p.delta_c) / (2.0 * p.Omega));
        s = p.g / (p.Omega * c);
      } else {
        const double sa = std::sqrt((p.Omega - p.delta_c) / (2.0 * p.Omega));
        s = p.g < 0.0 ? -sa : sa;
        c = std::abs(p.g) / (p.Omega * sa);
      }
    } else {
      ds.degenerate_points.push_back(j);
      c = s = std::sqrt(0.5);
    }
    ds.cos_theta[j] = c;
    ds.sin_theta[j] = s;
    ds.mu_g_plus[j] = c * mu;
    ds.mu_g_minus[j] = -s * mu;
    ds.mu_minus_plus[j] = c * s * (system.mu_gg(q) - system.mu_ee(q));
  }
  return ds;
}

DressedSurfaces dressed_fields(const BareSystem& system, const CavityParams& cavity,
                               const Grid& grid) {
  return dressed_fields(system, cavity, grid.points());
}

DressedSurfaces bare_fields(const BareSystem& system, const Grid& grid) {
  const int n = grid.size();
  DressedSurfaces ds = allocate(n);
  for (int j = 0; j < n; ++j) {
    const double q = grid.points()[j];
    const double Vg = system.Vg(q);
    const double Ve = system.Ve(q);
    ds.q[j] = q;
    ds.delta_c[j] = Ve - Vg;
    ds.Omega[j] = Ve - Vg;
    ds.cos_theta[j] = 1.0;
    ds.V_plus[j] = Ve;
    ds.V_minus[j] = Vg;
    ds.V_g0[j] = Vg;
    ds.mu_eg[j] = system.mu_eg(q);
    ds.mu_g_plus[j] = ds.mu_eg[j];
    ds.f_ge[j] = system.f_ge(q);
  }
  return ds;
}

Eigen::Matrix2d jc_matrix(const BareSystem& system, const CavityParams& cavity, double q) {
  const double g = 0.5 * cavity.eps_c * system.mu_eg(q);
  Eigen::Matrix2d h;
  h << system.Ve(q) + 0.5 * cavity.omega_c, g, g, system.Vg(q) + 1.5 * cavity.omega_c;
  return h;
}

}  // namespace polariton
