#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "polariton/dressing.hpp"
#include "polariton/units.hpp"

using namespace polariton;
using namespace polariton::units;

namespace {

Grid default_grid() {
  return Grid(GridSpec{angstrom_to_au(1.0), angstrom_to_au(12.0), 512, 3650.0, false});
}

Field dense_points(double a_ang, double b_ang, int n) {
  Field q(n);
  for (int i = 0; i < n; ++i) q[i] = angstrom_to_au(a_ang + (b_ang - a_ang) * i / (n - 1.0));
  return q;
}

}  // namespace

TEST(Cavity, CatalystResonance) {
  const Grid grid = default_grid();
  const BareSystem sys = models::photonic_catalyst();
  const CavityParams c = cavity_from_resonance(sys, grid, angstrom_to_au(2.3), ev_to_au(0.054));
  EXPECT_NEAR(au_to_ev(c.omega_c), 1.496, 1e-3);
  double mu_max = 0.0;
  for (int j = 0; j < grid.size(); ++j) mu_max = std::max(mu_max, sys.mu_eg(grid.points()[j]));
  EXPECT_NEAR(c.eps_c, 2.0 * ev_to_au(0.054) / mu_max, 1e-15);
  EXPECT_NEAR(c.eps_c, 2.0 * ev_to_au(0.054) / 4.0, 2e-3 * c.eps_c);
}

TEST(Cavity, ConstantDipole) {
  BareSystem sys = models::photonic_catalyst();
  sys.mu_eg = Curve::constant(2.5);
  const CavityParams c =
      cavity_from_resonance(sys, default_grid(), angstrom_to_au(2.3), ev_to_au(0.054));
  EXPECT_NEAR(c.eps_c, 2.0 * ev_to_au(0.054) / 2.5, 1e-15);
}

TEST(Cavity, BoundModelNearTwoEv) {
  const CavityParams c = cavity_from_resonance(models::photonic_bound(), default_grid(),
                                               angstrom_to_au(2.9), ev_to_au(0.054));
  EXPECT_NEAR(au_to_ev(c.omega_c), 1.947, 2e-3);
}

TEST(Cavity, Errors) {
  BareSystem sys = models::photonic_catalyst();
  EXPECT_THROW(cavity_from_resonance(sys, default_grid(), angstrom_to_au(30.0), 0.001),
               std::invalid_argument);
  sys.mu_eg = Curve();
  EXPECT_THROW(cavity_from_resonance(sys, default_grid(), angstrom_to_au(2.3), 0.001),
               std::invalid_argument);
  EXPECT_THROW((CavityParams{0.0, 0.1, 0}.validate()), std::invalid_argument);
  EXPECT_THROW((CavityParams{0.1, 0.1, 1}.validate()), std::invalid_argument);
}

TEST(Dressed, ZeroDetuningPoint) {
  const BareSystem sys = models::photonic_catalyst();
  const double q0 = angstrom_to_au(2.3);
  const CavityParams c = cavity_from_resonance(sys, default_grid(), q0, ev_to_au(0.054));
  Field pts(1);
  pts << q0;
  const DressedSurfaces ds = dressed_fields(sys, c, pts);
  const double mean = 0.5 * (sys.Ve(q0) + sys.Vg(q0));
  EXPECT_NEAR(ds.delta_c[0], 0.0, 1e-15);
  EXPECT_NEAR(ds.V_plus[0], mean + ds.g[0], 1e-14);
  EXPECT_NEAR(ds.V_minus[0], mean - ds.g[0], 1e-14);
  EXPECT_NEAR(ds.cos_theta[0], std::sqrt(0.5), 1e-14);
  EXPECT_NEAR(std::abs(ds.sin_theta[0]), std::sqrt(0.5), 1e-14);
}

TEST(Dressed, DecoupledLimit) {
  const BareSystem sys = models::photonic_catalyst();
  CavityParams c{ev_to_au(1.45), 0.0, 0};
  BareSystem perm = sys;
  perm.mu_gg = Curve::constant(0.7);
  const DressedSurfaces ds = dressed_fields(perm, c, default_grid());
  for (int j = 0; j < ds.size(); ++j) {
    EXPECT_NEAR(ds.V_plus[j] - ds.V_minus[j], std::abs(ds.delta_c[j]), 1e-14);
    EXPECT_NEAR(ds.mu_minus_plus[j], 0.0, 1e-14);
  }
}

TEST(Dressed, Invariants) {
  for (const BareSystem& sys : {models::photonic_catalyst(), models::photonic_bound()}) {
    const Grid grid = default_grid();
    const CavityParams c = cavity_from_resonance(sys, grid, angstrom_to_au(2.5), ev_to_au(0.2));
    const DressedSurfaces ds = dressed_fields(sys, c, grid);
    for (int j = 0; j < ds.size(); ++j) {
      const double cs = ds.cos_theta[j], sn = ds.sin_theta[j];
      EXPECT_NEAR(cs * cs + sn * sn, 1.0, 1e-12);
      EXPECT_NEAR(ds.V_plus[j] - ds.V_minus[j], ds.Omega[j], 1e-13);
      EXPECT_GE(ds.Omega[j], 2.0 * std::abs(ds.g[j]) * (1 - 1e-15));
      const double om2 = 4 * ds.g[j] * ds.g[j] + ds.delta_c[j] * ds.delta_c[j];
      EXPECT_NEAR(ds.Omega[j] * ds.Omega[j] / om2, 1.0, 1e-12);
      const double sum = ds.mu_g_plus[j] * ds.mu_g_plus[j] + ds.mu_g_minus[j] * ds.mu_g_minus[j];
      EXPECT_NEAR(sum, ds.mu_eg[j] * ds.mu_eg[j], 1e-12 * ds.mu_eg[j] * ds.mu_eg[j]);
      EXPECT_EQ(ds.mu_minus_plus[j], 0.0);
      EXPECT_EQ(ds.V_g0[j], sys.Vg(grid.points()[j]));
    }
    EXPECT_DOUBLE_EQ(ds.offset_g0, 0.5 * c.omega_c);
    EXPECT_DOUBLE_EQ(ds.offset_pm, c.omega_c);
  }
}

// Eigenvalues of the explicit 2x2 one-excitation matrix against the analytic surfaces, and the
// channel convention |+> = (cos, sin) as the upper eigenvector.
TEST(Dressed, MatchesJcMatrixDiagonalisation) {
  for (const BareSystem& sys : {models::photonic_catalyst(), models::photonic_bound()}) {
    const Grid grid = default_grid();
    const CavityParams c = cavity_from_resonance(sys, grid, angstrom_to_au(2.6), ev_to_au(0.054));
    const DressedSurfaces ds = dressed_fields(sys, c, grid);
    for (int j = 0; j < ds.size(); ++j) {
      const Eigen::Matrix2d h = jc_matrix(sys, c, grid.points()[j]);
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(h);
      const double lo = es.eigenvalues()[0], hi = es.eigenvalues()[1];
      const double mean = 0.5 * (lo + hi);
      const double scale = std::max(1.0, std::abs(hi));
      EXPECT_NEAR(hi - lo, ds.V_plus[j] - ds.V_minus[j], 1e-12 * scale);
      EXPECT_NEAR(hi - mean, 0.5 * ds.Omega[j], 1e-12 * scale);
      EXPECT_NEAR(hi, ds.V_plus[j] + c.omega_c, 1e-12 * scale);
      const Eigen::Vector2d plus(ds.cos_theta[j], ds.sin_theta[j]);
      EXPECT_NEAR((h * plus - hi * plus).norm(), 0.0, 1e-12 * scale);
    }
  }
}

TEST(Dressed, JcMatrixDecoupled) {
  const BareSystem sys = models::photonic_bound();
  const CavityParams c{ev_to_au(2.0), 0.0, 0};
  const double q = angstrom_to_au(3.1);
  const Eigen::Matrix2d h = jc_matrix(sys, c, q);
  EXPECT_EQ(h(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(h(0, 0), sys.Ve(q) + 0.5 * c.omega_c);
  EXPECT_DOUBLE_EQ(h(1, 1), sys.Vg(q) + 1.5 * c.omega_c);
}

TEST(Dressed, CatalystMinimalGapIsTwoG) {
  const BareSystem sys = models::photonic_catalyst();
  const double qres = angstrom_to_au(2.3);
  const CavityParams c = cavity_from_resonance(sys, default_grid(), qres, ev_to_au(0.054));
  const DressedSurfaces ds = dressed_fields(sys, c, dense_points(1.5, 4.0, 25001));
  Eigen::Index k = 0;
  const double gap = ds.Omega.minCoeff(&k);
  const double g_res = 0.5 * c.eps_c * sys.mu_eg(qres);
  EXPECT_NEAR(gap / (2.0 * g_res), 1.0, 1e-3);
  EXPECT_NEAR(au_to_angstrom(ds.q[k]), 2.3, 0.05);
}

TEST(Dressed, DegeneracyOnlyWhereCouplingAndDetuningVanish) {
  const auto model = TwoModeCoInModel::defaults();
  const BareSystem cut = model.cut_q1(0.0);
  const CavityParams c{model.Ve(0, 0) - model.Vg(0, 0), 0.01, 0};
  Field pts(5);
  pts << -0.5, -1e-3, 0.0, 1e-3, 0.5;
  const DressedSurfaces ds = dressed_fields(cut, c, pts);
  ASSERT_EQ(ds.degenerate_points.size(), 1u);
  EXPECT_EQ(ds.degenerate_points[0], 2);
  EXPECT_EQ(ds.Omega[2], 0.0);
  for (int j : {0, 1, 3, 4}) EXPECT_GT(ds.Omega[j], 0.0);
}

TEST(Dressed, BareFields) {
  const BareSystem sys = models::photonic_catalyst();
  const DressedSurfaces b = bare_fields(sys, default_grid());
  for (int j = 0; j < b.size(); j += 17) {
    EXPECT_EQ(b.V_plus[j], sys.Ve(b.q[j]));
    EXPECT_EQ(b.mu_g_plus[j], sys.mu_eg(b.q[j]));
    EXPECT_EQ(b.mu_g_minus[j], 0.0);
  }
  EXPECT_EQ(b.offset_g0, 0.0);
  EXPECT_EQ(b.offset_pm, 0.0);
}
