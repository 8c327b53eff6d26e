#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "polariton/couplings.hpp"
#include "polariton/units.hpp"

using namespace polariton;
using namespace polariton::units;

namespace {

Grid default_grid() {
  return Grid(GridSpec{angstrom_to_au(1.0), angstrom_to_au(12.0), 512, 3650.0, false});
}

// Upper/lower eigenvectors of the JC matrix with the sign fixed by the channel convention.
std::pair<Eigen::Vector2d, Eigen::Vector2d> eigvecs(const BareSystem& sys, const CavityParams& c,
                                                    double q) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(jc_matrix(sys, c, q));
  Eigen::Vector2d minus = es.eigenvectors().col(0), plus = es.eigenvectors().col(1);
  if (plus[0] < 0) plus = -plus;
  if (minus[1] < 0) minus = -minus;
  return {minus, plus};
}

struct Fixture {
  BareSystem sys;
  Grid grid = default_grid();
  CavityParams cav;
  DressedSurfaces ds;
  CouplingFields cf;
};

Fixture make(const BareSystem& sys, double q_res_ang, double g_mev) {
  Fixture s{sys};
  s.cav = cavity_from_resonance(sys, s.grid, angstrom_to_au(q_res_ang), ev_to_au(g_mev * 1e-3));
  s.ds = dressed_fields(sys, s.cav, s.grid);
  s.cf = compute_couplings(s.ds, s.grid);
  return s;
}

}  // namespace

// <d phi_- | phi_+> from finite differences of numerically diagonalised eigenvectors.
TEST(Couplings, NonadiabaticMatchesEigenvectorDerivative) {
  for (auto [sys, qres] : {std::pair{models::photonic_catalyst(), 2.3},
                           std::pair{models::photonic_bound(), 2.9}}) {
    const Fixture s = make(sys, qres, 54.0);
    const Field f = s.cf.f_mp();
    const double scale = f.cwiseAbs().maxCoeff();
    ASSERT_GT(scale, 0.0);
    const double h = 1e-5;
    for (int j = 8; j < s.grid.size() - 8; ++j) {
      const double q = s.grid.points()[j];
      const auto [m_hi, p_hi] = eigvecs(sys, s.cav, q + h);
      const auto [m_lo, p_lo] = eigvecs(sys, s.cav, q - h);
      const auto [m0, p0] = eigvecs(sys, s.cav, q);
      const double oracle = ((m_hi - m_lo) / (2 * h)).dot(p0);
      EXPECT_NEAR(f[j], oracle, 1e-6 * scale) << "q = " << q;
    }
  }
}

// The bound-model crossing is transverse, so the coupling peaks on it. The catalyst resonance sits at
// the bottom of the S1-S2 gap, where the gap slope vanishes, and its peak is displaced.
TEST(Couplings, BoundPeakSitsAtCrossing) {
  const Fixture s = make(models::photonic_bound(), 2.9, 54.0);
  Eigen::Index k = 0;
  s.cf.f_mp().cwiseAbs().maxCoeff(&k);
  EXPECT_NEAR(au_to_angstrom(s.grid.points()[k]), 2.9, 0.05);
}

TEST(Couplings, LambdaIsMinusSlopeOfCos2Theta) {
  const Fixture s = make(models::photonic_bound(), 2.9, 54.0);
  const double scale = s.cf.Lambda.cwiseAbs().maxCoeff();
  const double h = 1e-5;
  auto cos2 = [&](double q) {
    const DressedPoint p = dress_point(s.sys.Vg(q), s.sys.Ve(q), s.sys.mu_eg(q), s.cav);
    return p.delta_c / p.Omega;
  };
  for (int j = 8; j < s.grid.size() - 8; j += 3) {
    const double q = s.grid.points()[j];
    EXPECT_NEAR(s.cf.Lambda[j], -(cos2(q + h) - cos2(q - h)) / (2 * h), 1e-6 * scale);
  }
}

// Without bare second-derivative couplings the dressed F_++ and F_-- reduce to |d theta/dq|^2,
// the square of the nonadiabatic coupling.
TEST(Couplings, ScalarTermsReduceToSquaredCoupling) {
  const Fixture s = make(models::photonic_catalyst(), 2.3, 54.0);
  const Field f = s.cf.f_mp();
  const Field& Fpp = s.cf.F(kPlus, kPlus);
  const double scale = f.cwiseAbs2().maxCoeff();
  for (int j = 0; j < s.grid.size(); ++j) {
    EXPECT_NEAR(Fpp[j], f[j] * f[j], 1e-10 * scale);
    EXPECT_EQ(s.cf.F(kMinus, kMinus)[j], Fpp[j]);
    EXPECT_EQ(s.cf.F(kMinus, kPlus)[j], 0.0);
  }
  EXPECT_TRUE(s.cf.singular_points.empty());
}

TEST(Couplings, HIsGradientMinusF) {
  const Fixture s = make(models::photonic_catalyst(), 2.3, 54.0);
  const Field expect = gradient(s.grid, s.cf.f(kMinus, kPlus)) - s.cf.F(kMinus, kPlus);
  EXPECT_LT((s.cf.h(kMinus, kPlus) - expect).cwiseAbs().maxCoeff(), 1e-14);
  const Field diag = gradient(s.grid, s.cf.f(kPlus, kPlus)) - s.cf.F(kPlus, kPlus);
  EXPECT_LT((s.cf.h(kPlus, kPlus) - diag).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Couplings, Antisymmetry) {
  const Fixture s = make(models::photonic_catalyst(), 2.3, 54.0);
  EXPECT_EQ((s.cf.f(kMinus, kPlus) + s.cf.f(kPlus, kMinus)).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(s.cf.f(kPlus, kPlus).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(&s.cf.F(kPlus, kMinus), &s.cf.F(kMinus, kPlus));
}

TEST(Couplings, GroundChannelFromBareCoupling) {
  BareSystem sys = models::photonic_catalyst();
  sys.f_ge = Curve::constant(0.05);
  const Fixture s = make(sys, 2.3, 54.0);
  for (int j = 0; j < s.grid.size(); j += 7) {
    EXPECT_DOUBLE_EQ(s.cf.f_gp()[j], 0.05 * s.ds.cos_theta[j]);
    EXPECT_DOUBLE_EQ(s.cf.f_gm()[j], -0.05 * s.ds.sin_theta[j]);
  }
  EXPECT_TRUE(s.cf.couples(kGround, kPlus, false));
  const Fixture plain = make(models::photonic_catalyst(), 2.3, 54.0);
  EXPECT_FALSE(plain.cf.couples(kGround, kPlus, true));
  EXPECT_TRUE(plain.cf.couples(kMinus, kPlus, false));
}

TEST(Couplings, UncoupledLimitVanishes) {
  const BareSystem sys = models::photonic_catalyst();
  const Grid grid = default_grid();
  const CavityParams c{ev_to_au(1.45), 0.0, 0};
  const DressedSurfaces ds = dressed_fields(sys, c, grid);
  const CouplingFields cf = compute_couplings(ds, grid);
  // delta_c never crosses zero for this omega_c on the grid, so nothing is singular.
  EXPECT_TRUE(cf.singular_points.empty());
  EXPECT_EQ(cf.f_mp().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(cf.F(kPlus, kPlus).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Couplings, DegeneracyFlagged) {
  const auto model = TwoModeCoInModel::defaults();
  const BareSystem cut = model.cut_q1(0.0);
  const CavityParams c{model.Ve(0, 0) - model.Vg(0, 0), 0.01, 0};
  const Grid grid(GridSpec{-1.0, 1.0, 64, 1.0, false});  // q = 0 is a grid point
  const DressedSurfaces ds = dressed_fields(cut, c, grid);
  const CouplingFields cf = compute_couplings(ds, grid);
  ASSERT_FALSE(cf.singular_points.empty());
  EXPECT_EQ(cf.singular_points.front(), 32);
  EXPECT_TRUE(std::isnan(cf.f_mp()[32]));
  const Grid stag(GridSpec{-1.0, 1.0, 64, 1.0, true});
  EXPECT_TRUE(compute_couplings(dressed_fields(cut, c, stag), stag).singular_points.empty());
}

TEST(Couplings, ZeroCouplings) {
  const CouplingFields z = zero_couplings(16);
  for (int k = 0; k < kNumChannels; ++k)
    for (int l = 0; l < kNumChannels; ++l) EXPECT_FALSE(z.couples(k, l, true));
}
