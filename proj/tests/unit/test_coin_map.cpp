#include <gtest/gtest.h>

#include <cmath>

#include "polariton/coin_map.hpp"
#include "polariton/units.hpp"

using namespace polariton;
using namespace polariton::units;

namespace {

const TwoModeCoInModel kModel = TwoModeCoInModel::defaults();

CavityParams cavity(double g_mev = 434.0) {
  return coin_cavity(kModel, GapMapSpec{}, ev_to_au(g_mev * 1e-3));
}

}  // namespace

TEST(CoinCavity, ResonantAtOriginWithEdgeCoupling) {
  const CavityParams c = cavity();
  EXPECT_DOUBLE_EQ(c.omega_c, kModel.Ve(0, 0) - kModel.Vg(0, 0));
  // Largest |mu| on the cell-centred 60 x 60 map sits in the corner cell.
  const double edge = 1.5 - 1.5 / 60.0;
  const double mu_max = kModel.c1 * edge + kModel.c2 * edge;
  EXPECT_NEAR(c.eps_c, 2.0 * ev_to_au(0.434) / mu_max, 1e-14);
  EXPECT_THROW(coin_cavity(kModel, GapMapSpec{}, 0.0), std::invalid_argument);
}

TEST(GapMap, CellCentredAndNeverAtOrigin) {
  const GapMap m = coin_gap_map(kModel, cavity(), GapMapSpec{});
  ASSERT_EQ(m.q1.size(), 60u);
  EXPECT_DOUBLE_EQ(m.q1[0], -1.5 + 0.025);
  for (double x : m.q1) EXPECT_NE(x, 0.0);
  EXPECT_NEAR(m.q1[29], -0.025, 1e-15);
  EXPECT_NEAR(m.q1[30], 0.025, 1e-15);
  EXPECT_GT(m.gap.minCoeff(), 0.0);
}

TEST(GapMap, MatchesPointwiseFormula) {
  const CavityParams c = cavity();
  const GapMap m = coin_gap_map(kModel, c, GapMapSpec{-1.0, 1.0, -0.5, 0.5, 8, 6});
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 6; ++j) {
      const double a = m.q1[i], b = m.q2[j];
      const double d = kModel.Ve(a, b) - kModel.Vg(a, b) - c.omega_c;
      const double g = 0.5 * c.eps_c * kModel.mu(a, b);
      EXPECT_NEAR(m.gap(i, j), std::sqrt(4 * g * g + d * d), 1e-15);
      EXPECT_DOUBLE_EQ(m.delta_c(i, j), d);
    }
  }
}

TEST(GapMap, SymmetricUnderPointReflection) {
  // Point reflection (q1, q2) -> (-q1, -q2) flips the sign of mu and keeps delta.
  const GapMap m = coin_gap_map(kModel, cavity(), GapMapSpec{});
  for (int i = 0; i < 60; ++i)
    for (int j = 0; j < 60; ++j) EXPECT_NEAR(m.gap(i, j), m.gap(59 - i, 59 - j), 1e-15);
}

TEST(GapMinimum, InterpolatedMinimumVanishes) {
  const GapMap m = coin_gap_map(kModel, cavity(), GapMapSpec{});
  const GapMinimum gm = interpolated_gap_minimum(m);
  EXPECT_GT(au_to_ev(gm.gap_sampled), 1e-3);
  EXPECT_LT(au_to_ev(gm.gap_interpolated), 1e-6);
  EXPECT_LT(std::abs(gm.q1), 0.025);
  EXPECT_LT(std::abs(gm.q2), 0.025);
}

TEST(GapMinimum, NeedsFourPointsPerAxis) {
  const GapMap m = coin_gap_map(kModel, cavity(), GapMapSpec{-1, 1, -1, 1, 3, 8});
  EXPECT_THROW(interpolated_gap_minimum(m), std::invalid_argument);
  EXPECT_THROW(coin_gap_map(kModel, cavity(), GapMapSpec{1, -1, -1, 1, 8, 8}), std::invalid_argument);
}

TEST(Cone, LinearOverTwoDecades) {
  std::vector<double> q;
  for (double x = 1e-3; x <= 1.0001e-1; x *= std::pow(10.0, 0.25)) {
    q.push_back(x);
    q.push_back(-x);
  }
  const ConeCheck c = cone_check(kModel, cavity(), q);
  EXPECT_LT(c.spread, 0.05);
  // Slope of the cone: gap ~ |q1| sqrt(eps_c^2 c1^2) near the origin, since delta ~ q1^2.
  const double slope = cavity().eps_c * kModel.c1;
  EXPECT_NEAR(c.ratio.front() / slope, 1.0, 1e-3);
  EXPECT_THROW(cone_check(kModel, cavity(), {0.0}), std::invalid_argument);
}
