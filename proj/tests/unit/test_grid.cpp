#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "polariton/grid.hpp"

using namespace polariton;

namespace {

constexpr double kPi = std::numbers::pi;

CField gaussian(const Grid& g, double q0, double s, double k0) {
  CField psi(g.size());
  for (int j = 0; j < g.size(); ++j) {
    const double x = g.points()[j] - q0;
    psi[j] = std::exp(-x * x / (4 * s * s)) * std::polar(1.0, k0 * x);
  }
  return psi;
}

}  // namespace

TEST(Grid, PointsAndWavenumbers) {
  const Grid g(GridSpec{-2.0, 6.0, 64, 2.0, false});
  EXPECT_DOUBLE_EQ(g.spacing(), 0.125);
  EXPECT_DOUBLE_EQ(g.points()[0], -2.0);
  EXPECT_DOUBLE_EQ(g.points()[63], 6.0 - 0.125);
  const Grid s(GridSpec{-2.0, 6.0, 64, 2.0, true});
  EXPECT_DOUBLE_EQ(s.points()[0], -2.0 + 0.0625);
  const double dk = 2 * kPi / 8.0;
  EXPECT_DOUBLE_EQ(g.wavenumbers()[1], dk);
  EXPECT_DOUBLE_EQ(g.wavenumbers()[32], 32 * dk);
  EXPECT_DOUBLE_EQ(g.wavenumbers()[33], -31 * dk);
}

TEST(Grid, RejectsBadSpecs) {
  EXPECT_THROW(Grid(GridSpec{0, 1, 32, 1, false}), std::invalid_argument);
  EXPECT_THROW(Grid(GridSpec{1, 1, 64, 1, false}), std::invalid_argument);
  EXPECT_THROW(Grid(GridSpec{0, 1, 64, 0, false}), std::invalid_argument);
}

TEST(Grid, KineticPlaneWave) {
  const Grid g(GridSpec{0.0, 10.0, 128, 3.0, false});
  const double k = 2 * kPi * 7 / 10.0;
  CField psi(g.size());
  for (int j = 0; j < g.size(); ++j) psi[j] = std::polar(1.0, k * g.points()[j]);
  const CField t = apply_kinetic(g, psi);
  EXPECT_LT((t - (k * k / 6.0) * psi).cwiseAbs().maxCoeff(), 1e-12);
  const CField d = spectral_gradient(g, psi);
  EXPECT_LT((d - cplx(0, k) * psi).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Grid, KineticGaussianAnalytic) {
  const Grid g(GridSpec{-20.0, 20.0, 256, 1.5, false});
  const double s = 1.1;
  const CField psi = gaussian(g, 0.3, s, 0.0);
  const CField t = apply_kinetic(g, psi);
  for (int j = 0; j < g.size(); ++j) {
    const double x = g.points()[j] - 0.3;
    const double d2 = (x * x / (4 * s * s * s * s) - 1 / (2 * s * s)) * psi[j].real();
    EXPECT_NEAR(t[j].real(), -d2 / 3.0, 1e-12);
  }
}

TEST(Grid, KineticHermitianAndPositive) {
  const Grid g(GridSpec{0.0, 5.0, 64, 2.0, true});
  Eigen::MatrixXcd T(64, 64);
  for (int c = 0; c < 64; ++c) T.col(c) = apply_kinetic(g, CField::Unit(64, c));
  EXPECT_LT((T - T.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(T);
  EXPECT_GT(es.eigenvalues().minCoeff(), -1e-12);
  Eigen::MatrixXcd D(64, 64);
  for (int c = 0; c < 64; ++c) D.col(c) = spectral_gradient(g, CField::Unit(64, c));
  EXPECT_LT((D + D.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Grid, FornbergWeights) {
  Eigen::VectorXd nodes(3);
  nodes << -1, 0, 1;
  const Eigen::VectorXd w1 = fd_weights(0.0, nodes, 1);
  EXPECT_NEAR(w1[0], -0.5, 1e-15);
  EXPECT_NEAR(w1[1], 0.0, 1e-15);
  EXPECT_NEAR(w1[2], 0.5, 1e-15);
  const Eigen::VectorXd w2 = fd_weights(0.0, nodes, 2);
  EXPECT_NEAR(w2[0], 1.0, 1e-15);
  EXPECT_NEAR(w2[1], -2.0, 1e-15);
  Eigen::VectorXd one(3);
  one << 0, 1, 2;
  const Eigen::VectorXd w = fd_weights(0.0, one, 1);
  EXPECT_NEAR(w[0], -1.5, 1e-15);
  EXPECT_NEAR(w[1], 2.0, 1e-15);
  EXPECT_NEAR(w[2], -0.5, 1e-15);
}

TEST(Grid, GradientExactForPolynomials) {
  const Grid g(GridSpec{-1.0, 3.0, 64, 1.0, false});
  const Field f = g.sample([](double x) { return 1 + x - 2 * x * x * x + 0.5 * std::pow(x, 8); });
  const Field d = gradient(g, f);
  for (int j = 0; j < g.size(); ++j) {
    const double x = g.points()[j];
    EXPECT_NEAR(d[j], 1 - 6 * x * x + 4 * std::pow(x, 7), 1e-8 * (1 + std::abs(d[j])));
  }
}

TEST(Grid, GradientOrderOfAccuracy) {
  auto err = [](int n) {
    const Grid g(GridSpec{0.0, 4.0, n, 1.0, false});
    const Field d = gradient(g, g.sample([](double x) { return std::sin(2 * x) + std::exp(-x); }));
    double e = 0.0;
    for (int j = 0; j < n; ++j) {
      const double x = g.points()[j];
      e = std::max(e, std::abs(d[j] - (2 * std::cos(2 * x) - std::exp(-x))));
    }
    return e;
  };
  const double e1 = err(64), e2 = err(128);
  EXPECT_LT(e1, 1e-7);
  EXPECT_GT(std::log2(e1 / e2), 7.0);
}

TEST(Pml, InteriorIsUntouched) {
  const Grid g(GridSpec{0.0, 40.0, 256, 10.0, false});
  const SpectralOperators plain(g);
  const SpectralOperators pml(g, PMLParams{5.0, 3.0, 3, true, true});
  EXPECT_TRUE(pml.absorbing());
  const CField psi = gaussian(g, 20.0, 1.5, 2.0);
  const CField a = plain.kinetic(psi), b = pml.kinetic(psi);
  int interior = 0;
  for (int j = 0; j < g.size(); ++j) {
    if (!pml.in_interior(j)) continue;
    ++interior;
    EXPECT_EQ(a[j], b[j]);
  }
  EXPECT_EQ(interior, 256 - 2 * 32 + 1);
  EXPECT_EQ(pml.sigma()[0], 3.0);
  EXPECT_EQ(pml.sigma()[128], 0.0);
}

TEST(Pml, OnlyRequestedEdges) {
  const Grid g(GridSpec{0.0, 40.0, 256, 10.0, false});
  const SpectralOperators right(g, PMLParams{5.0, 1.0, 2, false, true});
  EXPECT_EQ(right.sigma()[0], 0.0);
  EXPECT_GT(right.sigma()[255], 0.0);
  const SpectralOperators none(g, PMLParams{5.0, 1.0, 2, false, false});
  EXPECT_FALSE(none.absorbing());
}

TEST(Pml, RejectsBadParameters) {
  const Grid g(GridSpec{0.0, 40.0, 256, 10.0, false});
  EXPECT_THROW(make_pml(g, PMLParams{10.0, 1.0, 3}), std::invalid_argument);
  EXPECT_THROW(make_pml(g, PMLParams{0.0, 1.0, 3}), std::invalid_argument);
  EXPECT_THROW(make_pml(g, PMLParams{5.0, 0.0, 3}), std::invalid_argument);
  EXPECT_THROW(make_pml(g, PMLParams{5.0, 1.0, 1}), std::invalid_argument);
}
