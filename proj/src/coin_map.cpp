#include "polariton/coin_map.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unsupported/Eigen/LevenbergMarquardt>
#include <unsupported/Eigen/NumericalDiff>

namespace polariton {

namespace {

std::vector<double> cell_centres(double lo, double hi, int n) {
  std::vector<double> x(n);
  const double h = (hi - lo) / n;
  for (int i = 0; i < n; ++i) x[i] = lo + (i + 0.5) * h;
  return x;
}

// Lagrange basis on four nodes.
std::array<double, 4> basis4(const double* x, double t) {
  std::array<double, 4> L{};
  for (int i = 0; i < 4; ++i) {
    double v = 1.0;
    for (int j = 0; j < 4; ++j) {
      if (j != i) v *= (t - x[j]) / (x[i] - x[j]);
    }
    L[i] = v;
  }
  return L;
}

int patch_start(const Eigen::MatrixXd& gap, int i, int j, bool rows, int n) {
  const int k = rows ? i : j;
  auto at = [&](int m) { return rows ? gap(m, j) : gap(i, m); };
  int start = k - 1;
  if (k > 0 && k + 1 < n && at(k - 1) < at(k + 1)) start = k - 2;
  return std::clamp(start, 0, n - 4);
}

struct PatchResidual : Eigen::DenseFunctor<double> {
  const double* x1;
  const double* x2;
  Eigen::Matrix4d d, g;

  PatchResidual() : DenseFunctor<double>(2, 2) {}

  int operator()(const InputType& p, ValueType& r) const {
    const auto L1 = basis4(x1, p[0]);
    const auto L2 = basis4(x2, p[1]);
    double dv = 0.0, gv = 0.0;
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        dv += L1[a] * L2[b] * d(a, b);
        gv += L1[a] * L2[b] * g(a, b);
      }
    }
    r[0] = dv;
    r[1] = 2.0 * gv;
    return 0;
  }
};

}  // namespace

CavityParams coin_cavity(const TwoModeCoInModel& model, const GapMapSpec& spec, double g_max) {
  if (!(g_max > 0.0)) throw std::invalid_argument("cavity: g_max must be positive");
  const auto q1 = cell_centres(spec.q1_min, spec.q1_max, spec.n1);
  const auto q2 = cell_centres(spec.q2_min, spec.q2_max, spec.n2);
  double mu_max = 0.0;
  for (double a : q1) {
    for (double b : q2) mu_max = std::max(mu_max, std::abs(model.mu(a, b)));
  }
  if (mu_max == 0.0) throw std::invalid_argument("cavity: dipole vanishes on the whole map");
  CavityParams c;
  c.omega_c = model.Ve(0.0, 0.0) - model.Vg(0.0, 0.0);
  c.eps_c = 2.0 * g_max / mu_max;
  c.validate();
  return c;
}

GapMap coin_gap_map(const TwoModeCoInModel& model, const CavityParams& cavity,
                    const GapMapSpec& spec) {
  if (spec.n1 < 1 || spec.n2 < 1 || !(spec.q1_max > spec.q1_min) ||
      !(spec.q2_max > spec.q2_min)) {
    throw std::invalid_argument("gap map: empty range");
  }
  GapMap m;
  m.q1 = cell_centres(spec.q1_min, spec.q1_max, spec.n1);
  m.q2 = cell_centres(spec.q2_min, spec.q2_max, spec.n2);
  m.delta_c.resize(spec.n1, spec.n2);
  m.g.resize(spec.n1, spec.n2);
  m.gap.resize(spec.n1, spec.n2);
  for (int i = 0; i < spec.n1; ++i) {
    for (int j = 0; j < spec.n2; ++j) {
      const double a = m.q1[i], b = m.q2[j];
      const DressedPoint p = dress_point(model.Vg(a, b), model.Ve(a, b), model.mu(a, b), cavity);
      m.delta_c(i, j) = p.delta_c;
      m.g(i, j) = p.g;
      m.gap(i, j) = p.Omega;
    }
  }
  return m;
}

GapMinimum interpolated_gap_minimum(const GapMap& map) {
  const int n1 = static_cast<int>(map.q1.size());
  const int n2 = static_cast<int>(map.q2.size());
  if (n1 < 4 || n2 < 4) throw std::invalid_argument("gap map: need at least 4 points per axis");
  Eigen::Index bi = 0, bj = 0;
  GapMinimum out;
  out.gap_sampled = map.gap.minCoeff(&bi, &bj);
  const int i0 = patch_start(map.gap, static_cast<int>(bi), static_cast<int>(bj), true, n1);
  const int j0 = patch_start(map.gap, static_cast<int>(bi), static_cast<int>(bj), false, n2);

  PatchResidual f;
  f.x1 = &map.q1[i0];
  f.x2 = &map.q2[j0];
  f.d = map.delta_c.block<4, 4>(i0, j0);
  f.g = map.g.block<4, 4>(i0, j0);
  Eigen::NumericalDiff<PatchResidual> nd(f);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<PatchResidual>> lm(nd);
  lm.setXtol(1e-14);
  lm.setFtol(1e-20);
  Eigen::VectorXd p(2);
  p << map.q1[bi], map.q2[bj];
  lm.minimize(p);
  p[0] = std::clamp(p[0], map.q1[i0], map.q1[i0 + 3]);
  p[1] = std::clamp(p[1], map.q2[j0], map.q2[j0 + 3]);
  Eigen::VectorXd r(2);
  f(p, r);
  out.q1 = p[0];
  out.q2 = p[1];
  out.gap_interpolated = std::min(r.norm(), out.gap_sampled);
  return out;
}

ConeCheck cone_check(const TwoModeCoInModel& model, const CavityParams& cavity,
                     const std::vector<double>& q1_values) {
  ConeCheck c;
  double lo = INFINITY, hi = 0.0;
  for (double q : q1_values) {
    if (q == 0.0) throw std::invalid_argument("cone check: q1 must be nonzero");
    const DressedPoint p = dress_point(model.Vg(q, 0.0), model.Ve(q, 0.0), model.mu(q, 0.0), cavity);
    const double ratio = p.Omega / std::abs(q);
    c.q1.push_back(q);
    c.ratio.push_back(ratio);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  c.spread = hi > 0.0 ? (hi - lo) / hi : 0.0;
  return c;
}

}  // namespace polariton
