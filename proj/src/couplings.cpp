#include "polariton/couplings.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace polariton {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void flag(std::vector<int>* singular, int j) {
  if (singular) singular->push_back(j);
}

}  // namespace

CouplingGradients coupling_gradients(const DressedSurfaces& ds, const Grid& grid) {
  return {gradient(grid, ds.delta_c), gradient(grid, ds.g)};
}

Field derivative_coupling_pm(const DressedSurfaces& ds, const CouplingGradients& grad,
                             std::vector<int>* singular) {
  const int n = ds.size();
  Field f(n);
  for (int j = 0; j < n; ++j) {
    const double g = ds.g[j];
    const double d = ds.delta_c[j];
    const double om2 = 4.0 * g * g + d * d;
    if (om2 == 0.0) {
      f[j] = kNaN;
      flag(singular, j);
      continue;
    }
    // dG/(4g) (1 - d^2/om2) == dG g / om2, which stays finite when g -> 0 at finite detuning.
    f[j] = grad.dG[j] * g / om2 - d / om2 * grad.dg_dq[j];
  }
  return f;
}

std::pair<Field, Field> ground_couplings(const Field& f_ge, const DressedSurfaces& ds) {
  return {f_ge.cwiseProduct(ds.cos_theta), -f_ge.cwiseProduct(ds.sin_theta)};
}

Field lambda_field(const DressedSurfaces& ds, const CouplingGradients& grad,
                   std::vector<int>* singular) {
  const int n = ds.size();
  Field L(n);
  for (int j = 0; j < n; ++j) {
    const double om = ds.Omega[j];
    if (om == 0.0) {
      L[j] = kNaN;
      flag(singular, j);
      continue;
    }
    const double d = ds.delta_c[j];
    L[j] = d / (om * om * om) * (4.0 * ds.g[j] * grad.dg_dq[j] + d * grad.dG[j]) - grad.dG[j] / om;
  }
  return L;
}

ScalarF scalar_F_fields(const DressedSurfaces& ds, const CouplingGradients& grad,
                        const Field& lambda, const Field& f_ge,
                        const std::optional<BareScalarCouplings>& bare,
                        std::vector<int>* singular) {
  const int n = ds.size();
  ScalarF F{Field(n), Field(n), Field(n), Field(n), Field(n)};
  for (int j = 0; j < n; ++j) {
    const double c = ds.cos_theta[j];
    const double s = ds.sin_theta[j];
    const double g = ds.g[j];
    const double d = ds.delta_c[j];
    const double L = lambda[j];
    const double Fgg = bare ? bare->F_gg[j] : 0.0;
    const double Fee = bare ? bare->F_ee[j] : 0.0;
    const double Fge = bare ? bare->F_ge[j] : 0.0;
    const double fge = f_ge[j];

    bool bad = !std::isfinite(L);
    double cavity_part = kNaN;
    if (!bad) {
      if (g != 0.0) {
        cavity_part = L * L / 4.0 + d * d * L * L / (16.0 * g * g);
      } else if (d != 0.0) {
        // g -> 0 limit at finite detuning, where Lambda ~ g and the second term is 0/0.
        const double r = grad.dg_dq[j] / d;
        cavity_part = r * r;
      } else {
        bad = true;
      }
    }
    F.F_pp[j] = Fgg * s * s + Fee * c * c + cavity_part;
    F.F_mm[j] = Fgg * c * c + Fee * s * s + cavity_part;
    F.F_mp[j] = s * c * (Fgg - Fee);

    double gp = Fge * c;
    double gm = -Fge * s;
    if (fge != 0.0) {
      if (c == 0.0 || !std::isfinite(L)) {
        gp = kNaN;
        bad = true;
      } else {
        gp += L * fge / (4.0 * c);
      }
      if (s == 0.0 || !std::isfinite(L)) {
        gm = kNaN;
        bad = true;
      } else {
        gm += L * fge / (4.0 * s);
      }
    }
    F.F_gp[j] = gp;
    F.F_gm[j] = gm;
    if (bad) flag(singular, j);
  }
  return F;
}

// ---------------------------------------------------------------------------

CouplingFields::CouplingFields(int n) {
  for (auto& x : f_) x = Field::Zero(n);
  for (auto& x : F_) x = Field::Zero(n);
  for (auto& x : h_) x = Field::Zero(n);
  Lambda = Field::Zero(n);
  gradients = {Field::Zero(n), Field::Zero(n)};
}

Field CouplingFields::f(int k, int l) const {
  if (k == l) return Field::Zero(f_[0].size());
  return k < l ? f_[index(k, l)] : Field(-f_[index(k, l)]);
}

void CouplingFields::set_f(int k, int l, Field value) {
  if (k == l) return;  // diagonal derivative couplings vanish identically
  if (k > l) value = -value;
  f_[index(k, l)] = std::move(value);
}

void CouplingFields::set_F(int k, int l, Field value) { F_[index(k, l)] = std::move(value); }

bool CouplingFields::couples(int k, int l, bool with_F) const {
  const auto nonzero = [](const Field& x) { return x.size() > 0 && x.cwiseAbs().maxCoeff() > 0.0; };
  if (k != l && nonzero(f_[index(k, l)])) return true;
  return with_F && nonzero(F_[index(k, l)]);
}

void scalar_couplings_h(CouplingFields& fields, const Grid& grid) {
  for (int k = 0; k < kNumChannels; ++k) {
    for (int l = 0; l < kNumChannels; ++l) {
      fields.set_h(k, l, gradient(grid, fields.f(k, l)) - fields.F(k, l));
    }
  }
}

CouplingFields compute_couplings(const DressedSurfaces& ds, const Grid& grid,
                                 const std::optional<BareScalarCouplings>& bare) {
  CouplingFields out(ds.size());
  out.gradients = coupling_gradients(ds, grid);
  std::vector<int> singular;
  out.set_f(kMinus, kPlus, derivative_coupling_pm(ds, out.gradients, &singular));
  auto [f_gp, f_gm] = ground_couplings(ds.f_ge, ds);
  out.set_f(kGround, kPlus, std::move(f_gp));
  out.set_f(kGround, kMinus, std::move(f_gm));
  out.Lambda = lambda_field(ds, out.gradients, &singular);
  ScalarF F = scalar_F_fields(ds, out.gradients, out.Lambda, ds.f_ge, bare, &singular);
  out.set_F(kPlus, kPlus, std::move(F.F_pp));
  out.set_F(kMinus, kMinus, std::move(F.F_mm));
  out.set_F(kMinus, kPlus, std::move(F.F_mp));
  out.set_F(kGround, kPlus, std::move(F.F_gp));
  out.set_F(kGround, kMinus, std::move(F.F_gm));
  if (bare) out.set_F(kGround, kGround, bare->F_gg);
  std::sort(singular.begin(), singular.end());
  singular.erase(std::unique(singular.begin(), singular.end()), singular.end());
  out.singular_points = std::move(singular);
  scalar_couplings_h(out, grid);
  return out;
}

CouplingFields zero_couplings(int n) { return CouplingFields(n); }

}  // namespace polariton
