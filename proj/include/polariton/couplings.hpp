#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "polariton/dressing.hpp"
#include "polariton/grid.hpp"

namespace polariton {

/// Channel order used by couplings, Hamiltonian and wave packets.
enum Channel : int { kGround = 0, kMinus = 1, kPlus = 2 };
inline constexpr int kNumChannels = 3;

/// Gradient difference dG = d(Ve - Vg)/dq and coupling gradient dg/dq on the grid.
struct CouplingGradients {
  Field dG;
  Field dg_dq;
};

CouplingGradients coupling_gradients(const DressedSurfaces& ds, const Grid& grid);

/// Bare second-derivative couplings F_gg, F_ee, F_ge; zero unless supplied.
struct BareScalarCouplings {
  Field F_gg;
  Field F_ee;
  Field F_ge;
};

struct ScalarF {
  Field F_pp, F_mm, F_mp, F_gp, F_gm;
};

// The individual coupling formulas. Points where a formula is singular get NaN and their
// index is appended to `singular` when provided.

/// f_{-,+} = dG/(4g) (1 - delta^2/(4g^2 + delta^2)) - delta/(4g^2 + delta^2) dg/dq.
/// With the channel convention of DressedSurfaces this equals <d phi_- | phi_+>.
Field derivative_coupling_pm(const DressedSurfaces& ds, const CouplingGradients& grad,
                             std::vector<int>* singular = nullptr);

/// (f_{g,+}, f_{g,-}) = (f_ge cos theta, -f_ge sin theta).
std::pair<Field, Field> ground_couplings(const Field& f_ge, const DressedSurfaces& ds);

/// Lambda = delta/Omega^3 (4 g dg/dq + delta dG) - dG/Omega.
Field lambda_field(const DressedSurfaces& ds, const CouplingGradients& grad,
                   std::vector<int>* singular = nullptr);

/// F_++ = F_-- carry Lambda^2/4 + delta^2 Lambda^2/(16 g^2); where g = 0 at finite detuning the
/// limit (dg/dq / delta)^2 is used.
ScalarF scalar_F_fields(const DressedSurfaces& ds, const CouplingGradients& grad,
                        const Field& lambda, const Field& f_ge,
                        const std::optional<BareScalarCouplings>& bare = std::nullopt,
                        std::vector<int>* singular = nullptr);

/// All dressed-channel couplings for one nuclear mode.
class CouplingFields {
 public:
  CouplingFields() = default;
  explicit CouplingFields(int n);

  /// f_kl, antisymmetric.
  Field f(int k, int l) const;
  /// F_kl, symmetric.
  const Field& F(int k, int l) const { return F_[index(k, l)]; }
  /// h_kl = d f_kl / dq - F_kl.
  const Field& h(int k, int l) const { return h_[k * kNumChannels + l]; }

  void set_f(int k, int l, Field value);
  void set_F(int k, int l, Field value);
  void set_h(int k, int l, Field value) { h_[k * kNumChannels + l] = std::move(value); }

  /// True if f_kl or F_kl is nonzero somewhere.
  bool couples(int k, int l, bool with_F) const;

  Field Lambda;
  CouplingGradients gradients;
  std::vector<int> singular_points;

  // Named views used by exports.
  const Field& f_mp() const { return f_[pair_index(kMinus, kPlus)]; }
  const Field& f_gp() const { return f_[pair_index(kGround, kPlus)]; }
  const Field& f_gm() const { return f_[pair_index(kGround, kMinus)]; }

 private:
  static int index(int k, int l) {
    if (k > l) std::swap(k, l);
    return k * kNumChannels + l;
  }
  static int pair_index(int k, int l) { return index(k, l); }

  // Upper triangle storage (k <= l); f is stored for k < l as f_kl.
  std::array<Field, kNumChannels * kNumChannels> f_;
  std::array<Field, kNumChannels * kNumChannels> F_;
  std::array<Field, kNumChannels * kNumChannels> h_;
};

/// h_kl = gradient(f_kl) - F_kl for every channel pair.
void scalar_couplings_h(CouplingFields& fields, const Grid& grid);

/// Full coupling set for dressed surfaces on a grid.
CouplingFields compute_couplings(const DressedSurfaces& ds, const Grid& grid,
                                 const std::optional<BareScalarCouplings>& bare = std::nullopt);

/// Zero couplings (uncoupled channels), used for bare-state references.
CouplingFields zero_couplings(int n);

}  // namespace polariton
