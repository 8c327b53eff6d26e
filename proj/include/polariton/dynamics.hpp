#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "polariton/couplings.hpp"
#include "polariton/dressing.hpp"
#include "polariton/grid.hpp"

namespace polariton {

/// Nuclear wave packet in the dressed channels {g0, -, +}.
struct WavePacket {
  std::array<CField, kNumChannels> channels;
  double time = 0.0;  // a.u.

  WavePacket() = default;
  explicit WavePacket(int n);

  int size() const { return static_cast<int>(channels[0].size()); }
  CField& operator[](int k) { return channels[k]; }
  const CField& operator[](int k) const { return channels[k]; }
};

/// <a|b> with the grid quadrature weight.
cplx inner(const Grid& grid, const WavePacket& a, const WavePacket& b);
double norm2(const Grid& grid, const WavePacket& psi);

enum class CouplingMode { simplified, full };
std::string to_string(CouplingMode mode);
CouplingMode parse_coupling_mode(const std::string& text);

using ChannelMask = std::array<bool, kNumChannels>;

/// Coupled-channel Hamiltonian
///   H_kl = (T + V_k) delta_kl + 1/(2m) (2 f_kl d/dq + (d f_kl/dq))        [simplified]
/// with the coupling term applied as 1/(2m) (f_kl D psi_l + D (f_kl psi_l)), which is exactly
/// Hermitian for the antisymmetric f. Full mode adds F_kl/(2m) psi_l. Channel potentials include
/// the photon offsets so all channels share one absolute energy scale.
class HamiltonianAction {
 public:
  HamiltonianAction(SpectralOperators ops, const DressedSurfaces& ds, const CouplingFields& cf,
                    CouplingMode mode = CouplingMode::simplified);

  const Grid& grid() const { return ops_.grid(); }
  const SpectralOperators& operators() const { return ops_; }
  CouplingMode mode() const { return mode_; }
  bool hermitian() const { return !ops_.absorbing(); }
  const Field& potential(int k) const { return V_[k]; }

  /// Smallest channel set containing `seed` that is closed under the couplings.
  ChannelMask closure(ChannelMask seed) const;

  /// Acts on the active channels only, stored back to back in `in` / `out`.
  void apply(const ChannelMask& active, const cplx* in, cplx* out) const;
  WavePacket apply(const WavePacket& psi) const;

  /// Re <psi|H|psi> / <psi|psi>.
  double energy(const WavePacket& psi) const;

 private:
  SpectralOperators ops_;
  CouplingMode mode_;
  std::array<Field, kNumChannels> V_;
  // Prefactored coupling fields, f_kl / (2m) and F_kl / (2m).
  std::array<std::array<Field, kNumChannels>, kNumChannels> f_;
  std::array<std::array<Field, kNumChannels>, kNumChannels> F_;
  std::array<std::array<bool, kNumChannels>, kNumChannels> has_f_{};
  std::array<std::array<bool, kNumChannels>, kNumChannels> has_F_{};
};

struct KrylovOptions {
  double tol = 1e-9;  // local error estimate relative to the state norm
  int max_dim = 64;
  int min_dim = 4;
};

struct StepInfo {
  int krylov_dim = 0;
  double error_estimate = 0.0;
  /// Probability removed by the absorbing layer during the step, from the rate
  /// -2 Im <psi|H|psi> integrated over the step.
  double absorbed = 0.0;
};

/// psi <- exp(factor * A) psi for a linear operator A, by Arnoldi projection. factor is -i dt for
/// real time and -dt for imaginary time. Hermitian A uses the eigendecomposition of the projected
/// matrix, which keeps norm and energy exact within the subspace. When `flux_dt` > 0 the
/// absorption rate -2 Im<psi|A|psi> * weight is integrated over [0, flux_dt].
/// Throws RuntimeFailure if max_dim is reached without convergence.
StepInfo krylov_exp(const std::function<void(const cplx*, cplx*)>& apply, int len, cplx* psi,
                    cplx factor, bool hermitian, const KrylovOptions& opt, double flux_dt = 0.0,
                    double weight = 1.0);

/// Real-time propagator for one trajectory. Owns no shared mutable state.
class Propagator {
 public:
  Propagator(const HamiltonianAction& H, KrylovOptions opt = {});

  /// Advance psi by dt (a.u.); inactive channels are skipped.
  StepInfo step(WavePacket& psi, double dt) const;
  /// Cumulative PML-absorbed probability since construction.
  double absorbed() const { return absorbed_; }
  int max_krylov_dim() const { return max_dim_seen_; }
  const HamiltonianAction& hamiltonian() const { return H_; }

 private:
  const HamiltonianAction& H_;
  KrylovOptions opt_;
  mutable double absorbed_ = 0.0;
  mutable int max_dim_seen_ = 0;
};

/// propagate_step as a free function.
WavePacket propagate_step(const HamiltonianAction& H, const WavePacket& psi, double dt,
                          double tol = 1e-9);

enum class GroundStateMethod { fourier_grid, imaginary_time };

struct GroundState {
  Field chi;      // normalised with the grid quadrature, positive at its maximum
  double energy;  // hartree
};

/// Lowest eigenpair of T + V on the plain periodic grid.
GroundState ground_state(const Field& V, const Grid& grid, GroundStateMethod method);

/// Fourier-grid result, verified against imaginary-time relaxation; throws RuntimeFailure if the
/// energies differ by more than rel_tol.
GroundState relax_ground_state(const Field& V, const Grid& grid, double rel_tol = 1e-8);

struct Doorway {
  WavePacket psi;
  /// Populations before renormalisation, (P+, P-).
  double weight_plus = 0.0;
  double weight_minus = 0.0;
};

/// Impulsive excitation of chi0 with the dressed dipoles (cos theta mu, -sin theta mu), where mu is
/// the constant mu0 when given, else mu_eg(q).
Doorway prepare_doorway(const Field& chi0, const Grid& grid, const DressedSurfaces& ds,
                        std::optional<double> mu0 = std::nullopt);

/// Plain-text checkpoint: header lines `# key = value`, then
/// `q Re_g0 Im_g0 Re_minus Im_minus Re_plus Im_plus` per grid point.
void write_checkpoint(const std::filesystem::path& path, const WavePacket& psi, const Grid& grid,
                      const std::string& scenario_hash);
struct Checkpoint {
  WavePacket psi;
  GridSpec grid;
  std::string scenario_hash;
};
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace polariton
