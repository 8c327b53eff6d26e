#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polariton/dynamics.hpp"

namespace polariton {

struct Populations {
  double g0 = 0.0;
  double minus = 0.0;
  double plus = 0.0;
  double norm = 0.0;
};

/// Channel populations with the uniform-grid quadrature; norm = sum of the three.
Populations populations(const WavePacket& psi, const Grid& grid);

struct PopulationTrace {
  std::vector<double> t_fs;
  std::vector<double> P_g0, P_minus, P_plus, norm;
  std::vector<double> absorbed;  // cumulative PML loss

  void push(double t_fs_value, const Populations& p, double absorbed_value = 0.0);
  const std::vector<double>& channel(int k) const;
  std::size_t size() const { return t_fs.size(); }
};

/// Gaussian probe E(t) = amplitude exp(-i omega_L t - t^2 / (2 sigma^2)).
struct PulseParams {
  double omega_L = 0.0;  // hartree
  double sigma = 1.0;    // a.u. time
  double amplitude = 1.0;

  static PulseParams from_fwhm(double omega_L, double fwhm, double amplitude = 1.0);
  /// FWHM of the field envelope |E|, sigma * 2 sqrt(2 ln 2).
  double fwhm() const;
  cplx field(double t) const;
  void validate() const;
};

struct BiExpFit {
  double A1 = 0.0, tau1 = 0.0, A2 = 0.0, tau2 = 0.0, offset = 0.0;
  double residual_rms = 0.0;
  /// tau1 ~ tau2 or one amplitude negligible; the dominant component is then reported in slot 1
  /// with A2 = 0 and tau2 = tau1.
  bool degenerate = false;
  bool converged = false;
};

struct FitOptions {
  double t_min = 20.0;  // samples before t_min are excluded (doorway transients)
  bool with_offset = false;
  int starts = 24;
  std::uint64_t seed = 20240611;
};

/// Least-squares A1 exp(-t/tau1) + A2 exp(-t/tau2) (+ offset), tau1 < tau2. Times in the unit of t.
BiExpFit fit_biexponential(const std::vector<double>& t, const std::vector<double>& y,
                           const FitOptions& opt = {});
BiExpFit fit_biexponential(const PopulationTrace& trace, int channel, const FitOptions& opt = {});

/// Hermitian dipole operator between the dressed channels: g0 <-> + (mu_g_plus),
/// g0 <-> - (mu_g_minus), - <-> + (mu_minus_plus).
struct DipoleOperator {
  Field g_plus, g_minus, minus_plus;

  static DipoleOperator from(const DressedSurfaces& ds);
  WavePacket apply(const WavePacket& psi) const;
};

struct SignalOptions {
  double window_sigmas = 4.0;  // integrate over |t - T| <= window_sigmas * sigma
  int min_nodes = 40;          // quadrature nodes spanning the window
  double dt = 1.0;             // propagation step, a.u.; node spacing is a multiple of it
  int stride = 0;              // node spacing in steps; 0 picks the largest giving min_nodes
  KrylovOptions krylov{};
  int threads = 1;  // delays are split across this many workers; 0 uses all cores
};

/// Quadrature layout of one delay window.
struct SignalWindow {
  long first_step;  // first node at first_step * dt
  int stride;
  int nodes;
};
SignalWindow signal_window(double T, const PulseParams& pulse, const SignalOptions& opt);

/// Frequency-integrated transient absorption
///   S_N(T) = 2 Re  int dt int_{tau < t} dtau  E(t - T) E*(tau - T) <mu psi(t)| U(t, tau) |mu psi(tau)>
/// with psi(t) the doorway state propagated under H. This pairing keeps the resonant term, and
/// stimulated emission from the excited channels comes out positive.
///
/// The inner integral is carried as one accumulated daughter state per delay, so each delay costs
/// one propagation across its window. Delays are independent and may be evaluated on several
/// threads (SignalOptions::threads) with identical results. Throws std::invalid_argument if a window starts before t = 0.
std::vector<double> transient_absorption(const HamiltonianAction& H, const WavePacket& doorway,
                                         const DipoleOperator& mu, const PulseParams& pulse,
                                         const std::vector<double>& delays,
                                         const SignalOptions& opt = {});

/// Same quantity by nested propagation (one daughter per tau node, propagated to every later t
/// node). Quadratic in the node count; kept as a reference for the accumulated form.
double transient_absorption_nested(const HamiltonianAction& H, const WavePacket& doorway,
                                   const DipoleOperator& mu, const PulseParams& pulse, double T,
                                   const SignalOptions& opt = {});

/// Populations of the dressed channels sampled every `sample_every` steps.
PopulationTrace propagate_populations(const Propagator& prop, WavePacket& psi, double t_final,
                                      double dt, int sample_every);

}  // namespace polariton
