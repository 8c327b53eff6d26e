#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace polariton {

// All parameters below are stored in atomic units. Use the *_from_* helpers
// to build them from eV / angstrom tables.

struct MorseParams {
  double D;   // dissociation depth
  double a;   // inverse length
  double q0;  // minimum position
  double V0;  // energy offset

  static MorseParams from_ev_angstrom(double D_ev, double a_per_angstrom, double q0_angstrom,
                                      double V0_ev);
};

struct SigmoidDipoleParams {
  double amplitude;
  double steepness;  // inverse length
  double center;

  static SigmoidDipoleParams from_angstrom(double amplitude, double steepness_per_angstrom,
                                           double center_angstrom);
};

double eval_morse(const MorseParams& p, double q);
double eval_morse_derivative(const MorseParams& p, double q);
double eval_sigmoid_dipole(const SigmoidDipoleParams& p, double q);

/// Number of bound vibrational levels of a Morse oscillator.
int morse_bound_state_count(const MorseParams& p, double mass);
/// Analytic Morse level E_n; throws std::out_of_range above the last bound level.
double morse_eigenvalue(const MorseParams& p, double mass, int n);

/// Immutable one-dimensional curve q -> value (atomic units on both sides).
class Curve {
 public:
  class Impl {
   public:
    virtual ~Impl() = default;
    virtual double operator()(double q) const = 0;
    virtual std::optional<std::pair<double, double>> domain() const { return std::nullopt; }
  };

  Curve();  // identically zero
  explicit Curve(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

  static Curve constant(double value);
  static Curve morse(const MorseParams& p);
  static Curve sigmoid(const SigmoidDipoleParams& p);
  /// Natural cubic spline through (q, v); q strictly increasing, at least 3 points.
  /// Evaluation outside [q.front(), q.back()] throws std::out_of_range.
  static Curve tabulated(std::vector<double> q, std::vector<double> v);

  double operator()(double q) const { return (*impl_)(q); }
  std::optional<std::pair<double, double>> domain() const { return impl_->domain(); }
  bool is_zero() const { return is_zero_; }

 private:
  std::shared_ptr<const Impl> impl_;
  bool is_zero_ = false;
};

struct BareSystem {
  Curve Vg;
  Curve Ve;
  Curve mu_eg;
  Curve mu_gg;  // permanent dipoles default to zero
  Curve mu_ee;
  Curve f_ge;  // bare derivative coupling, zero for the analytic models
  double mass = 3650.0;

  /// Intersection of the tabulated domains, or nullopt if every curve is analytic.
  std::optional<std::pair<double, double>> domain() const;
};

namespace models {

// Morse table of the three diatomic states and the shared sigmoid dipole.
MorseParams s0();
MorseParams s1();
MorseParams s2();
SigmoidDipoleParams transition_dipole();
inline constexpr double kReducedMass = 3650.0;

/// |g> = S1 (dissociative), |e> = S2 (bound).
BareSystem photonic_catalyst();
/// |g> = S0 (bound), |e> = S1 (dissociative).
BareSystem photonic_bound();

}  // namespace models

/// Synthetic two-mode model with a symmetry-forbidden transition at the origin.
/// Vg = kg/2 (q1^2 + q2^2), Ve = dE + alpha q1^4 - beta q1^2 + ke/2 q2^2,
/// mu = c1 q1 + c2 q2. Coordinates are dimensionless mode displacements.
struct TwoModeCoInModel {
  double delta_e;  // vertical gap at the origin
  double k_g;
  double k_e;
  double alpha;
  double beta;
  double c1;
  double c2;

  static TwoModeCoInModel defaults();

  double Vg(double q1, double q2) const;
  double Ve(double q1, double q2) const;
  double mu(double q1, double q2) const;
  /// One-dimensional cut along q1 at fixed q2 (mass is a placeholder; cuts are not propagated).
  BareSystem cut_q1(double q2) const;
};

/// Loads a whitespace-separated table: header `# q Vg Ve [mu_eg] [mu_gg] [mu_ee] [f_ge]`,
/// optional `# units: <length> <energy> <dipole>` line. Missing optional columns are zero.
/// Throws ParseError (with line number) on malformed input.
BareSystem load_tabulated(const std::filesystem::path& path, double mass);

/// Writes a system sampled at the given points (angstrom / eV / au) in the load_tabulated format.
void write_tabulated(const std::filesystem::path& path, const BareSystem& system,
                     const std::vector<double>& q_points);

}  // namespace polariton
