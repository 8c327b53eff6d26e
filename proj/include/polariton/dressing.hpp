#pragma once

#include <Eigen/Dense>
#include <vector>

#include "polariton/grid.hpp"
#include "polariton/surfaces.hpp"

namespace polariton {

/// Single cavity mode in the vacuum state (n_c = 0), RWA coupling g = eps_c mu_eg / 2.
struct CavityParams {
  double omega_c = 0.0;  // hartree
  double eps_c = 0.0;    // vacuum field amplitude, a.u.
  int n_c = 0;

  void validate() const;
};

/// Resonance with the vertical gap at q_res; eps_c chosen so max_q |g(q)| on the grid equals g_max.
CavityParams cavity_from_resonance(const BareSystem& system, const Grid& grid, double q_res,
                                   double g_max);

/// Dressed (polariton) fields sampled on a grid.
///
/// Channel convention, in the {|e,0>, |g,1>} basis:
///   |+> = ( cos_theta, sin_theta),   |-> = (-sin_theta, cos_theta)
/// with cos_theta = sqrt((Omega + delta_c) / (2 Omega)) and sin_theta carrying the sign of g,
/// so |+> is always the upper eigenvector of jc_matrix.
struct DressedSurfaces {
  Field q;
  Field delta_c;
  Field g;
  Field Omega;
  Field cos_theta;
  Field sin_theta;
  Field V_plus;
  Field V_minus;
  Field V_g0;
  Field mu_g_plus;
  Field mu_g_minus;
  Field mu_minus_plus;
  Field mu_eg;
  Field f_ge;
  /// Constants to add to V_g0 and V_pm for absolute transition frequencies:
  /// E(g,0) = V_g0 + omega_c / 2 and E(pm,0) = V_pm + omega_c.
  double offset_g0 = 0.0;
  double offset_pm = 0.0;
  CavityParams cavity;
  /// Grid indices where Omega == 0 (exact degeneracy).
  std::vector<int> degenerate_points;

  int size() const { return static_cast<int>(q.size()); }
};

DressedSurfaces dressed_fields(const BareSystem& system, const CavityParams& cavity,
                               const Grid& grid);
DressedSurfaces dressed_fields(const BareSystem& system, const CavityParams& cavity,
                               const Field& points);

/// Uncoupled reference (no cavity): channel "+" is the bare excited state |e>, channel "-"
/// is unused (|g,1> far away), g0 is |g>. All dressed dipoles map to the bare ones.
DressedSurfaces bare_fields(const BareSystem& system, const Grid& grid);

/// One-excitation JC Hamiltonian in the {|e,0>, |g,1>} basis at q.
Eigen::Matrix2d jc_matrix(const BareSystem& system, const CavityParams& cavity, double q);

/// Dressed gap, mixing and surfaces for a single point, shared by 1-D and 2-D maps.
struct DressedPoint {
  double delta_c, g, Omega, V_plus, V_minus;
};
DressedPoint dress_point(double Vg, double Ve, double mu_eg, const CavityParams& cavity);

}  // namespace polariton
