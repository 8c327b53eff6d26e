#pragma once

#include <vector>

#include "polariton/dressing.hpp"
#include "polariton/surfaces.hpp"

namespace polariton {

/// Cell-centred sampling of [min, max] with n points per axis. With a symmetric range and even n
/// the origin sits on a cell corner and is never sampled.
struct GapMapSpec {
  double q1_min = -1.5, q1_max = 1.5;
  double q2_min = -1.5, q2_max = 1.5;
  int n1 = 60, n2 = 60;
};

struct GapMap {
  std::vector<double> q1, q2;
  /// Row-major in (i1, i2), hartree.
  Eigen::MatrixXd delta_c, g, gap;
};

GapMap coin_gap_map(const TwoModeCoInModel& model, const CavityParams& cavity,
                    const GapMapSpec& spec);

/// Resonant with the vertical gap at the origin; eps_c from g_max at the largest |mu| on the map.
CavityParams coin_cavity(const TwoModeCoInModel& model, const GapMapSpec& spec, double g_max);

struct GapMinimum {
  double q1 = 0.0, q2 = 0.0;
  double gap_sampled = 0.0;       // smallest sampled gap
  double gap_interpolated = 0.0;  // minimum of the interpolated gap
};

/// Bicubic interpolation of delta_c and g on the 4x4 nodes around the smallest sampled gap, then
/// least-squares minimisation of delta_c^2 + 4 g^2 over that patch. Needs n1, n2 >= 4.
GapMinimum interpolated_gap_minimum(const GapMap& map);

struct ConeCheck {
  std::vector<double> q1;
  std::vector<double> ratio;  // gap / |q1| along q2 = 0
  double spread = 0.0;        // (max - min) / max of ratio
};

ConeCheck cone_check(const TwoModeCoInModel& model, const CavityParams& cavity,
                     const std::vector<double>& q1_values);

}  // namespace polariton
