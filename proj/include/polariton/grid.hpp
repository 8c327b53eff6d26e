#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>

namespace polariton {

using Field = Eigen::VectorXd;
using CField = Eigen::VectorXcd;
using cplx = std::complex<double>;

struct GridSpec {
  double q_min = 0.0;  // bohr
  double q_max = 1.0;
  int n_points = 64;
  double mass = 1.0;  // a.u.
  bool stagger = false;
};

struct PMLParams {
  double width = 0.0;     // bohr, per absorbing edge
  double strength = 1.0;  // peak of the dimensionless absorption profile
  int order = 3;
  bool left = false;
  bool right = true;
};

class FftPlan;

/// Uniform periodic grid q_j = q_min + (j + stagger/2) dq, dq = (q_max - q_min) / n.
class Grid {
 public:
  explicit Grid(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  int size() const { return spec_.n_points; }
  double spacing() const { return dq_; }
  double mass() const { return spec_.mass; }
  const Field& points() const { return q_; }
  /// Angular wavenumbers in FFT order.
  const Field& wavenumbers() const { return k_; }
  const FftPlan& fft() const { return *fft_; }

  template <class F>
  Field sample(F&& f) const {
    Field out(size());
    for (int j = 0; j < size(); ++j) out[j] = f(q_[j]);
    return out;
  }

 private:
  GridSpec spec_;
  double dq_;
  Field q_;
  Field k_;
  std::shared_ptr<const FftPlan> fft_;
};

/// Unnormalised complex FFT of a fixed length; execution is thread safe.
class FftPlan {
 public:
  explicit FftPlan(int n);
  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  void forward(const cplx* in, cplx* out) const;
  void backward(const cplx* in, cplx* out) const;
  int size() const { return n_; }

 private:
  int n_;
  void* forward_;
  void* backward_;
};

Grid make_grid(const GridSpec& spec);

/// -1/(2m) d^2/dq^2 by multiplication with k^2 in wavenumber space.
CField apply_kinetic(const Grid& grid, const CField& psi);
/// Spectral first derivative; the Nyquist component is dropped so the operator is anti-Hermitian.
CField spectral_gradient(const Grid& grid, const CField& psi);
/// First derivative of a smooth, non-periodic field: 8th-order central differences,
/// one-sided 9-point stencils on the four outermost points at each edge.
Field gradient(const Grid& grid, const Field& f);

/// Finite-difference weights for the m-th derivative at x0 on arbitrary nodes (Fornberg).
Eigen::VectorXd fd_weights(double x0, const Eigen::VectorXd& nodes, int m);

/// Kinetic and derivative operators, optionally with complex coordinate stretching
/// 1/(1 + i sigma(q)) inside absorbing layers.
class SpectralOperators {
 public:
  explicit SpectralOperators(Grid grid);
  SpectralOperators(Grid grid, const PMLParams& pml);

  const Grid& grid() const { return grid_; }
  bool absorbing() const { return absorbing_; }
  const Field& sigma() const { return sigma_; }
  /// Indices of grid points outside every absorbing layer.
  bool in_interior(int j) const { return sigma_[j] == 0.0; }

  void kinetic(const cplx* in, cplx* out) const;
  void derivative(const cplx* in, cplx* out) const;
  /// Kinetic term and plain first derivative sharing one forward transform.
  void kinetic_and_derivative(const cplx* in, cplx* kin, cplx* deriv) const;

  CField kinetic(const CField& psi) const;
  CField derivative(const CField& psi) const;

 private:
  Grid grid_;
  bool absorbing_ = false;
  Field sigma_;
  CField stretch_sq_;     // s^2
  CField stretch_slope_;  // s ds/dq
  Field k_deriv_;      // k with the Nyquist entry zeroed
  Field k2_over_2m_;   // k^2 / 2m
};

SpectralOperators make_pml(const Grid& grid, const PMLParams& p);

/// Two-dimensional tensor grid used only for surface maps.
struct Grid2D {
  Grid axis1;
  Grid axis2;
};

}  // namespace polariton
