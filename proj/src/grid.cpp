#include "polariton/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace polariton {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  fftw_complex* data = nullptr;
  int n = 0;
  ~FftwBuffer() { fftw_free(data); }
  fftw_complex* get(int size) {
    if (size != n) {
      fftw_free(data);
      data = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * size));
      n = size;
    }
    return data;
  }
};

// Per-thread aligned scratch so that new-array execution matches the planned alignment.
fftw_complex* scratch(int which, int n) {
  thread_local FftwBuffer buffers[2];
  return buffers[which].get(n);
}

}  // namespace

// ---------------------------------------------------------------------------

FftPlan::FftPlan(int n) : n_(n) {
  std::lock_guard lock(planner_mutex());
  auto* a = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  auto* b = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
  // FFTW_ESTIMATE keeps the plan, and therefore every output bit, reproducible.
  forward_ = fftw_plan_dft_1d(n, a, b, FFTW_FORWARD, FFTW_ESTIMATE);
  backward_ = fftw_plan_dft_1d(n, a, b, FFTW_BACKWARD, FFTW_ESTIMATE);
  fftw_free(a);
  fftw_free(b);
}

FftPlan::~FftPlan() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  fftw_destroy_plan(static_cast<fftw_plan>(backward_));
}

void FftPlan::forward(const cplx* in, cplx* out) const {
  auto* a = scratch(0, n_);
  auto* b = scratch(1, n_);
  std::copy(in, in + n_, reinterpret_cast<cplx*>(a));
  fftw_execute_dft(static_cast<fftw_plan>(forward_), a, b);
  std::copy(reinterpret_cast<cplx*>(b), reinterpret_cast<cplx*>(b) + n_, out);
}

void FftPlan::backward(const cplx* in, cplx* out) const {
  auto* a = scratch(0, n_);
  auto* b = scratch(1, n_);
  std::copy(in, in + n_, reinterpret_cast<cplx*>(a));
  fftw_execute_dft(static_cast<fftw_plan>(backward_), a, b);
  std::copy(reinterpret_cast<cplx*>(b), reinterpret_cast<cplx*>(b) + n_, out);
}

// ---------------------------------------------------------------------------

Grid::Grid(const GridSpec& spec) : spec_(spec) {
  if (!(spec.q_max > spec.q_min)) throw std::invalid_argument("grid: q_max must exceed q_min");
  if (spec.n_points < 64) throw std::invalid_argument("grid: n_points must be at least 64");
  if (!(spec.mass > 0.0)) throw std::invalid_argument("grid: mass must be positive");
  const int n = spec.n_points;
  dq_ = (spec.q_max - spec.q_min) / n;
  q_.resize(n);
  const double shift = spec.stagger ? 0.5 : 0.0;
  for (int j = 0; j < n; ++j) q_[j] = spec.q_min + (j + shift) * dq_;
  k_.resize(n);
  const double dk = 2.0 * std::numbers::pi / (n * dq_);
  for (int j = 0; j < n; ++j) k_[j] = (j <= n / 2 ? j : j - n) * dk;
  fft_ = std::make_shared<FftPlan>(n);
}

Grid make_grid(const GridSpec& spec) { return Grid(spec); }

CField apply_kinetic(const Grid& grid, const CField& psi) {
  return SpectralOperators(grid).kinetic(psi);
}

CField spectral_gradient(const Grid& grid, const CField& psi) {
  return SpectralOperators(grid).derivative(psi);
}

Eigen::VectorXd fd_weights(double x0, const Eigen::VectorXd& nodes, int m) {
  // Fornberg (1988), weights for derivative order m only.
  const int n = static_cast<int>(nodes.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, m + 1);
  double c1 = 1.0;
  double c4 = nodes[0] - x0;
  c(0, 0) = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c(i, k) = c1 * (k * c(i - 1, k - 1) - c5 * c(i - 1, k)) / c2;
        c(i, 0) = -c1 * c5 * c(i - 1, 0) / c2;
      }
      for (int k = mn; k >= 1; --k) c(j, k) = (c4 * c(j, k) - k * c(j, k - 1)) / c3;
      c(j, 0) = c4 * c(j, 0) / c3;
    }
    c1 = c2;
  }
  return c.col(m);
}

Field gradient(const Grid& grid, const Field& f) {
  static constexpr int half = 4;
  static constexpr int width = 2 * half + 1;
  const int n = grid.size();
  const double h = grid.spacing();
  // Stencil weights in units of the spacing, one set per edge offset.
  static const auto weights = [] {
    std::vector<Eigen::VectorXd> w;
    Eigen::VectorXd nodes(width);
    for (int s = 0; s <= half; ++s) {
      for (int i = 0; i < width; ++i) nodes[i] = i - s;
      w.push_back(fd_weights(0.0, nodes, 1));
    }
    return w;
  }();

  Field out(n);
  for (int j = 0; j < n; ++j) {
    int start;
    const Eigen::VectorXd* w;
    double sign = 1.0;
    if (j < half) {
      start = 0;
      w = &weights[j];
    } else if (j >= n - half) {
      // Mirror of the left-edge stencil.
      start = n - width;
      w = &weights[n - 1 - j];
      sign = -1.0;
    } else {
      start = j - half;
      w = &weights[half];
    }
    double acc = 0.0;
    if (sign > 0) {
      for (int i = 0; i < width; ++i) acc += (*w)[i] * f[start + i];
    } else {
      for (int i = 0; i < width; ++i) acc -= (*w)[i] * f[n - 1 - i];
    }
    out[j] = acc / h;
  }
  return out;
}

// ---------------------------------------------------------------------------

SpectralOperators::SpectralOperators(Grid grid) : grid_(std::move(grid)) {
  const int n = grid_.size();
  sigma_ = Field::Zero(n);
  k_deriv_ = grid_.wavenumbers();
  if (n % 2 == 0) k_deriv_[n / 2] = 0.0;
  k2_over_2m_ = grid_.wavenumbers().array().square() / (2.0 * grid_.mass());
}

SpectralOperators::SpectralOperators(Grid grid, const PMLParams& p)
    : SpectralOperators(std::move(grid)) {
  const auto& spec = grid_.spec();
  const double L = spec.q_max - spec.q_min;
  if (!(p.width > 0.0) || !(p.width < L / 4.0)) {
    throw std::invalid_argument("PML width must be positive and below a quarter of the domain");
  }
  if (!(p.strength > 0.0)) throw std::invalid_argument("PML strength must be positive");
  if (p.order < 2) throw std::invalid_argument("PML order must be at least 2");
  const auto& q = grid_.points();
  stretch_sq_ = CField::Ones(grid_.size());
  stretch_slope_ = CField::Zero(grid_.size());
  for (int j = 0; j < grid_.size(); ++j) {
    double s = 0.0;
    double ds = 0.0;
    if (p.right) {
      const double x = (q[j] - (spec.q_max - p.width)) / p.width;
      if (x > 0.0) {
        s = p.strength * std::pow(x, p.order);
        ds = p.strength * p.order * std::pow(x, p.order - 1) / p.width;
      }
    }
    if (p.left) {
      const double x = ((spec.q_min + p.width) - q[j]) / p.width;
      if (x > 0.0) {
        s = p.strength * std::pow(x, p.order);
        ds = -p.strength * p.order * std::pow(x, p.order - 1) / p.width;
      }
    }
    sigma_[j] = s;
    const cplx st = 1.0 / cplx(1.0, s);
    stretch_sq_[j] = st * st;
    // s ds/dq with ds/dq = -i sigma' s^2
    stretch_slope_[j] = st * cplx(0.0, -ds) * st * st;
  }
  absorbing_ = (p.left || p.right);
}

SpectralOperators make_pml(const Grid& grid, const PMLParams& p) {
  return SpectralOperators(grid, p);
}

void SpectralOperators::derivative(const cplx* in, cplx* out) const {
  const int n = grid_.size();
  const auto& fft = grid_.fft();
  thread_local std::vector<cplx> hat;
  hat.resize(n);
  fft.forward(in, hat.data());
  const double inv_n = 1.0 / n;
  for (int j = 0; j < n; ++j) hat[j] *= cplx(0.0, k_deriv_[j] * inv_n);
  fft.backward(hat.data(), out);
}

void SpectralOperators::kinetic(const cplx* in, cplx* out) const {
  if (absorbing_) {
    thread_local std::vector<cplx> d;
    d.resize(grid_.size());
    kinetic_and_derivative(in, out, d.data());
    return;
  }
  const int n = grid_.size();
  const auto& fft = grid_.fft();
  thread_local std::vector<cplx> hat;
  hat.resize(n);
  fft.forward(in, hat.data());
  const double inv_n = 1.0 / n;
  for (int j = 0; j < n; ++j) hat[j] *= k2_over_2m_[j] * inv_n;
  fft.backward(hat.data(), out);
}

void SpectralOperators::kinetic_and_derivative(const cplx* in, cplx* kin, cplx* deriv) const {
  const int n = grid_.size();
  const auto& fft = grid_.fft();
  const double inv_n = 1.0 / n;
  thread_local std::vector<cplx> hat, tmp;
  hat.resize(n);
  tmp.resize(n);
  fft.forward(in, hat.data());
  for (int j = 0; j < n; ++j) tmp[j] = hat[j] * cplx(0.0, k_deriv_[j] * inv_n);
  fft.backward(tmp.data(), deriv);
  for (int j = 0; j < n; ++j) hat[j] *= k2_over_2m_[j] * inv_n;
  fft.backward(hat.data(), kin);
  if (!absorbing_) return;
  // T = -1/(2m) s d/dq s d/dq expanded as -1/(2m) (s^2 d2/dq2 + s s' d/dq). The expanded form
  // keeps the Nyquist mode's kinetic energy; the nested product of two first derivatives gives
  // it zero energy and lets it grow inside the layer.
  const double pref = -0.5 / grid_.mass();
  for (int j = 0; j < n; ++j) kin[j] = stretch_sq_[j] * kin[j] + pref * stretch_slope_[j] * deriv[j];
}

CField SpectralOperators::kinetic(const CField& psi) const {
  CField out(psi.size());
  kinetic(psi.data(), out.data());
  return out;
}

CField SpectralOperators::derivative(const CField& psi) const {
  CField out(psi.size());
  derivative(psi.data(), out.data());
  return out;
}

}  // namespace polariton
