#include "polariton/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>
#include <unsupported/Eigen/LevenbergMarquardt>

namespace polariton {

Populations populations(const WavePacket& psi, const Grid& grid) {
  const double dq = grid.spacing();
  Populations p;
  p.g0 = psi[kGround].squaredNorm() * dq;
  p.minus = psi[kMinus].squaredNorm() * dq;
  p.plus = psi[kPlus].squaredNorm() * dq;
  p.norm = p.g0 + p.minus + p.plus;
  return p;
}

void PopulationTrace::push(double t, const Populations& p, double absorbed_value) {
  t_fs.push_back(t);
  P_g0.push_back(p.g0);
  P_minus.push_back(p.minus);
  P_plus.push_back(p.plus);
  norm.push_back(p.norm);
  absorbed.push_back(absorbed_value);
}

const std::vector<double>& PopulationTrace::channel(int k) const {
  switch (k) {
    case kGround: return P_g0;
    case kMinus: return P_minus;
    case kPlus: return P_plus;
  }
  throw std::out_of_range("channel index");
}

// ---------------------------------------------------------------------------

PulseParams PulseParams::from_fwhm(double omega_L, double fwhm, double amplitude) {
  PulseParams p;
  p.omega_L = omega_L;
  p.sigma = fwhm / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
  p.amplitude = amplitude;
  p.validate();
  return p;
}

double PulseParams::fwhm() const { return sigma * 2.0 * std::sqrt(2.0 * std::numbers::ln2); }

cplx PulseParams::field(double t) const {
  return amplitude * std::exp(cplx(-t * t / (2.0 * sigma * sigma), -omega_L * t));
}

void PulseParams::validate() const {
  if (!(sigma > 0.0)) throw std::invalid_argument("pulse sigma must be positive");
}

// ---------------------------------------------------------------------------

namespace {

struct BiExpFunctor : Eigen::DenseFunctor<double> {
  const std::vector<double>& t;
  const std::vector<double>& y;
  int terms;
  bool offset;

  BiExpFunctor(const std::vector<double>& t_, const std::vector<double>& y_, int terms_,
               bool offset_)
      : DenseFunctor<double>(2 * terms_ + (offset_ ? 1 : 0), static_cast<int>(t_.size())),
        t(t_), y(y_), terms(terms_), offset(offset_) {}

  // x = (A1, ln tau1[, A2, ln tau2][, offset])
  int operator()(const InputType& x, ValueType& r) const {
    for (size_t i = 0; i < t.size(); ++i) {
      double m = offset ? x[2 * terms] : 0.0;
      for (int k = 0; k < terms; ++k) m += x[2 * k] * std::exp(-t[i] * std::exp(-x[2 * k + 1]));
      r[i] = m - y[i];
    }
    return 0;
  }

  int df(const InputType& x, JacobianType& J) const {
    for (size_t i = 0; i < t.size(); ++i) {
      for (int k = 0; k < terms; ++k) {
        const double rate = std::exp(-x[2 * k + 1]);
        const double e = std::exp(-t[i] * rate);
        J(i, 2 * k) = e;
        J(i, 2 * k + 1) = x[2 * k] * e * t[i] * rate;
      }
      if (offset) J(i, 2 * terms) = 1.0;
    }
    return 0;
  }
};

struct Candidate {
  Eigen::VectorXd x;
  double rms = std::numeric_limits<double>::infinity();
};

Candidate run_lm(const std::vector<double>& t, const std::vector<double>& y, int terms,
                 bool offset, Eigen::VectorXd x0) {
  BiExpFunctor f(t, y, terms, offset);
  Eigen::LevenbergMarquardt<BiExpFunctor> lm(f);
  lm.setMaxfev(2000);
  lm.minimize(x0);
  Candidate c;
  if (!x0.allFinite()) return c;
  Eigen::VectorXd r(t.size());
  f(x0, r);
  c.x = x0;
  c.rms = std::sqrt(r.squaredNorm() / static_cast<double>(t.size()));
  return c;
}

/// Decay time from a log-linear fit of a segment of strictly positive samples.
double log_linear_tau(const std::vector<double>& t, const std::vector<double>& y, size_t a,
                      size_t b) {
  double st = 0, sy = 0, stt = 0, sty = 0;
  int n = 0;
  for (size_t i = a; i < b; ++i) {
    if (!(y[i] > 0.0)) continue;
    const double ly = std::log(y[i]);
    st += t[i];
    sy += ly;
    stt += t[i] * t[i];
    sty += t[i] * ly;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double slope = (n * sty - st * sy) / (n * stt - st * st);
  return slope < 0.0 ? -1.0 / slope : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

BiExpFit fit_biexponential(const std::vector<double>& t_all, const std::vector<double>& y_all,
                           const FitOptions& opt) {
  if (t_all.size() != y_all.size()) throw std::invalid_argument("fit: size mismatch");
  std::vector<double> t, y;
  for (size_t i = 0; i < t_all.size(); ++i) {
    if (t_all[i] >= opt.t_min) {
      t.push_back(t_all[i]);
      y.push_back(y_all[i]);
    }
  }
  const int np = 4 + (opt.with_offset ? 1 : 0);
  if (static_cast<int>(t.size()) < np + 2) throw std::invalid_argument("fit: too few samples");

  const double span = t.back() - t.front();
  const size_t n = t.size();
  double tau_fast = log_linear_tau(t, y, 0, std::max<size_t>(n / 5, 3));
  double tau_slow = log_linear_tau(t, y, n - std::max<size_t>(n / 3, 3), n);
  if (!std::isfinite(tau_fast)) tau_fast = span / 10.0;
  if (!std::isfinite(tau_slow)) tau_slow = span;
  if (tau_slow < tau_fast) std::swap(tau_slow, tau_fast);
  const double y0 = std::max(std::abs(y.front()), 1e-12);

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> decade(-1.0, 1.0), split(0.1, 0.9);
  Candidate best;
  for (int s = 0; s < std::max(opt.starts, 1); ++s) {
    const double f1 = s == 0 ? 1.0 : std::pow(10.0, decade(rng));
    const double f2 = s == 0 ? 1.0 : std::pow(10.0, decade(rng));
    const double w = s == 0 ? 0.7 : split(rng);
    Eigen::VectorXd x0(np);
    x0 << w * y0 * std::exp(t.front() / (tau_fast * f1)), std::log(tau_fast * f1),
        (1.0 - w) * y0 * std::exp(t.front() / (tau_slow * f2)), std::log(tau_slow * f2);
    if (opt.with_offset) x0[4] = 0.0;
    if (!x0.allFinite()) continue;
    Candidate c = run_lm(t, y, 2, opt.with_offset, x0);
    if (c.rms < best.rms) best = c;
  }

  BiExpFit fit;
  if (!std::isfinite(best.rms)) return fit;
  fit.converged = true;
  double A1 = best.x[0], tau1 = std::exp(best.x[1]), A2 = best.x[2], tau2 = std::exp(best.x[3]);
  if (tau1 > tau2) {
    std::swap(A1, A2);
    std::swap(tau1, tau2);
  }
  fit.A1 = A1;
  fit.tau1 = tau1;
  fit.A2 = A2;
  fit.tau2 = tau2;
  fit.offset = opt.with_offset ? best.x[4] : 0.0;
  fit.residual_rms = best.rms;

  // Contribution of each term over the fitted range decides degeneracy.
  const double c1 = std::abs(A1) * std::exp(-t.front() / tau1);
  const double c2 = std::abs(A2) * std::exp(-t.front() / tau2);
  const bool close = std::abs(tau2 - tau1) < 0.05 * tau2;
  const bool negligible = std::min(c1, c2) < 1e-3 * std::max(c1, c2);
  if (close || negligible) {
    Eigen::VectorXd x0(2 + (opt.with_offset ? 1 : 0));
    const double tau = c1 >= c2 ? tau1 : tau2;
    x0 << std::max(c1, c2) * std::exp(t.front() / tau), std::log(tau);
    if (opt.with_offset) x0[2] = fit.offset;
    const Candidate single = run_lm(t, y, 1, opt.with_offset, x0);
    fit.degenerate = true;
    if (std::isfinite(single.rms)) {
      fit.A1 = single.x[0];
      fit.tau1 = std::exp(single.x[1]);
      fit.offset = opt.with_offset ? single.x[2] : 0.0;
      fit.residual_rms = single.rms;
    }
    fit.A2 = 0.0;
    fit.tau2 = fit.tau1;
  }
  return fit;
}

BiExpFit fit_biexponential(const PopulationTrace& trace, int channel, const FitOptions& opt) {
  return fit_biexponential(trace.t_fs, trace.channel(channel), opt);
}

// ---------------------------------------------------------------------------

DipoleOperator DipoleOperator::from(const DressedSurfaces& ds) {
  return {ds.mu_g_plus, ds.mu_g_minus, ds.mu_minus_plus};
}

WavePacket DipoleOperator::apply(const WavePacket& psi) const {
  WavePacket out(psi.size());
  out.time = psi.time;
  out[kGround] = g_plus.cwiseProduct(psi[kPlus]) + g_minus.cwiseProduct(psi[kMinus]);
  out[kPlus] = g_plus.cwiseProduct(psi[kGround]) + minus_plus.cwiseProduct(psi[kMinus]);
  out[kMinus] = g_minus.cwiseProduct(psi[kGround]) + minus_plus.cwiseProduct(psi[kPlus]);
  return out;
}

namespace {

// Products are formed on sparse fields, so channels that are exactly zero stay exactly zero
// and the propagator keeps skipping them.
WavePacket& axpy(WavePacket& y, cplx a, const WavePacket& x) {
  for (int k = 0; k < kNumChannels; ++k) {
    if ((x[k].array() != cplx(0.0)).any()) y[k] += a * x[k];
  }
  return y;
}

void advance(const Propagator& prop, WavePacket& psi, double dt, int steps) {
  for (int s = 0; s < steps; ++s) prop.step(psi, dt);
}

}  // namespace

SignalWindow signal_window(double T, const PulseParams& pulse, const SignalOptions& opt) {
  pulse.validate();
  if (!(opt.dt > 0.0)) throw std::invalid_argument("signal: dt must be positive");
  if (opt.min_nodes < 3) throw std::invalid_argument("signal: need at least 3 nodes");
  const double half = opt.window_sigmas * pulse.sigma;
  if (T - half < 0.0) {
    throw std::invalid_argument("signal window starts before t = 0; increase the delay to at least " +
                                std::to_string(half) + " a.u.");
  }
  SignalWindow w;
  w.stride = opt.stride > 0
                 ? opt.stride
                 : std::max(1, static_cast<int>(std::floor(2.0 * half / ((opt.min_nodes - 1) * opt.dt))));
  w.first_step = static_cast<long>(std::floor((T - half) / opt.dt + 1e-9));
  const double h = w.stride * opt.dt;
  const double start = w.first_step * opt.dt;
  w.nodes = static_cast<int>(std::ceil((T + half - start) / h - 1e-9)) + 1;
  return w;
}

namespace {

// One parent propagation serves every delay of the batch.
std::vector<double> accumulated_scan(const HamiltonianAction& H, const WavePacket& doorway,
                                     const DipoleOperator& mu, const PulseParams& pulse,
                                     const std::vector<double>& delays, const SignalOptions& opt) {
  const double dt = opt.dt;
  struct Job {
    double T;
    SignalWindow w;
    int next = 0;        // next node index
    WavePacket carry;    // I_{i-1} + h/2 E*(tau_{i-1} - T) x_{i-1}, at time of node i-1
    double sum = 0.0;
  };
  std::vector<Job> jobs;
  long last_step = 0;
  for (double T : delays) {
    Job j;
    j.T = T;
    j.w = signal_window(T, pulse, opt);
    last_step = std::max(last_step, j.w.first_step + static_cast<long>(j.w.nodes - 1) * j.w.stride);
    jobs.push_back(std::move(j));
  }
  Propagator parent(H, opt.krylov);
  Propagator daughter(H, opt.krylov);
  WavePacket psi = doorway;
  psi.time = 0.0;
  for (long step = 0; step <= last_step; ++step) {
    if (step > 0) parent.step(psi, dt);
    bool have_x = false;
    WavePacket x;
    for (Job& j : jobs) {
      if (j.next >= j.w.nodes) continue;
      if (step != j.w.first_step + static_cast<long>(j.next) * j.w.stride) continue;
      if (!have_x) {
        x = mu.apply(psi);
        have_x = true;
      }
      const double h = j.w.stride * dt;
      const double t = step * dt;
      const cplx Estar = std::conj(pulse.field(t - j.T));
      WavePacket I;
      if (j.next == 0) {
        I = WavePacket(psi.size());
      } else {
        I = j.carry;
        advance(daughter, I, dt, j.w.stride);
        axpy(I, 0.5 * h * Estar, x);
      }
      const double wt = (j.next == 0 || j.next == j.w.nodes - 1) ? 0.5 * h : h;
      const cplx overlap = inner(H.grid(), x, I);
      j.sum += wt * (pulse.field(t - j.T) * overlap).real();
      j.carry = std::move(I);
      axpy(j.carry, 0.5 * h * Estar, x);
      ++j.next;
    }
  }
  std::vector<double> out;
  out.reserve(jobs.size());
  for (const Job& j : jobs) out.push_back(2.0 * j.sum);
  return out;
}

}  // namespace

std::vector<double> transient_absorption(const HamiltonianAction& H, const WavePacket& doorway,
                                         const DipoleOperator& mu, const PulseParams& pulse,
                                         const std::vector<double>& delays,
                                         const SignalOptions& opt) {
  for (double T : delays) signal_window(T, pulse, opt);
  int workers = opt.threads > 0 ? opt.threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, static_cast<int>(delays.size()));
  if (workers <= 1) return accumulated_scan(H, doorway, mu, pulse, delays, opt);

  // Round-robin batches; each delay's value does not depend on its batch.
  std::vector<std::vector<double>> batch(workers), result(workers);
  for (size_t i = 0; i < delays.size(); ++i) batch[i % workers].push_back(delays[i]);
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        result[w] = accumulated_scan(H, doorway, mu, pulse, batch[w], opt);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<double> out(delays.size());
  for (size_t i = 0; i < delays.size(); ++i) out[i] = result[i % workers][i / workers];
  return out;
}

double transient_absorption_nested(const HamiltonianAction& H, const WavePacket& doorway,
                                   const DipoleOperator& mu, const PulseParams& pulse, double T,
                                   const SignalOptions& opt) {
  const double dt = opt.dt;
  const SignalWindow w = signal_window(T, pulse, opt);
  const double h = w.stride * dt;
  Propagator prop(H, opt.krylov);
  WavePacket psi = doorway;
  psi.time = 0.0;
  advance(prop, psi, dt, static_cast<int>(w.first_step));
  std::vector<WavePacket> x(w.nodes);
  for (int i = 0; i < w.nodes; ++i) {
    if (i > 0) advance(prop, psi, dt, w.stride);
    x[i] = mu.apply(psi);
  }
  auto node_time = [&](int i) { return (w.first_step + static_cast<long>(i) * w.stride) * dt; };
  // S = 2 Re sum_i w_i E(t_i - T) sum_{j <= i} c_j^(i) E*(tau_j - T) <x_i| U(t_i, tau_j) x_j>
  double sum = 0.0;
  for (int j = 0; j < w.nodes; ++j) {
    WavePacket y = x[j];
    for (int k = 0; k < kNumChannels; ++k) y[k] *= std::conj(pulse.field(node_time(j) - T));
    for (int i = j; i < w.nodes; ++i) {
      if (i > j) advance(prop, y, dt, w.stride);
      if (i == 0) continue;  // zero-length inner interval
      const double wi = (i == w.nodes - 1) ? 0.5 * h : h;
      const double cj = (j == 0 || j == i) ? 0.5 * h : h;
      const cplx overlap = inner(H.grid(), x[i], y);
      sum += wi * cj * (pulse.field(node_time(i) - T) * overlap).real();
    }
  }
  return 2.0 * sum;
}

PopulationTrace propagate_populations(const Propagator& prop, WavePacket& psi, double t_final,
                                      double dt, int sample_every) {
  if (!(dt > 0.0) || sample_every < 1) throw std::invalid_argument("bad sampling parameters");
  PopulationTrace trace;
  const Grid& grid = prop.hamiltonian().grid();
  constexpr double kFsPerAu = 0.02418884326509;
  trace.push(psi.time * kFsPerAu, populations(psi, grid), prop.absorbed());
  const long steps = std::lround((t_final - psi.time) / dt);
  for (long s = 1; s <= steps; ++s) {
    prop.step(psi, dt);
    if (s % sample_every == 0 || s == steps) {
      trace.push(psi.time * kFsPerAu, populations(psi, grid), prop.absorbed());
    }
  }
  return trace;
}

}  // namespace polariton
