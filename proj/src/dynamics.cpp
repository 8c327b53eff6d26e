#include "polariton/dynamics.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

#include "polariton/errors.hpp"

namespace polariton {

WavePacket::WavePacket(int n) {
  for (auto& c : channels) c = CField::Zero(n);
}

cplx inner(const Grid& grid, const WavePacket& a, const WavePacket& b) {
  cplx s = 0.0;
  for (int k = 0; k < kNumChannels; ++k) s += a[k].dot(b[k]);
  return s * grid.spacing();
}

double norm2(const Grid& grid, const WavePacket& psi) {
  double s = 0.0;
  for (int k = 0; k < kNumChannels; ++k) s += psi[k].squaredNorm();
  return s * grid.spacing();
}

std::string to_string(CouplingMode mode) {
  return mode == CouplingMode::full ? "full" : "simplified";
}

CouplingMode parse_coupling_mode(const std::string& text) {
  if (text == "simplified") return CouplingMode::simplified;
  if (text == "full") return CouplingMode::full;
  throw std::invalid_argument("unknown coupling mode '" + text + "' (expected simplified or full)");
}

// ---------------------------------------------------------------------------

namespace {

bool any_nonzero(const Field& x) { return x.size() > 0 && (x.array() != 0.0).any(); }

void check_finite(const Field& x, const Field& q, const char* what) {
  for (int j = 0; j < x.size(); ++j) {
    if (!std::isfinite(x[j])) {
      std::ostringstream msg;
      msg << "singular " << what << " at propagation grid point q = " << q[j] << " bohr";
      throw RuntimeFailure(msg.str());
    }
  }
}

}  // namespace

HamiltonianAction::HamiltonianAction(SpectralOperators ops, const DressedSurfaces& ds,
                                     const CouplingFields& cf, CouplingMode mode)
    : ops_(std::move(ops)), mode_(mode) {
  const int n = ops_.grid().size();
  if (ds.size() != n) throw std::invalid_argument("dressed surfaces do not match the grid");
  const Field& q = ops_.grid().points();
  V_[kGround] = ds.V_g0.array() + ds.offset_g0;
  V_[kMinus] = ds.V_minus.array() + ds.offset_pm;
  V_[kPlus] = ds.V_plus.array() + ds.offset_pm;
  const double inv2m = 0.5 / ops_.grid().mass();
  for (int k = 0; k < kNumChannels; ++k) {
    check_finite(V_[k], q, "potential");
    for (int l = 0; l < kNumChannels; ++l) {
      if (k != l) {
        Field f = cf.f(k, l);
        if (f.size() == n && any_nonzero(f)) {
          check_finite(f, q, "derivative coupling");
          f_[k][l] = f * inv2m;
          has_f_[k][l] = true;
        }
      }
      if (mode_ == CouplingMode::full) {
        const Field& F = cf.F(k, l);
        if (F.size() == n && any_nonzero(F)) {
          check_finite(F, q, "scalar coupling");
          F_[k][l] = F * inv2m;
          has_F_[k][l] = true;
        }
      }
    }
  }
}

ChannelMask HamiltonianAction::closure(ChannelMask seed) const {
  bool grown = true;
  while (grown) {
    grown = false;
    for (int k = 0; k < kNumChannels; ++k) {
      if (seed[k]) continue;
      for (int l = 0; l < kNumChannels; ++l) {
        if (seed[l] && (has_f_[k][l] || has_F_[k][l])) {
          seed[k] = true;
          grown = true;
          break;
        }
      }
    }
  }
  return seed;
}

void HamiltonianAction::apply(const ChannelMask& active, const cplx* in, cplx* out) const {
  const int n = grid().size();
  std::array<int, kNumChannels> slot{};
  int na = 0;
  for (int k = 0; k < kNumChannels; ++k) slot[k] = active[k] ? na++ : -1;

  thread_local std::vector<cplx> deriv, tmp, dtmp;
  deriv.resize(static_cast<size_t>(na) * n);
  tmp.resize(n);
  dtmp.resize(n);

  for (int k = 0; k < kNumChannels; ++k) {
    if (slot[k] < 0) continue;
    const cplx* psi = in + slot[k] * n;
    cplx* o = out + slot[k] * n;
    ops_.kinetic_and_derivative(psi, o, deriv.data() + slot[k] * n);
    const Field& V = V_[k];
    for (int j = 0; j < n; ++j) o[j] += V[j] * psi[j];
  }
  for (int k = 0; k < kNumChannels; ++k) {
    if (slot[k] < 0) continue;
    cplx* o = out + slot[k] * n;
    for (int l = 0; l < kNumChannels; ++l) {
      if (slot[l] < 0) continue;
      const cplx* psi = in + slot[l] * n;
      if (has_f_[k][l]) {
        const Field& f = f_[k][l];
        const cplx* d = deriv.data() + slot[l] * n;
        for (int j = 0; j < n; ++j) tmp[j] = f[j] * psi[j];
        ops_.derivative(tmp.data(), dtmp.data());
        for (int j = 0; j < n; ++j) o[j] += f[j] * d[j] + dtmp[j];
      }
      if (has_F_[k][l]) {
        const Field& F = F_[k][l];
        for (int j = 0; j < n; ++j) o[j] += F[j] * psi[j];
      }
    }
  }
}

namespace {

ChannelMask occupied(const WavePacket& psi) {
  ChannelMask m{};
  for (int k = 0; k < kNumChannels; ++k) m[k] = (psi[k].array() != cplx(0.0)).any();
  return m;
}

int count(const ChannelMask& m) { return static_cast<int>(std::count(m.begin(), m.end(), true)); }

void pack(const WavePacket& psi, const ChannelMask& m, std::vector<cplx>& buf) {
  const int n = psi.size();
  buf.resize(static_cast<size_t>(count(m)) * n);
  int s = 0;
  for (int k = 0; k < kNumChannels; ++k) {
    if (!m[k]) continue;
    std::copy(psi[k].data(), psi[k].data() + n, buf.data() + s * n);
    ++s;
  }
}

void unpack(const std::vector<cplx>& buf, const ChannelMask& m, WavePacket& psi) {
  const int n = psi.size();
  int s = 0;
  for (int k = 0; k < kNumChannels; ++k) {
    if (!m[k]) continue;
    std::copy(buf.data() + s * n, buf.data() + (s + 1) * n, psi[k].data());
    ++s;
  }
}

}  // namespace

WavePacket HamiltonianAction::apply(const WavePacket& psi) const {
  const ChannelMask m = closure(occupied(psi));
  WavePacket out(psi.size());
  out.time = psi.time;
  std::vector<cplx> in_buf, out_buf;
  pack(psi, m, in_buf);
  out_buf.resize(in_buf.size());
  if (!in_buf.empty()) apply(m, in_buf.data(), out_buf.data());
  unpack(out_buf, m, out);
  return out;
}

double HamiltonianAction::energy(const WavePacket& psi) const {
  const WavePacket h = apply(psi);
  return inner(grid(), psi, h).real() / norm2(grid(), psi);
}

// ---------------------------------------------------------------------------

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

/// exp(factor * Hm) e1 for the m x m leading block.
VectorXcd small_exp(const MatrixXcd& Hm, cplx factor, bool hermitian) {
  const int m = static_cast<int>(Hm.rows());
  if (hermitian) {
    const MatrixXcd Hs = 0.5 * (Hm + Hm.adjoint());
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(Hs);
    const MatrixXcd& Z = es.eigenvectors();
    VectorXcd c(m);
    for (int i = 0; i < m; ++i) c[i] = std::exp(factor * es.eigenvalues()[i]) * std::conj(Z(0, i));
    return Z * c;
  }
  const MatrixXcd E = (factor * Hm).exp();
  return E.col(0);
}

const gsl_integration_glfixed_table* gauss_legendre_table() {
  static const gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(8);
  return t;
}

}  // namespace

StepInfo krylov_exp(const std::function<void(const cplx*, cplx*)>& apply, int len, cplx* psi,
                    cplx factor, bool hermitian, const KrylovOptions& opt, double flux_dt,
                    double weight) {
  StepInfo info;
  Eigen::Map<VectorXcd> v0(psi, len);
  const double beta = v0.norm();
  if (beta == 0.0) return info;
  const int max_dim = opt.max_dim;

  thread_local MatrixXcd V;
  if (V.rows() != len || V.cols() < max_dim + 1) V.resize(len, max_dim + 1);
  MatrixXcd H = MatrixXcd::Zero(max_dim + 1, max_dim);
  V.col(0) = v0 / beta;
  thread_local VectorXcd w;
  w.resize(len);

  double scale = 0.0;
  for (int j = 0; j < max_dim; ++j) {
    apply(V.col(j).data(), w.data());
    const double wnorm = w.norm();
    for (int i = 0; i <= j; ++i) {
      const cplx h = V.col(i).dot(w);
      H(i, j) = h;
      w.noalias() -= h * V.col(i);
    }
    double hnext = w.norm();
    if (hnext < 0.7 * wnorm) {
      // Second Gram-Schmidt pass once cancellation has eaten most of the vector.
      for (int i = 0; i <= j; ++i) {
        const cplx h = V.col(i).dot(w);
        H(i, j) += h;
        w.noalias() -= h * V.col(i);
      }
      hnext = w.norm();
    }
    scale = std::max(scale, H.col(j).head(j + 1).cwiseAbs().maxCoeff());
    const int m = j + 1;
    const bool breakdown = hnext <= 1e-14 * std::max(scale, 1e-300);
    // Near an invariant subspace the next basis vector would be rounding noise, so test early.
    const bool small = hnext <= opt.tol * std::max(scale, 1e-300);
    if (m >= opt.min_dim || breakdown || small || m == max_dim) {
      const MatrixXcd Hm = H.topLeftCorner(m, m);
      const VectorXcd c = small_exp(Hm, factor, hermitian);
      const double err = breakdown ? 0.0 : hnext * std::abs(c[m - 1]);
      if (breakdown || err <= opt.tol) {
        info.krylov_dim = m;
        info.error_estimate = err * beta;
        if (flux_dt > 0.0 && !hermitian) {
          const auto* gl = gauss_legendre_table();
          double absorbed = 0.0;
          for (size_t i = 0; i < gl->n; ++i) {
            double s, wi;
            gsl_integration_glfixed_point(0.0, flux_dt, i, &s, &wi, gl);
            const VectorXcd cs = beta * small_exp(Hm, factor * (s / flux_dt), false);
            absorbed += wi * (-2.0) * cs.dot(Hm * cs).imag();
          }
          info.absorbed = absorbed * weight;
        }
        v0 = beta * (V.leftCols(m) * c);
        return info;
      }
    }
    H(j + 1, j) = hnext;
    V.col(j + 1) = w / hnext;
  }
  throw RuntimeFailure("Krylov subspace reached dimension " + std::to_string(max_dim) +
                       " without converging; use a smaller time step");
}

Propagator::Propagator(const HamiltonianAction& H, KrylovOptions opt) : H_(H), opt_(opt) {}

StepInfo Propagator::step(WavePacket& psi, double dt) const {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  const ChannelMask m = H_.closure(occupied(psi));
  thread_local std::vector<cplx> buf;
  pack(psi, m, buf);
  StepInfo info;
  if (!buf.empty()) {
    const bool herm = H_.hermitian();
    info = krylov_exp([&](const cplx* in, cplx* out) { H_.apply(m, in, out); },
                      static_cast<int>(buf.size()), buf.data(), cplx(0.0, -dt), herm, opt_,
                      herm ? 0.0 : dt, H_.grid().spacing());
    unpack(buf, m, psi);
  }
  psi.time += dt;
  absorbed_ += info.absorbed;
  max_dim_seen_ = std::max(max_dim_seen_, info.krylov_dim);
  return info;
}

WavePacket propagate_step(const HamiltonianAction& H, const WavePacket& psi, double dt,
                          double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("Krylov tolerance must be positive");
  KrylovOptions opt;
  opt.tol = tol;
  Propagator p(H, opt);
  WavePacket out = psi;
  p.step(out, dt);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

GroundState fourier_grid(const Field& V, const Grid& grid) {
  const int n = grid.size();
  const Field& k = grid.wavenumbers();
  const double dq = grid.spacing();
  const double inv2m = 0.5 / grid.mass();
  // T_ij depends on (i - j) only: t_d = 1/n sum_k k^2/2m cos(k d dq).
  std::vector<double> t(n);
  for (int d = 0; d < n; ++d) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += k[i] * k[i] * std::cos(k[i] * d * dq);
    t[d] = s * inv2m / n;
  }
  Eigen::MatrixXd A(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) A(i, j) = t[std::abs(i - j)];
    A(j, j) += V[j];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success) throw RuntimeFailure("Fourier-grid diagonalisation failed");
  GroundState gs;
  gs.chi = es.eigenvectors().col(0) / std::sqrt(dq);
  Eigen::Index jmax;
  gs.chi.cwiseAbs().maxCoeff(&jmax);
  if (gs.chi[jmax] < 0.0) gs.chi = -gs.chi;
  gs.energy = es.eigenvalues()[0];
  return gs;
}

GroundState imaginary_time(const Field& V, const Grid& grid) {
  const int n = grid.size();
  const double dq = grid.spacing();
  const double m = grid.mass();
  const Field& q = grid.points();
  const SpectralOperators ops(grid);
  auto apply = [&](const cplx* in, cplx* out) {
    ops.kinetic(in, out);
    for (int j = 0; j < n; ++j) out[j] += V[j] * in[j];
  };
  // Harmonic guess around the potential minimum.
  Eigen::Index j0;
  V.minCoeff(&j0);
  const int jc = std::clamp<int>(static_cast<int>(j0), 1, n - 2);
  const double curv = std::max((V[jc + 1] - 2.0 * V[jc] + V[jc - 1]) / (dq * dq), 1e-8);
  const double omega = std::sqrt(curv / m);
  CField psi(n);
  for (int j = 0; j < n; ++j) psi[j] = std::exp(-0.5 * m * omega * std::pow(q[j] - q[jc], 2));
  psi /= std::sqrt(psi.squaredNorm() * dq);

  KrylovOptions opt;
  opt.tol = 1e-12;
  const double dtau = 10.0;
  CField hpsi(n);
  auto energy = [&] {
    apply(psi.data(), hpsi.data());
    return psi.dot(hpsi).real() / psi.squaredNorm();
  };
  double e_old = energy();
  int quiet = 0;
  for (int it = 0; it < 200000 && quiet < 5; ++it) {
    krylov_exp(apply, n, psi.data(), cplx(-dtau, 0.0), true, opt);
    psi /= std::sqrt(psi.squaredNorm() * dq);
    const double e = energy();
    quiet = std::abs(e - e_old) <= 1e-15 * std::max(1.0, std::abs(e)) ? quiet + 1 : 0;
    e_old = e;
  }
  GroundState gs;
  gs.chi = psi.real();
  Eigen::Index jmax;
  gs.chi.cwiseAbs().maxCoeff(&jmax);
  if (gs.chi[jmax] < 0.0) gs.chi = -gs.chi;
  gs.chi /= std::sqrt(gs.chi.squaredNorm() * dq);
  gs.energy = e_old;
  return gs;
}

}  // namespace

GroundState ground_state(const Field& V, const Grid& grid, GroundStateMethod method) {
  if (V.size() != grid.size()) throw std::invalid_argument("potential does not match the grid");
  if (!V.allFinite()) throw std::invalid_argument("potential must be finite");
  return method == GroundStateMethod::fourier_grid ? fourier_grid(V, grid)
                                                   : imaginary_time(V, grid);
}

GroundState relax_ground_state(const Field& V, const Grid& grid, double rel_tol) {
  GroundState a = ground_state(V, grid, GroundStateMethod::fourier_grid);
  const GroundState b = ground_state(V, grid, GroundStateMethod::imaginary_time);
  const double rel = std::abs(a.energy - b.energy) / std::max(std::abs(a.energy), 1e-300);
  if (rel > rel_tol) {
    std::ostringstream msg;
    msg << std::setprecision(12) << "ground-state methods disagree: Fourier grid " << a.energy
        << ", imaginary time " << b.energy << " hartree";
    throw RuntimeFailure(msg.str());
  }
  return a;
}

Doorway prepare_doorway(const Field& chi0, const Grid& grid, const DressedSurfaces& ds,
                        std::optional<double> mu0) {
  const int n = grid.size();
  if (chi0.size() != n || ds.size() != n) throw std::invalid_argument("size mismatch");
  Field mu = mu0 ? Field::Constant(n, *mu0) : ds.mu_eg;
  Doorway d;
  d.psi = WavePacket(n);
  d.psi[kPlus] = (ds.cos_theta.cwiseProduct(mu).cwiseProduct(chi0)).cast<cplx>();
  d.psi[kMinus] = (-ds.sin_theta.cwiseProduct(mu).cwiseProduct(chi0)).cast<cplx>();
  d.weight_plus = d.psi[kPlus].squaredNorm() * grid.spacing();
  d.weight_minus = d.psi[kMinus].squaredNorm() * grid.spacing();
  const double total = d.weight_plus + d.weight_minus;
  if (!(total > 0.0)) throw RuntimeFailure("doorway state has zero weight");
  const double s = 1.0 / std::sqrt(total);
  d.psi[kPlus] *= s;
  d.psi[kMinus] *= s;
  return d;
}

// ---------------------------------------------------------------------------

void write_checkpoint(const std::filesystem::path& path, const WavePacket& psi, const Grid& grid,
                      const std::string& scenario_hash) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write checkpoint " + path.string());
  const auto& s = grid.spec();
  out << std::setprecision(17);
  out << "# time = " << psi.time << "\n";
  out << "# q_min = " << s.q_min << "\n";
  out << "# q_max = " << s.q_max << "\n";
  out << "# n_points = " << s.n_points << "\n";
  out << "# mass = " << s.mass << "\n";
  out << "# stagger = " << (s.stagger ? 1 : 0) << "\n";
  out << "# scenario_hash = " << scenario_hash << "\n";
  out << "# q Re_g0 Im_g0 Re_minus Im_minus Re_plus Im_plus\n";
  const Field& q = grid.points();
  for (int j = 0; j < grid.size(); ++j) {
    out << q[j];
    for (int k = 0; k < kNumChannels; ++k) out << ' ' << psi[k][j].real() << ' ' << psi[k][j].imag();
    out << '\n';
  }
  if (!out) throw RuntimeFailure("error writing checkpoint " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw RuntimeFailure("cannot open checkpoint " + path.string());
  const std::string file = path.string();
  std::map<std::string, std::string> header;
  std::vector<std::array<double, 7>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto trim = [](std::string s) {
        s.erase(0, s.find_first_not_of(" \t#"));
        s.erase(s.find_last_not_of(" \t") + 1);
        return s;
      };
      header[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
      continue;
    }
    std::istringstream ss(line);
    std::array<double, 7> r{};
    for (double& x : r) {
      if (!(ss >> x)) throw ParseError(file, lineno, "expected 7 numeric columns");
    }
    std::string extra;
    if (ss >> extra) throw ParseError(file, lineno, "expected 7 numeric columns");
    rows.push_back(r);
  }
  for (const char* key : {"time", "q_min", "q_max", "n_points", "mass"}) {
    if (!header.count(key)) throw ParseError(file, 1, std::string("missing header key ") + key);
  }
  Checkpoint c;
  c.grid.q_min = std::stod(header["q_min"]);
  c.grid.q_max = std::stod(header["q_max"]);
  c.grid.n_points = std::stoi(header["n_points"]);
  c.grid.mass = std::stod(header["mass"]);
  c.grid.stagger = header.count("stagger") && header["stagger"] == "1";
  c.scenario_hash = header.count("scenario_hash") ? header["scenario_hash"] : "";
  if (static_cast<int>(rows.size()) != c.grid.n_points) {
    throw ParseError(file, lineno, "row count does not match n_points");
  }
  c.psi = WavePacket(c.grid.n_points);
  c.psi.time = std::stod(header["time"]);
  for (int j = 0; j < c.grid.n_points; ++j) {
    for (int k = 0; k < kNumChannels; ++k) {
      c.psi[k][j] = cplx(rows[j][1 + 2 * k], rows[j][2 + 2 * k]);
    }
  }
  return c;
}

}  // namespace polariton
