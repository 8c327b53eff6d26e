#include "polariton/surfaces.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_spline.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

#include "polariton/errors.hpp"
#include "polariton/units.hpp"

namespace polariton {

MorseParams MorseParams::from_ev_angstrom(double D_ev, double a_per_angstrom, double q0_angstrom,
                                          double V0_ev) {
  return {units::ev_to_au(D_ev), units::per_angstrom_to_au(a_per_angstrom),
          units::angstrom_to_au(q0_angstrom), units::ev_to_au(V0_ev)};
}

SigmoidDipoleParams SigmoidDipoleParams::from_angstrom(double amplitude,
                                                       double steepness_per_angstrom,
                                                       double center_angstrom) {
  return {amplitude, units::per_angstrom_to_au(steepness_per_angstrom),
          units::angstrom_to_au(center_angstrom)};
}

double eval_morse(const MorseParams& p, double q) {
  const double x = 1.0 - std::exp(-p.a * (q - p.q0));
  return p.D * x * x + p.V0;
}

double eval_morse_derivative(const MorseParams& p, double q) {
  const double e = std::exp(-p.a * (q - p.q0));
  return 2.0 * p.D * p.a * (1.0 - e) * e;
}

double eval_sigmoid_dipole(const SigmoidDipoleParams& p, double q) {
  return p.amplitude / (1.0 + std::exp(p.steepness * (q - p.center)));
}

int morse_bound_state_count(const MorseParams& p, double mass) {
  const double omega = p.a * std::sqrt(2.0 * p.D / mass);
  // E_n increases while omega (n + 1/2) < 2D.
  return static_cast<int>(std::ceil(2.0 * p.D / omega - 0.5));
}

double morse_eigenvalue(const MorseParams& p, double mass, int n) {
  if (n < 0 || n >= morse_bound_state_count(p, mass)) {
    throw std::out_of_range("Morse level " + std::to_string(n) + " is not bound");
  }
  const double omega = p.a * std::sqrt(2.0 * p.D / mass);
  const double x = omega * (n + 0.5);
  return x - x * x / (4.0 * p.D) + p.V0;
}

// ---------------------------------------------------------------------------
// Curves

namespace {

class ConstantCurve final : public Curve::Impl {
 public:
  explicit ConstantCurve(double v) : v_(v) {}
  double operator()(double) const override { return v_; }

 private:
  double v_;
};

class MorseCurve final : public Curve::Impl {
 public:
  explicit MorseCurve(const MorseParams& p) : p_(p) {}
  double operator()(double q) const override { return eval_morse(p_, q); }

 private:
  MorseParams p_;
};

class SigmoidCurve final : public Curve::Impl {
 public:
  explicit SigmoidCurve(const SigmoidDipoleParams& p) : p_(p) {}
  double operator()(double q) const override { return eval_sigmoid_dipole(p_, q); }

 private:
  SigmoidDipoleParams p_;
};

struct SplineDeleter {
  void operator()(gsl_spline* s) const { gsl_spline_free(s); }
};

class SplineCurve final : public Curve::Impl {
 public:
  SplineCurve(std::vector<double> q, std::vector<double> v) : q_(std::move(q)), v_(std::move(v)) {
    gsl_set_error_handler_off();
    spline_.reset(gsl_spline_alloc(gsl_interp_cspline, q_.size()));
    gsl_spline_init(spline_.get(), q_.data(), v_.data(), q_.size());
  }

  double operator()(double q) const override {
    if (q < q_.front() || q > q_.back()) {
      throw std::out_of_range("tabulated curve evaluated outside its table range");
    }
    // A null accelerator keeps evaluation free of shared mutable state.
    return gsl_spline_eval(spline_.get(), q, nullptr);
  }

  std::optional<std::pair<double, double>> domain() const override {
    return std::make_pair(q_.front(), q_.back());
  }

 private:
  std::vector<double> q_;
  std::vector<double> v_;
  std::unique_ptr<gsl_spline, SplineDeleter> spline_;
};

}  // namespace

Curve::Curve() : impl_(std::make_shared<ConstantCurve>(0.0)), is_zero_(true) {}

Curve Curve::constant(double value) {
  Curve c(std::make_shared<ConstantCurve>(value));
  c.is_zero_ = (value == 0.0);
  return c;
}

Curve Curve::morse(const MorseParams& p) { return Curve(std::make_shared<MorseCurve>(p)); }

Curve Curve::sigmoid(const SigmoidDipoleParams& p) {
  return Curve(std::make_shared<SigmoidCurve>(p));
}

Curve Curve::tabulated(std::vector<double> q, std::vector<double> v) {
  if (q.size() != v.size()) throw std::invalid_argument("tabulated curve: size mismatch");
  if (q.size() < 3) throw std::invalid_argument("tabulated curve needs at least 3 points");
  for (std::size_t i = 1; i < q.size(); ++i) {
    if (!(q[i] > q[i - 1])) {
      throw std::invalid_argument("tabulated curve: grid must be strictly increasing");
    }
  }
  const bool zero = std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
  Curve c(std::make_shared<SplineCurve>(std::move(q), std::move(v)));
  c.is_zero_ = zero;
  return c;
}

std::optional<std::pair<double, double>> BareSystem::domain() const {
  std::optional<std::pair<double, double>> out;
  for (const Curve* c : {&Vg, &Ve, &mu_eg, &mu_gg, &mu_ee, &f_ge}) {
    if (auto d = c->domain()) {
      if (!out) {
        out = d;
      } else {
        out->first = std::max(out->first, d->first);
        out->second = std::min(out->second, d->second);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Built-in models

namespace models {

MorseParams s0() { return MorseParams::from_ev_angstrom(3.0, 1.0, 2.0, 0.0); }
MorseParams s1() { return MorseParams::from_ev_angstrom(0.01, 2.43, 2.5, 3.0); }
MorseParams s2() { return MorseParams::from_ev_angstrom(3.0, 1.0, 2.3, 4.5); }
SigmoidDipoleParams transition_dipole() {
  return SigmoidDipoleParams::from_angstrom(4.0, 2.4575, 4.232);
}

BareSystem photonic_catalyst() {
  BareSystem sys;
  sys.Vg = Curve::morse(s1());
  sys.Ve = Curve::morse(s2());
  sys.mu_eg = Curve::sigmoid(transition_dipole());
  sys.mass = kReducedMass;
  return sys;
}

BareSystem photonic_bound() {
  BareSystem sys;
  sys.Vg = Curve::morse(s0());
  sys.Ve = Curve::morse(s1());
  sys.mu_eg = Curve::sigmoid(transition_dipole());
  sys.mass = kReducedMass;
  return sys;
}

}  // namespace models

// ---------------------------------------------------------------------------
// Two-mode CoIn model

TwoModeCoInModel TwoModeCoInModel::defaults() {
  TwoModeCoInModel m;
  m.delta_e = units::ev_to_au(3.5);
  m.k_g = units::ev_to_au(0.5);
  m.k_e = units::ev_to_au(0.5);
  m.alpha = units::ev_to_au(0.25);
  m.beta = units::ev_to_au(0.5);
  m.c1 = 1.0;
  m.c2 = 0.5;
  return m;
}

double TwoModeCoInModel::Vg(double q1, double q2) const {
  return 0.5 * k_g * (q1 * q1 + q2 * q2);
}

double TwoModeCoInModel::Ve(double q1, double q2) const {
  const double q1sq = q1 * q1;
  return delta_e + alpha * q1sq * q1sq - beta * q1sq + 0.5 * k_e * q2 * q2;
}

double TwoModeCoInModel::mu(double q1, double q2) const { return c1 * q1 + c2 * q2; }

namespace {

class CutCurve final : public Curve::Impl {
 public:
  enum class Which { Vg, Ve, mu };
  CutCurve(TwoModeCoInModel m, double q2, Which w) : m_(m), q2_(q2), which_(w) {}
  double operator()(double q1) const override {
    switch (which_) {
      case Which::Vg: return m_.Vg(q1, q2_);
      case Which::Ve: return m_.Ve(q1, q2_);
      case Which::mu: return m_.mu(q1, q2_);
    }
    return 0.0;
  }

 private:
  TwoModeCoInModel m_;
  double q2_;
  Which which_;
};

}  // namespace

BareSystem TwoModeCoInModel::cut_q1(double q2) const {
  BareSystem sys;
  sys.Vg = Curve(std::make_shared<CutCurve>(*this, q2, CutCurve::Which::Vg));
  sys.Ve = Curve(std::make_shared<CutCurve>(*this, q2, CutCurve::Which::Ve));
  sys.mu_eg = Curve(std::make_shared<CutCurve>(*this, q2, CutCurve::Which::mu));
  sys.mass = 1.0;
  return sys;
}

// ---------------------------------------------------------------------------
// Tabulated files

namespace {

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string tok; is >> tok;) out.push_back(tok);
  return out;
}

const std::vector<std::string> kKnownColumns = {"q", "Vg", "Ve", "mu_eg", "mu_gg", "mu_ee", "f_ge"};

}  // namespace

BareSystem load_tabulated(const std::filesystem::path& path, double mass) {
  const std::string file = path.string();
  std::ifstream in(path);
  if (!in) throw ParseError(file, 0, "cannot open file");

  std::vector<std::string> columns;
  units::Unit length = units::Unit::angstrom;
  units::Unit energy = units::Unit::eV;
  std::map<std::string, std::vector<double>> data;

  int lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens[0][0] == '#') {
      // "#" may be glued to the first word or stand alone.
      if (tokens[0] == "#") {
        tokens.erase(tokens.begin());
      } else {
        tokens[0] = tokens[0].substr(1);
      }
      if (tokens.empty()) continue;
      if (tokens[0] == "units:") {
        if (tokens.size() < 3) throw ParseError(file, lineno, "units line needs length and energy");
        try {
          length = units::parse_unit(tokens[1]);
          energy = units::parse_unit(tokens[2]);
        } catch (const std::invalid_argument& e) {
          throw ParseError(file, lineno, e.what());
        }
        if (units::dimension_of(length) != units::Dimension::length ||
            units::dimension_of(energy) != units::Dimension::energy) {
          throw ParseError(file, lineno, "units line must list a length then an energy unit");
        }
      } else if (columns.empty() && tokens[0] == "q") {
        for (const auto& t : tokens) {
          if (std::find(kKnownColumns.begin(), kKnownColumns.end(), t) == kKnownColumns.end()) {
            throw ParseError(file, lineno, "unknown column '" + t + "'");
          }
          if (std::find(columns.begin(), columns.end(), t) != columns.end()) {
            throw ParseError(file, lineno, "duplicate column '" + t + "'");
          }
          columns.push_back(t);
        }
        for (const char* req : {"Vg", "Ve"}) {
          if (std::find(columns.begin(), columns.end(), req) == columns.end()) {
            throw ParseError(file, lineno, std::string("missing required column '") + req + "'");
          }
        }
      }
      continue;
    }
    if (columns.empty()) throw ParseError(file, lineno, "data before the '# q Vg Ve ...' header");
    if (tokens.size() != columns.size()) {
      throw ParseError(file, lineno,
                       "expected " + std::to_string(columns.size()) + " columns, found " +
                           std::to_string(tokens.size()));
    }
    for (std::size_t c = 0; c < columns.size(); ++c) {
      double v = 0.0;
      std::size_t used = 0;
      try {
        v = std::stod(tokens[c], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tokens[c].size() || !std::isfinite(v)) {
        throw ParseError(file, lineno, "non-numeric field '" + tokens[c] + "' in column " +
                                           columns[c]);
      }
      auto& col = data[columns[c]];
      if (columns[c] == "q" && !col.empty() && !(v > col.back())) {
        throw ParseError(file, lineno, "grid column must be strictly increasing");
      }
      col.push_back(v);
    }
  }
  if (columns.empty()) throw ParseError(file, lineno, "missing '# q Vg Ve ...' header");
  if (data["q"].size() < 3) throw ParseError(file, lineno, "need at least 3 data rows");

  std::vector<double> q = data["q"];
  for (double& x : q) x = units::convert(x, length, units::Unit::bohr);
  auto energy_col = [&](const std::string& name) {
    std::vector<double> v = data[name];
    for (double& x : v) x = units::convert(x, energy, units::Unit::hartree);
    return Curve::tabulated(q, std::move(v));
  };
  auto plain_col = [&](const std::string& name, double scale) {
    if (!data.count(name)) return Curve();
    std::vector<double> v = data[name];
    for (double& x : v) x *= scale;
    return Curve::tabulated(q, std::move(v));
  };

  BareSystem sys;
  sys.Vg = energy_col("Vg");
  sys.Ve = energy_col("Ve");
  sys.mu_eg = plain_col("mu_eg", 1.0);
  sys.mu_gg = plain_col("mu_gg", 1.0);
  sys.mu_ee = plain_col("mu_ee", 1.0);
  // f_ge is an inverse length in the file's length unit.
  sys.f_ge = plain_col("f_ge", units::convert(1.0, units::Unit::bohr, length));
  sys.mass = mass;
  return sys;
}

void write_tabulated(const std::filesystem::path& path, const BareSystem& system,
                     const std::vector<double>& q_points) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# q Vg Ve mu_eg mu_gg mu_ee f_ge\n# units: angstrom eV au\n";
  out << std::setprecision(17);
  const double per_angstrom = units::convert(1.0, units::Unit::angstrom, units::Unit::bohr);
  for (double q : q_points) {
    out << units::au_to_angstrom(q) << ' ' << units::au_to_ev(system.Vg(q)) << ' '
        << units::au_to_ev(system.Ve(q)) << ' ' << system.mu_eg(q) << ' ' << system.mu_gg(q) << ' '
        << system.mu_ee(q) << ' ' << system.f_ge(q) * per_angstrom << '\n';
  }
}

}  // namespace polariton
