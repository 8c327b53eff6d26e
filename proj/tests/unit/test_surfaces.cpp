#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "polariton/errors.hpp"
#include "polariton/surfaces.hpp"
#include "polariton/units.hpp"

using namespace polariton;
using namespace polariton::units;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / ("polariton_test_" + name);
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST(Morse, S0MinimumIsZero) {
  EXPECT_NEAR(au_to_ev(eval_morse(models::s0(), angstrom_to_au(2.0))), 0.0, 1e-15);
}

TEST(Morse, Asymptote) {
  for (const auto& p : {models::s0(), models::s1(), models::s2()}) {
    EXPECT_NEAR(eval_morse(p, 200.0), p.D + p.V0, 1e-12);
  }
}

TEST(Morse, S1HandValue) {
  // 3 + 0.01 (1 - exp(2.43 * 0.2))^2
  EXPECT_NEAR(au_to_ev(eval_morse(models::s1(), angstrom_to_au(2.3))), 3.0039162564, 1e-9);
}

TEST(Morse, MinimumAtQ0) {
  for (const auto& p : {models::s0(), models::s1(), models::s2()}) {
    EXPECT_NEAR(eval_morse(p, p.q0), p.V0, 1e-15);
    for (double q = 0.5; q < 30.0; q += 0.013) EXPECT_GE(eval_morse(p, q), p.V0 - 1e-12);
  }
}

TEST(Morse, DerivativeMatchesDifference) {
  const auto p = models::s2();
  for (double q : {3.0, 4.4, 6.0}) {
    const double h = 1e-5;
    const double fd = (eval_morse(p, q + h) - eval_morse(p, q - h)) / (2 * h);
    EXPECT_NEAR(eval_morse_derivative(p, q), fd, 1e-9);
  }
}

TEST(Sigmoid, Values) {
  const auto p = models::transition_dipole();
  EXPECT_NEAR(eval_sigmoid_dipole(p, angstrom_to_au(4.232)), 2.0, 1e-14);
  EXPECT_NEAR(eval_sigmoid_dipole(p, -100.0), 4.0, 1e-12);
  EXPECT_NEAR(eval_sigmoid_dipole(p, angstrom_to_au(2.0)), 3.9834767205, 1e-9);
}

TEST(Sigmoid, StrictlyDecreasing) {
  const auto p = models::transition_dipole();
  double prev = eval_sigmoid_dipole(p, 0.0);
  for (double q = 0.05; q < 20.0; q += 0.05) {
    const double v = eval_sigmoid_dipole(p, q);
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(MorseLevels, HarmonicLimit) {
  // E1 - E0 = omega (1 - omega / 2D), which tends to omega for a deep well.
  const double mass = 2.0;
  for (double D : {1e2, 1e4, 1e6}) {
    const MorseParams p{D, 1.0, 2.0, 0.0};
    const double omega = p.a * std::sqrt(2.0 * p.D / mass);
    const double ratio = (morse_eigenvalue(p, mass, 1) - morse_eigenvalue(p, mass, 0)) / omega;
    EXPECT_NEAR(ratio, 1.0 - omega / (2.0 * D), 1e-12);
  }
}

TEST(MorseLevels, IncreasingAndBounded) {
  const auto p = models::s0();
  const int n = morse_bound_state_count(p, models::kReducedMass);
  ASSERT_GT(n, 10);
  for (int k = 1; k < n; ++k) {
    EXPECT_GT(morse_eigenvalue(p, models::kReducedMass, k),
              morse_eigenvalue(p, models::kReducedMass, k - 1));
  }
  EXPECT_LT(morse_eigenvalue(p, models::kReducedMass, n - 1), p.D + p.V0);
  EXPECT_THROW(morse_eigenvalue(p, models::kReducedMass, n), std::out_of_range);
}

TEST(MorseLevels, ClosedForm) {
  const auto p = models::s0();
  const double w = p.a * std::sqrt(2.0 * p.D / 3650.0);
  const double x = w * 0.5;
  EXPECT_NEAR(morse_eigenvalue(p, 3650.0, 0), x - x * x / (4.0 * p.D), 1e-15);
}

TEST(CoInModel, Symmetry) {
  const auto m = TwoModeCoInModel::defaults();
  EXPECT_EQ(m.mu(0.0, 0.0), 0.0);
  for (double a : {0.3, 1.1}) {
    for (double b : {0.2, 0.9}) {
      EXPECT_DOUBLE_EQ(m.Vg(a, b), m.Vg(-a, b));
      EXPECT_DOUBLE_EQ(m.Ve(a, b), m.Ve(-a, -b));
      EXPECT_DOUBLE_EQ(m.mu(a, b), -m.mu(-a, -b));
    }
  }
  const BareSystem cut = m.cut_q1(0.0);
  EXPECT_DOUBLE_EQ(cut.Ve(0.4) - cut.Vg(0.4), m.Ve(0.4, 0.0) - m.Vg(0.4, 0.0));
}

TEST(Tabulated, ThreeColumnsDefaultDipoleZero) {
  const auto p = temp_file("three.dat",
                           "# q Vg Ve\n# units: angstrom eV au\n1.0 0.0 3.0\n1.5 0.1 3.1\n"
                           "2.0 0.3 3.0\n2.5 0.5 2.9\n");
  const BareSystem s = load_tabulated(p, 1000.0);
  EXPECT_EQ(s.mu_eg(angstrom_to_au(1.7)), 0.0);
  EXPECT_EQ(s.f_ge(angstrom_to_au(1.7)), 0.0);
  EXPECT_NEAR(au_to_ev(s.Ve(angstrom_to_au(2.0))), 3.0, 1e-12);
  EXPECT_THROW(s.Vg(angstrom_to_au(3.0)), std::out_of_range);
  EXPECT_EQ(s.mass, 1000.0);
}

TEST(Tabulated, DuplicateGridIsError) {
  const auto p = temp_file("dup.dat", "# q Vg Ve\n1.0 0 1\n1.5 0 1\n1.5 0 1\n2.0 0 1\n");
  try {
    load_tabulated(p, 1.0);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4);
  }
}

TEST(Tabulated, MalformedInputs) {
  EXPECT_THROW(load_tabulated(temp_file("nonnum.dat", "# q Vg Ve\n1 0 1\n2 x 1\n3 0 1\n"), 1.0),
               ParseError);
  EXPECT_THROW(load_tabulated(temp_file("missing.dat", "# q Vg\n1 0\n2 0\n3 0\n"), 1.0),
               ParseError);
  EXPECT_THROW(load_tabulated(temp_file("short.dat", "# q Vg Ve\n1 0 1\n2 0\n3 0 1\n"), 1.0),
               ParseError);
  EXPECT_THROW(load_tabulated(fs::temp_directory_path() / "polariton_no_such_file", 1.0),
               ParseError);
}

TEST(Tabulated, RoundTripAnalyticSystem) {
  const BareSystem ref = models::photonic_catalyst();
  std::vector<double> q;
  for (int i = 0; i <= 800; ++i) q.push_back(angstrom_to_au(1.0 + 11.0 * i / 800.0));
  const auto p = fs::temp_directory_path() / "polariton_test_roundtrip.dat";
  write_tabulated(p, ref, q);
  const BareSystem s = load_tabulated(p, 3650.0);
  // 10x finer than the table, away from the clamped ends.
  const double scale_e = ev_to_au(3.0);
  for (int i = 0; i <= 8000; ++i) {
    const double x = angstrom_to_au(1.2 + 10.6 * i / 8000.0);
    EXPECT_NEAR(s.Vg(x), ref.Vg(x), 1e-6 * scale_e);
    EXPECT_NEAR(s.Ve(x), ref.Ve(x), 1e-6 * scale_e);
    EXPECT_NEAR(s.mu_eg(x), ref.mu_eg(x), 1e-6 * 4.0);
  }
}
