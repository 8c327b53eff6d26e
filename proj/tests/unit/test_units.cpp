#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "polariton/units.hpp"

using namespace polariton::units;

namespace {

// CODATA 2014 base constants, independent of the engine table.
constexpr double kRydberg = 10973731.568508;    // 1/m
constexpr double kPlanck = 6.626070040e-34;     // J s
constexpr double kLight = 299792458.0;          // m/s
constexpr double kCharge = 1.6021766208e-19;    // C
constexpr double kAlpha = 7.2973525664e-3;

double hartree_ev() { return 2.0 * kRydberg * kPlanck * kLight / kCharge; }
double bohr_angstrom() { return kAlpha / (4.0 * std::numbers::pi * kRydberg) * 1e10; }
double au_time_fs() {
  const double hartree_j = 2.0 * kRydberg * kPlanck * kLight;
  return kPlanck / (2.0 * std::numbers::pi) / hartree_j * 1e15;
}

const Unit kAll[] = {Unit::hartree, Unit::eV,     Unit::meV, Unit::bohr,      Unit::angstrom,
                     Unit::au_time, Unit::fs,     Unit::ps,  Unit::au_dipole, Unit::au_mass};

}  // namespace

TEST(Units, IdentityConversion) { EXPECT_EQ(convert(1.0, Unit::eV, Unit::eV), 1.0); }

TEST(Units, ConstantsMatchIndependentTable) {
  EXPECT_NEAR(convert(1.0, Unit::hartree, Unit::eV) / hartree_ev(), 1.0, 1e-9);
  EXPECT_NEAR(kBohrInAngstrom / bohr_angstrom(), 1.0, 1e-9);
  EXPECT_NEAR(kAuTimeInFs / au_time_fs(), 1.0, 1e-9);
}

TEST(Units, HartreeInEv) { EXPECT_NEAR(convert(1.0, Unit::hartree, Unit::eV), 27.211386, 1e-6); }

TEST(Units, FemtosecondToAtomicTime) {
  EXPECT_NEAR(convert(0.02418884326509, Unit::fs, Unit::au_time), 1.0, 1e-12);
}

TEST(Units, ScaledUnits) {
  EXPECT_DOUBLE_EQ(convert(1000.0, Unit::meV, Unit::eV), 1.0);
  EXPECT_DOUBLE_EQ(convert(1.0, Unit::ps, Unit::fs), 1000.0);
  EXPECT_NEAR(angstrom_to_au(1.0), 1.0 / bohr_angstrom(), 1e-9);
}

TEST(Units, RoundTripAllPairs) {
  for (Unit a : kAll) {
    for (Unit b : kAll) {
      if (dimension_of(a) != dimension_of(b)) continue;
      for (double x : {1.0, -3.7, 1e-6, 42.5e3}) {
        const double back = convert(convert(x, a, b), b, a);
        EXPECT_NEAR(back, x, 1e-14 * std::abs(x)) << name_of(a) << " -> " << name_of(b);
      }
    }
  }
}

TEST(Units, Composition) {
  for (Unit a : kAll) {
    for (Unit b : kAll) {
      for (Unit c : kAll) {
        if (dimension_of(a) != dimension_of(b) || dimension_of(b) != dimension_of(c)) continue;
        const double x = 0.731;
        EXPECT_NEAR(convert(x, a, c), convert(convert(x, a, b), b, c),
                    1e-14 * std::abs(convert(x, a, c)));
      }
    }
  }
}

TEST(Units, IncompatibleDimensionsThrow) {
  EXPECT_THROW(convert(1.0, Unit::eV, Unit::fs), std::invalid_argument);
  EXPECT_THROW(convert(1.0, Unit::bohr, Unit::hartree), std::invalid_argument);
}

TEST(Units, ParseNames) {
  for (Unit u : kAll) EXPECT_EQ(parse_unit(name_of(u)), u);
  EXPECT_THROW(parse_unit("furlong"), std::invalid_argument);
}

TEST(Units, QuantityConversion) {
  const Quantity q = convert(Quantity{2.0, Unit::hartree}, Unit::eV);
  EXPECT_EQ(q.unit, Unit::eV);
  EXPECT_DOUBLE_EQ(q.value, 2.0 * kHartreeInEV);
}
