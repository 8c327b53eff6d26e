#pragma once

#include <string>
#include <string_view>

namespace polariton::units {

// CODATA 2014. Every conversion in the engine goes through this table.
inline constexpr double kHartreeInEV = 27.21138602;
inline constexpr double kBohrInAngstrom = 0.52917721067;
inline constexpr double kAuTimeInFs = 0.02418884326509;

enum class Unit { hartree, eV, meV, bohr, angstrom, au_time, fs, ps, au_dipole, au_mass };
enum class Dimension { energy, length, time, dipole, mass };

struct Quantity {
  double value;
  Unit unit;
};

Dimension dimension_of(Unit u);
std::string_view name_of(Unit u);
/// Parses the names used in config and table headers ("eV", "angstrom", "au", ...).
Unit parse_unit(std::string_view name);

/// Converts between units of the same dimension; throws std::invalid_argument otherwise.
double convert(double value, Unit from, Unit to);
Quantity convert(Quantity q, Unit to);

// Shorthands for the I/O boundaries.
inline double ev_to_au(double e) { return e / kHartreeInEV; }
inline double au_to_ev(double e) { return e * kHartreeInEV; }
inline double angstrom_to_au(double q) { return q / kBohrInAngstrom; }
inline double au_to_angstrom(double q) { return q * kBohrInAngstrom; }
inline double fs_to_au(double t) { return t / kAuTimeInFs; }
inline double au_to_fs(double t) { return t * kAuTimeInFs; }
/// Inverse-length parameters (Morse a, sigmoid steepness) given per angstrom.
inline double per_angstrom_to_au(double a) { return a * kBohrInAngstrom; }

}  // namespace polariton::units
