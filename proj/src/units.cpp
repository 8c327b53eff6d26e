#include "polariton/units.hpp"

#include <stdexcept>

namespace polariton::units {

namespace {

// Value of one unit expressed in atomic units of its dimension.
double to_atomic(Unit u) {
  switch (u) {
    case Unit::hartree: return 1.0;
    case Unit::eV: return 1.0 / kHartreeInEV;
    case Unit::meV: return 1.0e-3 / kHartreeInEV;
    case Unit::bohr: return 1.0;
    case Unit::angstrom: return 1.0 / kBohrInAngstrom;
    case Unit::au_time: return 1.0;
    case Unit::fs: return 1.0 / kAuTimeInFs;
    case Unit::ps: return 1.0e3 / kAuTimeInFs;
    case Unit::au_dipole: return 1.0;
    case Unit::au_mass: return 1.0;
  }
  throw std::invalid_argument("unknown unit");
}

}  // namespace

Dimension dimension_of(Unit u) {
  switch (u) {
    case Unit::hartree:
    case Unit::eV:
    case Unit::meV: return Dimension::energy;
    case Unit::bohr:
    case Unit::angstrom: return Dimension::length;
    case Unit::au_time:
    case Unit::fs:
    case Unit::ps: return Dimension::time;
    case Unit::au_dipole: return Dimension::dipole;
    case Unit::au_mass: return Dimension::mass;
  }
  throw std::invalid_argument("unknown unit");
}

std::string_view name_of(Unit u) {
  switch (u) {
    case Unit::hartree: return "hartree";
    case Unit::eV: return "eV";
    case Unit::meV: return "meV";
    case Unit::bohr: return "bohr";
    case Unit::angstrom: return "angstrom";
    case Unit::au_time: return "au_time";
    case Unit::fs: return "fs";
    case Unit::ps: return "ps";
    case Unit::au_dipole: return "au_dipole";
    case Unit::au_mass: return "au_mass";
  }
  return "?";
}

Unit parse_unit(std::string_view name) {
  if (name == "hartree" || name == "Eh") return Unit::hartree;
  if (name == "eV" || name == "ev") return Unit::eV;
  if (name == "meV" || name == "mev") return Unit::meV;
  if (name == "bohr") return Unit::bohr;
  if (name == "angstrom" || name == "A" || name == "Angstrom") return Unit::angstrom;
  if (name == "au_time") return Unit::au_time;
  if (name == "fs") return Unit::fs;
  if (name == "ps") return Unit::ps;
  if (name == "au" || name == "au_dipole") return Unit::au_dipole;
  if (name == "au_mass") return Unit::au_mass;
  throw std::invalid_argument("unknown unit '" + std::string(name) + "'");
}

double convert(double value, Unit from, Unit to) {
  if (dimension_of(from) != dimension_of(to)) {
    throw std::invalid_argument("cannot convert " + std::string(name_of(from)) + " to " +
                                std::string(name_of(to)) + ": incompatible dimensions");
  }
  if (from == to) return value;
  return value * to_atomic(from) / to_atomic(to);
}

Quantity convert(Quantity q, Unit to) { return {convert(q.value, q.unit, to), to}; }

}  // namespace polariton::units
