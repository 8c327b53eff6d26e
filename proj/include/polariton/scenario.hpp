#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "polariton/coin_map.hpp"
#include "polariton/dynamics.hpp"
#include "polariton/observables.hpp"

namespace polariton {

inline constexpr const char* kEngineVersion = "0.3.0";

/// `[section]` headers, `key = value` lines, `#` or `;` comments.
class IniFile {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static IniFile parse(const std::filesystem::path& path);
  static IniFile parse_string(const std::string& text, const std::string& name = "<string>");

  const std::string& name() const { return name_; }
  const Entry* find(const std::string& section, const std::string& key) const;
  /// All entries as "section.key".
  const std::map<std::string, Entry>& entries() const { return entries_; }

 private:
  std::string name_;
  std::map<std::string, Entry> entries_;
};

enum class ScenarioKind { photonic_catalyst, photonic_bound, photoinduced_coin, custom };
std::string to_string(ScenarioKind k);
ScenarioKind parse_scenario_kind(const std::string& text);

/// Fully resolved run description in atomic units.
struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::photonic_catalyst;
  std::filesystem::path config_path;

  // [system]
  std::filesystem::path system_file;  // custom only
  double mass = 3650.0;
  bool ground_from_s0 = true;            // initial state from S0 rather than the model's |g>
  std::optional<double> doorway_dipole;  // constant mu0; otherwise mu_eg(q)

  // [cavity]
  std::optional<double> q_res;
  std::optional<double> omega_c;
  std::optional<double> g_max;
  std::optional<double> eps_c;

  // [grid]
  GridSpec grid;
  bool pml_enabled = true;
  PMLParams pml;
  GapMapSpec map;

  // [propagation]
  bool propagate = true;
  double t_final = 0.0;
  double dt = 1.0;
  double sample_every = 0.0;  // time between population samples
  CouplingMode mode = CouplingMode::simplified;
  KrylovOptions krylov;

  // [signal]
  bool signal = false;
  double omega_L = 0.0;
  double fwhm = 0.0;
  double amplitude = 1.0;
  std::vector<double> delays;
  int min_nodes = 40;
  bool bare_reference = true;
  int threads = 0;  // 0: hardware concurrency

  // [fit]
  FitOptions fit;
  int fit_channel = kPlus;

  // [output]
  std::filesystem::path output_dir;
  bool checkpoint = false;

  /// Canonical "section.key = value" lines of every resolved setting, defaults included.
  std::vector<std::pair<std::string, std::string>> resolved;
  /// Source line of each key present in the file.
  std::map<std::string, int> lines;

  /// "file:line: " for a key from the file, "file: " otherwise.
  std::string where(const std::string& key) const;
};

struct ConfigOverrides {
  std::optional<std::filesystem::path> output_dir;
  std::optional<CouplingMode> mode;
  std::optional<std::uint64_t> seed;
};

/// Parses and resolves a config. Throws ParseError for syntax and ValidationError for unknown or
/// missing keys and bad values; messages name the key and line.
ScenarioConfig load_config(const std::filesystem::path& path, const ConfigOverrides& ov = {});
ScenarioConfig load_config_string(const std::string& text, const std::filesystem::path& base_dir,
                                  const ConfigOverrides& ov = {});

struct ValidationReport {
  std::vector<std::string> warnings;
  std::vector<std::string> notes;
};

/// Physics consistency checks that need no propagation: resonance point inside the grid, PML
/// inside the domain, probe windows inside the horizon, staggered CoIn grid. Throws
/// ValidationError on the first failure; plausibility issues become warnings.
ValidationReport validate_config(const ScenarioConfig& cfg);
ValidationReport validate_config(const std::filesystem::path& path);

/// Lower-case hex SHA-256.
std::string sha256_hex(const std::string& data);
/// Hash of the resolved settings and engine version; stamped into every output file.
std::string metadata_hash(const ScenarioConfig& cfg);

/// Builtin or tabulated system of the scenario (the CoIn model contributes its q2 = 0 cut).
BareSystem scenario_system(const ScenarioConfig& cfg);
CavityParams scenario_cavity(const ScenarioConfig& cfg, const BareSystem& system, const Grid& grid);

/// Everything a run needs, built once from a config. Not copyable, since propagators keep a
/// reference to H.
struct ScenarioModel {
  ScenarioModel(const ScenarioConfig& cfg, bool with_dynamics);
  ScenarioModel(const ScenarioModel&) = delete;
  ScenarioModel& operator=(const ScenarioModel&) = delete;

  BareSystem system;
  Grid grid;
  CavityParams cavity;
  DressedSurfaces ds;
  CouplingFields cf;
  // Present when built with dynamics.
  std::optional<SpectralOperators> ops;
  std::optional<HamiltonianAction> H;
  std::optional<GroundState> ground;
  std::optional<Doorway> doorway;

  /// Uncoupled reference on the same grid and boundary: bare surfaces, zero couplings, doorway
  /// on the bare excited state.
  struct Bare {
    DressedSurfaces ds;
    CouplingFields cf;
    std::optional<HamiltonianAction> H;
    Doorway doorway;
  };
  Bare bare_reference(CouplingMode mode) const;

 private:
  std::optional<double> doorway_dipole_;
};

struct RunSummary {
  std::string hash;
  std::vector<std::filesystem::path> files;
  std::optional<BiExpFit> fit;
  std::optional<GapMinimum> gap_minimum;
  std::vector<double> singular_q;
  std::vector<std::string> warnings;
};

/// Runs a scenario and writes its artifacts to cfg.output_dir. With `surfaces_only` only the
/// surface and coupling tables (plus metadata) are produced. Progress goes to `log` if given.
RunSummary run_scenario(const ScenarioConfig& cfg, bool surfaces_only = false,
                        std::ostream* log = nullptr);

}  // namespace polariton
