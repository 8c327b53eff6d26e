#include "polariton/scenario.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <set>
#include <sstream>

#include "polariton/errors.hpp"
#include "polariton/units.hpp"

namespace polariton {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// INI

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

IniFile IniFile::parse_string(const std::string& text, const std::string& name) {
  IniFile ini;
  ini.name_ = name;
  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    const auto hash = s.find_first_of("#;");
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ParseError(name, line, "unterminated section header");
      section = lower(trim(s.substr(1, s.size() - 2)));
      if (section.empty()) throw ParseError(name, line, "empty section name");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError(name, line, "expected key = value");
    if (section.empty()) throw ParseError(name, line, "key outside of any section");
    const std::string key = lower(trim(s.substr(0, eq)));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) throw ParseError(name, line, "empty key");
    const std::string full = section + "." + key;
    if (ini.entries_.count(full)) {
      throw ParseError(name, line,
                       "duplicate key " + full + " (first at line " +
                           std::to_string(ini.entries_[full].line) + ")");
    }
    ini.entries_[full] = Entry{value, line};
  }
  return ini;
}

IniFile IniFile::parse(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path.string());
}

const IniFile::Entry* IniFile::find(const std::string& section, const std::string& key) const {
  const auto it = entries_.find(section + "." + key);
  return it == entries_.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------

std::string to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::photonic_catalyst: return "photonic-catalyst";
    case ScenarioKind::photonic_bound: return "photonic-bound";
    case ScenarioKind::photoinduced_coin: return "photoinduced-coin";
    case ScenarioKind::custom: return "custom";
  }
  return "?";
}

ScenarioKind parse_scenario_kind(const std::string& text) {
  for (auto k : {ScenarioKind::photonic_catalyst, ScenarioKind::photonic_bound,
                 ScenarioKind::photoinduced_coin, ScenarioKind::custom}) {
    if (lower(text) == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown scenario '" + text + "'");
}

std::string ScenarioConfig::where(const std::string& key) const {
  const auto it = lines.find(key);
  if (it == lines.end()) return config_path.string() + ": ";
  return config_path.string() + ":" + std::to_string(it->second) + ": ";
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Typed access with line-referenced errors. Every key read is recorded so leftovers can be
// reported as unknown.
class Reader {
 public:
  Reader(const IniFile& ini, ScenarioConfig& cfg) : ini_(ini), cfg_(cfg) {}

  const IniFile::Entry* raw(const std::string& sec, const std::string& key) {
    const std::string full = sec + "." + key;
    used_.insert(full);
    const IniFile::Entry* e = ini_.find(sec, key);
    if (e) cfg_.lines[full] = e->line;
    return e;
  }
  bool has(const std::string& sec, const std::string& key) { return raw(sec, key) != nullptr; }

  [[noreturn]] void fail(const std::string& full, const std::string& msg) const {
    throw ValidationError(cfg_.where(full) + full + ": " + msg);
  }

  std::optional<double> opt_double(const std::string& sec, const std::string& key) {
    const auto* e = raw(sec, key);
    if (!e) return std::nullopt;
    try {
      size_t pos = 0;
      const double v = std::stod(e->value, &pos);
      if (pos != e->value.size() || !std::isfinite(v)) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      fail(sec + "." + key, "expected a number, got '" + e->value + "'");
    }
  }
  double get_double(const std::string& sec, const std::string& key, double def) {
    return opt_double(sec, key).value_or(def);
  }
  double req_double(const std::string& sec, const std::string& key) {
    auto v = opt_double(sec, key);
    if (!v) fail(sec + "." + key, "required key is missing");
    return *v;
  }
  long get_int(const std::string& sec, const std::string& key, long def) {
    const auto* e = raw(sec, key);
    if (!e) return def;
    try {
      size_t pos = 0;
      const long v = std::stol(e->value, &pos);
      if (pos != e->value.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      fail(sec + "." + key, "expected an integer, got '" + e->value + "'");
    }
  }
  bool get_bool(const std::string& sec, const std::string& key, bool def) {
    const auto* e = raw(sec, key);
    if (!e) return def;
    const std::string v = lower(e->value);
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    fail(sec + "." + key, "expected true/false, got '" + e->value + "'");
  }
  std::optional<std::string> opt_string(const std::string& sec, const std::string& key) {
    const auto* e = raw(sec, key);
    if (!e) return std::nullopt;
    return e->value;
  }
  std::vector<double> get_list(const std::string& sec, const std::string& key) {
    const auto* e = raw(sec, key);
    std::vector<double> out;
    if (!e) return out;
    std::stringstream ss(e->value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      try {
        size_t pos = 0;
        out.push_back(std::stod(item, &pos));
        if (pos != item.size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        fail(sec + "." + key, "bad list entry '" + item + "'");
      }
    }
    return out;
  }

  void reject_unknown() const {
    for (const auto& [full, e] : ini_.entries()) {
      if (!used_.count(full)) {
        throw ValidationError(ini_.name() + ":" + std::to_string(e.line) + ": unknown key " + full);
      }
    }
  }

 private:
  const IniFile& ini_;
  ScenarioConfig& cfg_;
  std::set<std::string> used_;
};

bool molecular(ScenarioKind k) { return k != ScenarioKind::photoinduced_coin; }

ScenarioConfig resolve(const IniFile& ini, const fs::path& config_path, const fs::path& base_dir,
                       const ConfigOverrides& ov) {
  using namespace units;
  ScenarioConfig c;
  c.config_path = config_path;
  Reader r(ini, c);
  auto& res = c.resolved;
  auto put = [&](const std::string& k, const std::string& v) { res.emplace_back(k, v); };

  // [system]
  const auto name = r.opt_string("system", "scenario");
  if (!name) r.fail("system.scenario", "required key is missing");
  try {
    c.kind = parse_scenario_kind(*name);
  } catch (const std::invalid_argument& e) {
    r.fail("system.scenario", e.what());
  }
  put("system.scenario", to_string(c.kind));
  const bool mol = molecular(c.kind);

  if (c.kind == ScenarioKind::custom) {
    const auto file = r.opt_string("system", "file");
    if (!file) r.fail("system.file", "required key is missing for a custom scenario");
    c.system_file = fs::path(*file).is_absolute() ? fs::path(*file) : base_dir / *file;
    const auto mass = r.opt_double("system", "mass_au");
    if (!mass) r.fail("system.mass_au", "required key is missing for a custom scenario");
    c.mass = *mass;
    put("system.file", c.system_file.string());
  } else {
    if (r.has("system", "file")) r.fail("system.file", "only valid for the custom scenario");
    c.mass = r.get_double("system", "mass_au", models::kReducedMass);
  }
  put("system.mass_au", fmt(c.mass));

  if (mol) {
    const std::string def_init = c.kind == ScenarioKind::photonic_catalyst ? "s0" : "ground";
    const std::string init = lower(r.opt_string("system", "initial_state").value_or(def_init));
    if (init != "s0" && init != "ground") {
      r.fail("system.initial_state", "expected s0 or ground, got '" + init + "'");
    }
    if (init == "s0" && c.kind == ScenarioKind::custom) {
      r.fail("system.initial_state", "s0 is only defined for the builtin molecular models");
    }
    c.ground_from_s0 = init == "s0";
    put("system.initial_state", init);
    const std::string def_dip = c.kind == ScenarioKind::photonic_catalyst ? "1" : "mu_eg";
    const std::string dip = r.opt_string("system", "doorway_dipole_au").value_or(def_dip);
    if (lower(dip) != "mu_eg") {
      try {
        size_t pos = 0;
        c.doorway_dipole = std::stod(dip, &pos);
        if (pos != dip.size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        r.fail("system.doorway_dipole_au", "expected a number or mu_eg, got '" + dip + "'");
      }
      put("system.doorway_dipole_au", fmt(*c.doorway_dipole));
    } else {
      put("system.doorway_dipole_au", "mu_eg");
    }
  }

  // [cavity]
  const auto res_a = r.opt_double("cavity", "resonance_angstrom");
  const auto omega_ev = r.opt_double("cavity", "omega_c_ev");
  const auto gmax_mev = r.opt_double("cavity", "g_max_mev");
  const auto eps = r.opt_double("cavity", "eps_c_au");
  if (res_a && omega_ev) {
    r.fail("cavity.omega_c_ev", "give either resonance_angstrom or omega_c_ev, not both");
  }
  if (gmax_mev && eps) r.fail("cavity.eps_c_au", "give either g_max_mev or eps_c_au, not both");
  if (c.kind == ScenarioKind::photoinduced_coin && res_a) {
    r.fail("cavity.resonance_angstrom", "the CoIn cavity is resonant at the origin");
  }
  if (res_a) c.q_res = angstrom_to_au(*res_a);
  if (omega_ev) c.omega_c = ev_to_au(*omega_ev);
  if (gmax_mev) c.g_max = ev_to_au(*gmax_mev * 1e-3);
  if (eps) c.eps_c = *eps;
  if (!c.q_res && !c.omega_c && mol) {
    switch (c.kind) {
      case ScenarioKind::photonic_catalyst: c.q_res = angstrom_to_au(2.3); break;
      case ScenarioKind::photonic_bound: c.q_res = angstrom_to_au(2.9); break;
      default: r.fail("cavity.resonance_angstrom", "resonance_angstrom or omega_c_ev is required");
    }
  }
  if (!c.g_max && !c.eps_c) {
    switch (c.kind) {
      case ScenarioKind::photonic_catalyst:
      case ScenarioKind::photonic_bound: c.g_max = ev_to_au(0.054); break;
      case ScenarioKind::photoinduced_coin: c.g_max = ev_to_au(0.434); break;
      default: r.fail("cavity.g_max_mev", "g_max_mev or eps_c_au is required");
    }
  }
  if (c.q_res) put("cavity.resonance_angstrom", fmt(au_to_angstrom(*c.q_res)));
  if (c.omega_c) put("cavity.omega_c_ev", fmt(au_to_ev(*c.omega_c)));
  if (c.g_max) put("cavity.g_max_mev", fmt(au_to_ev(*c.g_max) * 1e3));
  if (c.eps_c) put("cavity.eps_c_au", fmt(*c.eps_c));

  // [grid]
  if (mol) {
    c.grid.q_min = angstrom_to_au(r.get_double("grid", "q_min_angstrom", 1.0));
    c.grid.q_max = angstrom_to_au(r.get_double("grid", "q_max_angstrom", 12.0));
    c.grid.n_points = static_cast<int>(r.get_int("grid", "points", 512));
    c.grid.stagger = r.get_bool("grid", "stagger", false);
    c.grid.mass = c.mass;
    c.pml_enabled = r.get_bool("grid", "pml", true);
    c.pml.width = angstrom_to_au(r.get_double("grid", "pml_width_angstrom", 1.2));
    c.pml.strength = r.get_double("grid", "pml_strength", 3.0);
    c.pml.order = static_cast<int>(r.get_int("grid", "pml_order", 3));
    const std::string edges = lower(r.opt_string("grid", "pml_edges").value_or("right"));
    if (edges != "left" && edges != "right" && edges != "both") {
      r.fail("grid.pml_edges", "expected left, right or both, got '" + edges + "'");
    }
    c.pml.left = edges != "right";
    c.pml.right = edges != "left";
    put("grid.q_min_angstrom", fmt(au_to_angstrom(c.grid.q_min)));
    put("grid.q_max_angstrom", fmt(au_to_angstrom(c.grid.q_max)));
    put("grid.points", std::to_string(c.grid.n_points));
    put("grid.stagger", c.grid.stagger ? "true" : "false");
    put("grid.pml", c.pml_enabled ? "true" : "false");
    if (c.pml_enabled) {
      put("grid.pml_width_angstrom", fmt(au_to_angstrom(c.pml.width)));
      put("grid.pml_strength", fmt(c.pml.strength));
      put("grid.pml_order", std::to_string(c.pml.order));
      put("grid.pml_edges", edges);
    }
  } else {
    c.map.q1_min = r.get_double("grid", "q1_min", -1.5);
    c.map.q1_max = r.get_double("grid", "q1_max", 1.5);
    c.map.q2_min = r.get_double("grid", "q2_min", -1.5);
    c.map.q2_max = r.get_double("grid", "q2_max", 1.5);
    c.map.n1 = static_cast<int>(r.get_int("grid", "n1", 60));
    c.map.n2 = static_cast<int>(r.get_int("grid", "n2", 60));
    // The 1-D surface tables use the q2 = 0 cut over the q1 range of the map, staggered so an even
    // count never samples q1 = 0.
    c.grid = GridSpec{c.map.q1_min, c.map.q1_max, 256, c.mass, true};
    c.pml_enabled = false;
    put("grid.q1_min", fmt(c.map.q1_min));
    put("grid.q1_max", fmt(c.map.q1_max));
    put("grid.q2_min", fmt(c.map.q2_min));
    put("grid.q2_max", fmt(c.map.q2_max));
    put("grid.n1", std::to_string(c.map.n1));
    put("grid.n2", std::to_string(c.map.n2));
  }

  // [propagation]
  c.propagate = r.get_bool("propagation", "enabled", mol);
  if (!mol && c.propagate) {
    r.fail("propagation.enabled", "the CoIn scenario produces surface maps only");
  }
  put("propagation.enabled", c.propagate ? "true" : "false");
  if (c.propagate) {
    c.t_final = fs_to_au(r.get_double("propagation", "t_final_fs", 3000.0));
    c.dt = r.get_double("propagation", "dt_au", 1.0);
    c.sample_every = fs_to_au(r.get_double("propagation", "sample_fs", 2.0));
    const std::string mode = r.opt_string("propagation", "mode").value_or("simplified");
    try {
      c.mode = parse_coupling_mode(mode);
    } catch (const std::exception&) {
      r.fail("propagation.mode", "expected simplified or full, got '" + mode + "'");
    }
    c.krylov.tol = r.get_double("propagation", "krylov_tol", 1e-9);
    c.krylov.max_dim = static_cast<int>(r.get_int("propagation", "krylov_max_dim", 64));
    if (ov.mode) c.mode = *ov.mode;
    put("propagation.t_final_fs", fmt(au_to_fs(c.t_final)));
    put("propagation.dt_au", fmt(c.dt));
    put("propagation.sample_fs", fmt(au_to_fs(c.sample_every)));
    put("propagation.mode", to_string(c.mode));
    put("propagation.krylov_tol", fmt(c.krylov.tol));
    put("propagation.krylov_max_dim", std::to_string(c.krylov.max_dim));
  }

  // [signal]
  c.signal = r.get_bool("signal", "enabled", false);
  if (c.signal && !c.propagate) r.fail("signal.enabled", "the signal needs [propagation] enabled");
  put("signal.enabled", c.signal ? "true" : "false");
  if (c.signal) {
    c.omega_L = ev_to_au(r.get_double("signal", "omega_l_ev", 1.5));
    c.fwhm = fs_to_au(r.get_double("signal", "fwhm_fs", 10.0));
    c.amplitude = r.get_double("signal", "amplitude_au", 1.0);
    c.min_nodes = static_cast<int>(r.get_int("signal", "min_nodes", 40));
    c.bare_reference = r.get_bool("signal", "bare_reference", true);
    c.threads = static_cast<int>(r.get_int("signal", "threads", 0));
    const auto list = r.get_list("signal", "delays_fs");
    const auto start = r.opt_double("signal", "delay_start_fs");
    const auto stop = r.opt_double("signal", "delay_stop_fs");
    const long count = r.get_int("signal", "delay_count", 0);
    if (!list.empty() && (start || stop || count)) {
      r.fail("signal.delays_fs", "give either delays_fs or delay_start_fs/delay_stop_fs/delay_count");
    }
    if (!list.empty()) {
      for (double t : list) c.delays.push_back(fs_to_au(t));
    } else if (start && stop && count > 0) {
      for (long i = 0; i < count; ++i) {
        const double t = count == 1 ? *start : *start + (*stop - *start) * i / (count - 1.0);
        c.delays.push_back(fs_to_au(t));
      }
    } else {
      r.fail("signal.delays_fs", "no delays given");
    }
    put("signal.omega_l_ev", fmt(au_to_ev(c.omega_L)));
    put("signal.fwhm_fs", fmt(au_to_fs(c.fwhm)));
    put("signal.amplitude_au", fmt(c.amplitude));
    put("signal.min_nodes", std::to_string(c.min_nodes));
    put("signal.bare_reference", c.bare_reference ? "true" : "false");
    std::string d;
    for (double t : c.delays) d += (d.empty() ? "" : ",") + fmt(au_to_fs(t));
    put("signal.delays_fs", d);
  }

  // [fit]
  if (c.propagate) {
    const std::string ch = lower(r.opt_string("fit", "channel").value_or("plus"));
    if (ch == "plus") {
      c.fit_channel = kPlus;
    } else if (ch == "minus") {
      c.fit_channel = kMinus;
    } else if (ch == "g0") {
      c.fit_channel = kGround;
    } else {
      r.fail("fit.channel", "expected plus, minus or g0, got '" + ch + "'");
    }
    c.fit.t_min = r.get_double("fit", "t_min_fs", 20.0);
    c.fit.with_offset = r.get_bool("fit", "offset", false);
    c.fit.starts = static_cast<int>(r.get_int("fit", "starts", 24));
    c.fit.seed = static_cast<std::uint64_t>(r.get_int("fit", "seed", 20240611));
    if (ov.seed) c.fit.seed = *ov.seed;
    put("fit.channel", ch);
    put("fit.t_min_fs", fmt(c.fit.t_min));
    put("fit.offset", c.fit.with_offset ? "true" : "false");
    put("fit.starts", std::to_string(c.fit.starts));
    put("fit.seed", std::to_string(c.fit.seed));
  }

  // [output]
  c.output_dir = r.opt_string("output", "directory").value_or(to_string(c.kind) + "-output");
  if (ov.output_dir) c.output_dir = *ov.output_dir;
  c.checkpoint = c.propagate && r.get_bool("output", "checkpoint", false);
  put("output.checkpoint", c.checkpoint ? "true" : "false");

  r.reject_unknown();
  return c;
}

}  // namespace

ScenarioConfig load_config(const fs::path& path, const ConfigOverrides& ov) {
  const IniFile ini = IniFile::parse(path);
  return resolve(ini, path, path.parent_path(), ov);
}

ScenarioConfig load_config_string(const std::string& text, const fs::path& base_dir,
                                  const ConfigOverrides& ov) {
  const IniFile ini = IniFile::parse_string(text, "<config>");
  return resolve(ini, "<config>", base_dir, ov);
}

// ---------------------------------------------------------------------------
// Systems

BareSystem scenario_system(const ScenarioConfig& cfg) {
  switch (cfg.kind) {
    case ScenarioKind::photonic_catalyst: {
      BareSystem s = models::photonic_catalyst();
      s.mass = cfg.mass;
      return s;
    }
    case ScenarioKind::photonic_bound: {
      BareSystem s = models::photonic_bound();
      s.mass = cfg.mass;
      return s;
    }
    case ScenarioKind::photoinduced_coin: return TwoModeCoInModel::defaults().cut_q1(0.0);
    case ScenarioKind::custom: return load_tabulated(cfg.system_file, cfg.mass);
  }
  throw std::logic_error("scenario kind");
}

CavityParams scenario_cavity(const ScenarioConfig& cfg, const BareSystem& system,
                             const Grid& grid) {
  if (cfg.kind == ScenarioKind::photoinduced_coin) {
    const auto model = TwoModeCoInModel::defaults();
    CavityParams c = cfg.g_max ? coin_cavity(model, cfg.map, *cfg.g_max)
                               : coin_cavity(model, cfg.map, 1.0);
    if (cfg.eps_c) c.eps_c = *cfg.eps_c;
    if (cfg.omega_c) c.omega_c = *cfg.omega_c;
    return c;
  }
  CavityParams c;
  if (cfg.q_res) {
    c = cavity_from_resonance(system, grid, *cfg.q_res, cfg.g_max.value_or(1.0));
  } else {
    c = cavity_from_resonance(system, grid, grid.points()[0], cfg.g_max.value_or(1.0));
    c.omega_c = *cfg.omega_c;
  }
  if (cfg.eps_c) c.eps_c = *cfg.eps_c;
  c.validate();
  return c;
}

ScenarioModel::ScenarioModel(const ScenarioConfig& cfg, bool with_dynamics)
    : system(scenario_system(cfg)),
      grid(cfg.grid),
      cavity(scenario_cavity(cfg, system, grid)),
      ds(dressed_fields(system, cavity, grid)),
      cf(compute_couplings(ds, grid)),
      doorway_dipole_(cfg.doorway_dipole) {
  if (!with_dynamics) return;
  if (!molecular(cfg.kind)) throw ValidationError("the CoIn scenario has no dynamics");
  for (int j = 0; j < grid.size(); ++j) {
    if (!std::isfinite(cf.f_mp()[j]) || !std::isfinite(cf.Lambda[j])) {
      throw RuntimeFailure("singular coupling at propagation grid point q = " +
                           std::to_string(units::au_to_angstrom(grid.points()[j])) + " angstrom");
    }
  }
  ops = cfg.pml_enabled ? make_pml(grid, cfg.pml) : SpectralOperators(grid);
  H.emplace(*ops, ds, cf, cfg.mode);
  const Field V0 = cfg.ground_from_s0
                       ? grid.sample([](double q) { return eval_morse(models::s0(), q); })
                       : grid.sample([&](double q) { return system.Vg(q); });
  ground = relax_ground_state(V0, grid);
  doorway = prepare_doorway(ground->chi, grid, ds, doorway_dipole_);
}

ScenarioModel::Bare ScenarioModel::bare_reference(CouplingMode mode) const {
  if (!ops || !ground) throw std::logic_error("bare reference needs a model built with dynamics");
  Bare b{bare_fields(system, grid), zero_couplings(grid.size()), std::nullopt, Doorway{}};
  b.H.emplace(*ops, b.ds, b.cf, mode);
  b.doorway = prepare_doorway(ground->chi, grid, b.ds, doorway_dipole_);
  return b;
}

// ---------------------------------------------------------------------------
// Validation

ValidationReport validate_config(const ScenarioConfig& cfg) {
  using namespace units;
  ValidationReport rep;
  auto fail = [&](const std::string& key, const std::string& msg) {
    throw ValidationError(cfg.where(key) + key + ": " + msg);
  };

  if (!(cfg.mass > 0.0)) fail("system.mass_au", "must be positive");
  if (cfg.kind == ScenarioKind::custom && !fs::exists(cfg.system_file)) {
    fail("system.file", "file not found: " + cfg.system_file.string());
  }
  if (cfg.g_max && !(*cfg.g_max > 0.0)) fail("cavity.g_max_mev", "must be positive");
  if (cfg.eps_c && !(*cfg.eps_c >= 0.0)) fail("cavity.eps_c_au", "must be non-negative");
  if (cfg.omega_c && !(*cfg.omega_c > 0.0)) fail("cavity.omega_c_ev", "must be positive");

  if (cfg.kind == ScenarioKind::photoinduced_coin) {
    const auto& m = cfg.map;
    if (m.n1 < 4 || m.n2 < 4) fail("grid.n1", "map needs at least 4 points per axis");
    if (!(m.q1_max > m.q1_min)) fail("grid.q1_max", "must exceed q1_min");
    if (!(m.q2_max > m.q2_min)) fail("grid.q2_max", "must exceed q2_min");
    const GapMap probe = coin_gap_map(TwoModeCoInModel::defaults(),
                                      CavityParams{1.0, 0.0, 0}, m);
    for (double a : probe.q1) {
      if (a == 0.0) fail("grid.n1", "staggered map samples q1 = 0 exactly; use an even n1");
    }
    bool inside = m.q1_min < 0.0 && m.q1_max > 0.0 && m.q2_min < 0.0 && m.q2_max > 0.0;
    if (!inside) rep.warnings.push_back("map does not enclose the origin; the degeneracy is outside");
    return rep;
  }

  const GridSpec& g = cfg.grid;
  if (!(g.q_max > g.q_min)) fail("grid.q_max_angstrom", "must exceed q_min_angstrom");
  if (g.n_points < 64) fail("grid.points", "need at least 64 points");
  if (g.q_min <= 0.0) fail("grid.q_min_angstrom", "must be positive (Morse wall)");
  const double L = g.q_max - g.q_min;
  if (cfg.pml_enabled) {
    if (!(cfg.pml.width > 0.0)) fail("grid.pml_width_angstrom", "must be positive");
    if (cfg.pml.width > 0.25 * L) {
      fail("grid.pml_width_angstrom", "exceeds a quarter of the domain (" +
                                          fmt(au_to_angstrom(0.25 * L)) + " angstrom)");
    }
    if (!(cfg.pml.strength > 0.0)) fail("grid.pml_strength", "must be positive");
    if (cfg.pml.order < 2) fail("grid.pml_order", "must be at least 2");
  }
  if (cfg.q_res) {
    if (*cfg.q_res < g.q_min || *cfg.q_res > g.q_max) {
      fail("cavity.resonance_angstrom", "resonance point lies outside the grid");
    }
    const double lo = g.q_min + (cfg.pml_enabled && cfg.pml.left ? cfg.pml.width : 0.0);
    const double hi = g.q_max - (cfg.pml_enabled && cfg.pml.right ? cfg.pml.width : 0.0);
    if (*cfg.q_res < lo || *cfg.q_res > hi) {
      rep.warnings.push_back(cfg.where("cavity.resonance_angstrom") +
                             "resonance point lies inside the absorbing layer");
    }
  }

  if (cfg.propagate) {
    if (!(cfg.t_final > 0.0)) fail("propagation.t_final_fs", "must be positive");
    if (!(cfg.dt > 0.0)) fail("propagation.dt_au", "must be positive");
    if (cfg.sample_every < cfg.dt) fail("propagation.sample_fs", "must be at least one step");
    if (!(cfg.krylov.tol > 0.0 && cfg.krylov.tol < 1e-2)) {
      fail("propagation.krylov_tol", "must be in (0, 1e-2)");
    }
    if (cfg.krylov.max_dim < cfg.krylov.min_dim) fail("propagation.krylov_max_dim", "too small");
    if (cfg.fit.starts < 1) fail("fit.starts", "must be at least 1");
    if (cfg.fit.t_min < 0.0) fail("fit.t_min_fs", "must be non-negative");
  }

  if (cfg.signal) {
    if (!(cfg.fwhm > 0.0)) fail("signal.fwhm_fs", "must be positive");
    if (cfg.min_nodes < 3) fail("signal.min_nodes", "must be at least 3");
    const PulseParams pulse = PulseParams::from_fwhm(cfg.omega_L, cfg.fwhm, cfg.amplitude);
    const double half = 4.0 * pulse.sigma;
    for (double T : cfg.delays) {
      if (T - half < 0.0) {
        fail("signal.delays_fs", "delay " + fmt(au_to_fs(T)) +
                                     " fs: probe window starts before t = 0 (needs T >= " +
                                     fmt(au_to_fs(half)) + " fs)");
      }
      if (T + half > cfg.t_final) {
        fail("signal.delays_fs", "delay " + fmt(au_to_fs(T)) +
                                     " fs: probe window extends past t_final_fs");
      }
    }
    // Plausibility of the probe frequency against the g0 -> dressed transition energies.
    const BareSystem sys = scenario_system(cfg);
    const Grid grid(cfg.grid);
    const CavityParams cav = scenario_cavity(cfg, sys, grid);
    const DressedSurfaces ds = dressed_fields(sys, cav, grid);
    double max_gap = 0.0;
    for (int j = 0; j < ds.size(); ++j) {
      max_gap = std::max(max_gap, ds.V_plus[j] + ds.offset_pm - ds.V_g0[j] - ds.offset_g0);
    }
    if (cfg.omega_L < 0.0 || cfg.omega_L > 3.0 * max_gap) {
      rep.warnings.push_back(cfg.where("signal.omega_l_ev") + "omega_L = " +
                             fmt(au_to_ev(cfg.omega_L)) + " eV is outside [0, 3 x " +
                             fmt(au_to_ev(max_gap)) + " eV] of the dressed transition energies");
    }
  }
  return rep;
}

ValidationReport validate_config(const fs::path& path) { return validate_config(load_config(path)); }

// ---------------------------------------------------------------------------
// Hashing

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw RuntimeFailure("SHA-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string metadata_hash(const ScenarioConfig& cfg) {
  std::string text = std::string("polariton ") + kEngineVersion + "\n";
  for (const auto& [k, v] : cfg.resolved) text += k + " = " + v + "\n";
  return sha256_hex(text);
}

// ---------------------------------------------------------------------------
// Run

namespace {

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::string& hash, const std::vector<std::string>& cols,
            const std::string& units)
      : out_(path) {
    if (!out_) throw RuntimeFailure("cannot write " + path.string());
    out_ << "# polariton " << kEngineVersion << "\n# metadata_hash = " << hash << "\n# units: "
         << units << "\n";
    for (size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
    out_ << "\n";
  }
  void row(std::initializer_list<double> values) {
    bool first = true;
    char buf[32];
    for (double v : values) {
      std::snprintf(buf, sizeof buf, "%.12e", v);
      out_ << (first ? "" : ",") << buf;
      first = false;
    }
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

void write_surfaces(const fs::path& path, const std::string& hash, const DressedSurfaces& ds,
                    bool length_in_angstrom) {
  using namespace units;
  const std::string qname = length_in_angstrom ? "q_angstrom" : "q";
  CsvWriter w(path, hash,
              {qname, "delta_c_eV", "g_eV", "Omega_eV", "V_g0_eV", "V_minus_eV", "V_plus_eV",
               "cos_theta", "sin_theta", "mu_g_plus_au", "mu_g_minus_au", "mu_minus_plus_au"},
              (length_in_angstrom ? "q=angstrom" : "q=dimensionless") +
                  std::string(" energies=eV dipoles=au; V_pm exclude the photon energy omega_c"));
  for (int j = 0; j < ds.size(); ++j) {
    w.row({length_in_angstrom ? au_to_angstrom(ds.q[j]) : ds.q[j], au_to_ev(ds.delta_c[j]),
           au_to_ev(ds.g[j]), au_to_ev(ds.Omega[j]), au_to_ev(ds.V_g0[j]),
           au_to_ev(ds.V_minus[j]), au_to_ev(ds.V_plus[j]), ds.cos_theta[j], ds.sin_theta[j],
           ds.mu_g_plus[j], ds.mu_g_minus[j], ds.mu_minus_plus[j]});
  }
}

void write_couplings(const fs::path& path, const std::string& hash, const DressedSurfaces& ds,
                     const CouplingFields& cf, bool length_in_angstrom) {
  using namespace units;
  const std::string qname = length_in_angstrom ? "q_angstrom" : "q";
  CsvWriter w(path, hash,
              {qname, "f_mp", "f_gp", "f_gm", "Lambda", "F_pp", "F_mm", "F_mp", "F_gp", "F_gm",
               "h_mp"},
              std::string(length_in_angstrom ? "q=angstrom" : "q=dimensionless") +
                  " f=1/bohr Lambda=1/bohr F=1/bohr^2 h=1/bohr^2; NaN marks singular points");
  for (int j = 0; j < ds.size(); ++j) {
    w.row({length_in_angstrom ? au_to_angstrom(ds.q[j]) : ds.q[j], cf.f_mp()[j], cf.f_gp()[j],
           cf.f_gm()[j], cf.Lambda[j], cf.F(kPlus, kPlus)[j], cf.F(kMinus, kMinus)[j],
           cf.F(kMinus, kPlus)[j], cf.F(kGround, kPlus)[j], cf.F(kGround, kMinus)[j],
           cf.h(kMinus, kPlus)[j]});
  }
}

std::string channel_name(int k) {
  return k == kPlus ? "plus" : k == kMinus ? "minus" : "g0";
}

}  // namespace

RunSummary run_scenario(const ScenarioConfig& cfg, bool surfaces_only, std::ostream* log) {
  using namespace units;
  using clock = std::chrono::steady_clock;
  const auto t_start = clock::now();
  const ValidationReport report = validate_config(cfg);

  RunSummary sum;
  sum.hash = metadata_hash(cfg);
  sum.warnings = report.warnings;
  auto say = [&](const std::string& s) {
    if (log) *log << s << std::endl;
  };
  for (const auto& w : report.warnings) say("warning: " + w);

  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw RuntimeFailure("cannot create " + cfg.output_dir.string() + ": " + ec.message());
  auto out_path = [&](const std::string& name) {
    const fs::path p = cfg.output_dir / name;
    sum.files.push_back(p);
    return p;
  };

  nlohmann::json meta;
  meta["engine"] = {{"name", "polariton"}, {"version", kEngineVersion}};
  meta["metadata_hash"] = sum.hash;
  meta["config_file"] = cfg.config_path.string();
  nlohmann::json resolved = nlohmann::json::object();
  for (const auto& [k, v] : cfg.resolved) resolved[k] = v;
  meta["config"] = resolved;
  meta["constants"] = {{"hartree_eV", kHartreeInEV},
                       {"bohr_angstrom", kBohrInAngstrom},
                       {"au_time_fs", kAuTimeInFs},
                       {"source", "CODATA 2014"}};
  meta["warnings"] = report.warnings;

  const bool mol = molecular(cfg.kind);
  const ScenarioModel model(cfg, cfg.propagate && !surfaces_only);
  const Grid& grid = model.grid;
  const CavityParams& cavity = model.cavity;
  const DressedSurfaces& ds = model.ds;
  const CouplingFields& cf = model.cf;
  for (int j : cf.singular_points) sum.singular_q.push_back(mol ? au_to_angstrom(grid.points()[j]) : grid.points()[j]);
  meta["cavity"] = {{"omega_c_eV", au_to_ev(cavity.omega_c)},
                    {"eps_c_au", cavity.eps_c},
                    {"convention", cfg.omega_c                                ? "explicit omega_c"
                                   : cfg.kind == ScenarioKind::photoinduced_coin ? "resonance at the origin"
                                                                                 : "resonance at q_res"}};
  meta["grid"] = {{"q_min", cfg.grid.q_min},   {"q_max", cfg.grid.q_max},
                  {"points", cfg.grid.n_points}, {"spacing", grid.spacing()},
                  {"stagger", cfg.grid.stagger}, {"mass_au", cfg.mass},
                  {"length_unit", "bohr"}};
  if (cfg.pml_enabled) {
    meta["pml"] = {{"width_bohr", cfg.pml.width}, {"strength", cfg.pml.strength},
                   {"order", cfg.pml.order},      {"left", cfg.pml.left},
                   {"right", cfg.pml.right}};
  }
  meta["singular_points"] = sum.singular_q;
  if (!sum.singular_q.empty()) {
    say("warning: " + std::to_string(sum.singular_q.size()) + " singular coupling point(s) on the grid");
  }

  write_surfaces(out_path("surfaces.csv"), sum.hash, ds, mol);
  write_couplings(out_path("couplings.csv"), sum.hash, ds, cf, mol);
  say("surfaces and couplings written");

  if (cfg.kind == ScenarioKind::photoinduced_coin && !surfaces_only) {
    const auto coin = TwoModeCoInModel::defaults();
    const GapMap map = coin_gap_map(coin, cavity, cfg.map);
    {
      CsvWriter w(out_path("gap_map.csv"), sum.hash, {"q1", "q2", "delta_c_eV", "g_eV", "gap_eV"},
                  "q=dimensionless energies=eV");
      for (size_t i = 0; i < map.q1.size(); ++i) {
        for (size_t j = 0; j < map.q2.size(); ++j) {
          w.row({map.q1[i], map.q2[j], au_to_ev(map.delta_c(i, j)), au_to_ev(map.g(i, j)),
                 au_to_ev(map.gap(i, j))});
        }
      }
    }
    const GapMinimum gm = interpolated_gap_minimum(map);
    sum.gap_minimum = gm;
    const ConeCheck cone = cone_check(coin, cavity, {1e-2, 1e-3, 1e-4});
    std::ofstream rep(out_path("coin_report.txt"));
    char buf[256];
    rep << "# metadata_hash = " << sum.hash << "\n";
    std::snprintf(buf, sizeof buf,
                  "min_gap_sampled_eV = %.6e\nmin_gap_interpolated_eV = %.6e\nmin_q1 = %.6e\n"
                  "min_q2 = %.6e\n",
                  au_to_ev(gm.gap_sampled), au_to_ev(gm.gap_interpolated), gm.q1, gm.q2);
    rep << buf;
    for (size_t i = 0; i < cone.q1.size(); ++i) {
      std::snprintf(buf, sizeof buf, "cone_ratio_eV[q1=%.0e] = %.10e\n", cone.q1[i],
                    au_to_ev(cone.ratio[i]));
      rep << buf;
    }
    std::snprintf(buf, sizeof buf, "cone_ratio_spread = %.6e\n", cone.spread);
    rep << buf;
    meta["coin"] = {{"min_gap_interpolated_eV", au_to_ev(gm.gap_interpolated)},
                    {"min_gap_sampled_eV", au_to_ev(gm.gap_sampled)},
                    {"cone_ratio_spread", cone.spread}};
    say("gap map written; interpolated minimum gap " + fmt(au_to_ev(gm.gap_interpolated)) + " eV");
  }

  if (cfg.propagate && !surfaces_only) {
    const HamiltonianAction& H = *model.H;
    const GroundState& gs = *model.ground;
    const Doorway& door = *model.doorway;
    say("ground state " + fmt(au_to_ev(gs.energy)) + " eV; doorway weights + " +
        fmt(door.weight_plus) + " - " + fmt(door.weight_minus));

    Propagator prop(H, cfg.krylov);
    WavePacket psi = door.psi;
    const int every = std::max(1, static_cast<int>(std::lround(cfg.sample_every / cfg.dt)));
    const PopulationTrace trace = propagate_populations(prop, psi, cfg.t_final, cfg.dt, every);
    {
      CsvWriter w(out_path("populations.csv"), sum.hash,
                  {"t_fs", "P_g0", "P_minus", "P_plus", "norm", "absorbed"},
                  "t=fs populations dimensionless; absorbed = cumulative PML loss");
      for (size_t i = 0; i < trace.size(); ++i) {
        w.row({trace.t_fs[i], trace.P_g0[i], trace.P_minus[i], trace.P_plus[i], trace.norm[i],
               trace.absorbed[i]});
      }
    }
    say("propagated to " + fmt(au_to_fs(psi.time)) + " fs; final norm " + fmt(trace.norm.back()));
    if (cfg.checkpoint) write_checkpoint(out_path("checkpoint.txt"), psi, grid, sum.hash);

    const BiExpFit fit = fit_biexponential(trace, cfg.fit_channel, cfg.fit);
    sum.fit = fit;
    {
      std::ofstream f(out_path("fit_report.txt"));
      char buf[512];
      std::snprintf(buf, sizeof buf,
                    "# metadata_hash = %s\nchannel = %s\nmodel = A1 exp(-t/tau1) + A2 exp(-t/tau2)%s\n"
                    "t_min_fs = %.6g\nA1 = %.10e\ntau1_fs = %.10e\nA2 = %.10e\ntau2_fs = %.10e\n"
                    "offset = %.10e\nresidual_rms = %.6e\ndegenerate = %s\nconverged = %s\n"
                    "seed = %llu\n",
                    sum.hash.c_str(), channel_name(cfg.fit_channel).c_str(),
                    cfg.fit.with_offset ? " + offset" : "", cfg.fit.t_min, fit.A1, fit.tau1,
                    fit.A2, fit.tau2, fit.offset, fit.residual_rms,
                    fit.degenerate ? "true" : "false", fit.converged ? "true" : "false",
                    static_cast<unsigned long long>(cfg.fit.seed));
      f << buf;
    }
    say("fit: tau1 = " + fmt(fit.tau1) + " fs, tau2 = " + fmt(fit.tau2) + " fs");
    meta["propagation"] = {{"dt_au", cfg.dt},
                           {"mode", to_string(cfg.mode)},
                           {"krylov_tol", cfg.krylov.tol},
                           {"krylov_max_dim_used", prop.max_krylov_dim()},
                           {"absorbed", prop.absorbed()},
                           {"final_norm", trace.norm.back()},
                           {"ground_energy_hartree", gs.energy},
                           {"doorway_weight_plus", door.weight_plus},
                           {"doorway_weight_minus", door.weight_minus}};
    meta["fit"] = {{"tau1_fs", fit.tau1}, {"tau2_fs", fit.tau2}, {"A1", fit.A1},
                   {"A2", fit.A2},        {"degenerate", fit.degenerate},
                   {"converged", fit.converged}};

    if (cfg.signal) {
      const PulseParams pulse = PulseParams::from_fwhm(cfg.omega_L, cfg.fwhm, cfg.amplitude);
      SignalOptions so;
      so.dt = cfg.dt;
      so.min_nodes = cfg.min_nodes;
      so.krylov = cfg.krylov;
      so.threads = cfg.threads;
      const std::vector<double> S =
          transient_absorption(H, door.psi, DipoleOperator::from(ds), pulse, cfg.delays, so);
      std::vector<double> S_bare(S.size(), std::nan(""));
      if (cfg.bare_reference) {
        const ScenarioModel::Bare bare = model.bare_reference(cfg.mode);
        S_bare = transient_absorption(*bare.H, bare.doorway.psi, DipoleOperator::from(bare.ds),
                                      pulse, cfg.delays, so);
      }
      CsvWriter w(out_path("signal.csv"), sum.hash, {"T_fs", "S_N", "S_N_bare"},
                  "T=fs S_N=au (positive: stimulated emission / bleach)");
      for (size_t i = 0; i < S.size(); ++i) w.row({au_to_fs(cfg.delays[i]), S[i], S_bare[i]});
      say("signal written for " + std::to_string(S.size()) + " delays");
      meta["signal"] = {{"sigma_fs", au_to_fs(pulse.sigma)}, {"window_sigmas", so.window_sigmas},
                        {"min_nodes", so.min_nodes}};
    }
  }

  meta["outputs"] = nlohmann::json::array();
  for (const auto& p : sum.files) meta["outputs"].push_back(p.filename().string());
  meta["outputs"].push_back("metadata.json");
  meta["wall_clock_s"] = std::chrono::duration<double>(clock::now() - t_start).count();
  std::ofstream(out_path("metadata.json")) << meta.dump(2) << "\n";
  return sum;
}

}  // namespace polariton
