#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "polariton/errors.hpp"
#include "polariton/scenario.hpp"
#include "polariton/units.hpp"

namespace py = pybind11;
using namespace polariton;

namespace {

ConfigOverrides overrides(std::optional<std::string> output_dir, std::optional<std::string> mode,
                          std::optional<std::uint64_t> seed) {
  ConfigOverrides ov;
  if (output_dir) ov.output_dir = *output_dir;
  if (mode) ov.mode = parse_coupling_mode(*mode);
  ov.seed = seed;
  return ov;
}

py::dict surfaces_dict(const DressedSurfaces& ds) {
  py::dict d;
  d["q"] = ds.q;
  d["V_g0"] = ds.V_g0;
  d["V_minus"] = ds.V_minus;
  d["V_plus"] = ds.V_plus;
  d["delta_c"] = ds.delta_c;
  d["g"] = ds.g;
  d["Omega"] = ds.Omega;
  d["cos_theta"] = ds.cos_theta;
  d["sin_theta"] = ds.sin_theta;
  d["mu_g_plus"] = ds.mu_g_plus;
  d["mu_g_minus"] = ds.mu_g_minus;
  d["mu_minus_plus"] = ds.mu_minus_plus;
  d["offset_g0"] = ds.offset_g0;
  d["offset_pm"] = ds.offset_pm;
  return d;
}

py::dict fit_dict(const BiExpFit& f) {
  py::dict d;
  d["A1"] = f.A1;
  d["tau1"] = f.tau1;
  d["A2"] = f.A2;
  d["tau2"] = f.tau2;
  d["offset"] = f.offset;
  d["residual_rms"] = f.residual_rms;
  d["degenerate"] = f.degenerate;
  d["converged"] = f.converged;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cavity-dressed wave-packet dynamics (atomic units unless a name says otherwise)";
  m.attr("__version__") = kEngineVersion;

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<RuntimeFailure>(m, "RuntimeFailure", PyExc_RuntimeError);

  auto u = m.def_submodule("units", "CODATA 2014 conversions");
  u.attr("HARTREE_IN_EV") = units::kHartreeInEV;
  u.attr("BOHR_IN_ANGSTROM") = units::kBohrInAngstrom;
  u.attr("AU_TIME_IN_FS") = units::kAuTimeInFs;
  u.def("convert", [](double v, const std::string& from, const std::string& to) {
    return units::convert(v, units::parse_unit(from), units::parse_unit(to));
  }, py::arg("value"), py::arg("from_unit"), py::arg("to_unit"));

  m.def("load_config", [](const std::string& path, std::optional<std::string> output_dir,
                          std::optional<std::string> mode, std::optional<std::uint64_t> seed) {
    const ScenarioConfig cfg = load_config(path, overrides(output_dir, mode, seed));
    py::dict d;
    for (const auto& [k, v] : cfg.resolved) d[py::str(k)] = v;
    d["metadata_hash"] = metadata_hash(cfg);
    return d;
  }, py::arg("path"), py::arg("output_dir") = py::none(), py::arg("mode") = py::none(),
     py::arg("seed") = py::none(), "Resolved settings of a scenario file.");

  m.def("validate_config", [](const std::string& path) {
    return validate_config(std::filesystem::path(path)).warnings;
  }, py::arg("path"), "Validates a scenario file; returns warnings, raises ValidationError.");

  m.def("run_scenario", [](const std::string& path, std::optional<std::string> output_dir,
                           std::optional<std::string> mode, std::optional<std::uint64_t> seed,
                           bool surfaces_only) {
    const ScenarioConfig cfg = load_config(path, overrides(output_dir, mode, seed));
    RunSummary s;
    {
      py::gil_scoped_release release;
      s = run_scenario(cfg, surfaces_only);
    }
    py::dict d;
    d["metadata_hash"] = s.hash;
    py::list files;
    for (const auto& f : s.files) files.append(f.string());
    d["files"] = files;
    d["warnings"] = s.warnings;
    d["singular_q"] = s.singular_q;
    if (s.fit) d["fit"] = fit_dict(*s.fit);
    if (s.gap_minimum) d["min_gap_interpolated"] = s.gap_minimum->gap_interpolated;
    return d;
  }, py::arg("path"), py::arg("output_dir") = py::none(), py::arg("mode") = py::none(),
     py::arg("seed") = py::none(), py::arg("surfaces_only") = false);

  m.def("dressed_surfaces", [](const std::string& path) {
    const ScenarioModel model(load_config(path), false);
    py::dict d = surfaces_dict(model.ds);
    d["f_minus_plus"] = model.cf.f_mp();
    d["omega_c"] = model.cavity.omega_c;
    d["eps_c"] = model.cavity.eps_c;
    return d;
  }, py::arg("path"), "Dressed fields on the scenario grid (bohr, hartree, a.u.).");

  m.def("bare_surfaces", [](const std::string& path) {
    const ScenarioConfig cfg = load_config(path);
    const BareSystem sys = scenario_system(cfg);
    return surfaces_dict(bare_fields(sys, Grid(cfg.grid)));
  }, py::arg("path"));

  m.def("simulate_populations", [](const std::string& path, std::optional<double> t_final_fs,
                                   std::optional<std::string> mode, double sample_fs) {
    ScenarioConfig cfg = load_config(path, overrides(std::nullopt, mode, std::nullopt));
    if (t_final_fs) cfg.t_final = units::fs_to_au(*t_final_fs);
    cfg.signal = false;  // populations only
    validate_config(cfg);
    py::gil_scoped_release release;
    const ScenarioModel model(cfg, true);
    Propagator prop(*model.H, cfg.krylov);
    WavePacket psi = model.doorway->psi;
    const int every = std::max(1, static_cast<int>(std::lround(units::fs_to_au(sample_fs) / cfg.dt)));
    const PopulationTrace tr = propagate_populations(prop, psi, cfg.t_final, cfg.dt, every);
    py::gil_scoped_acquire acquire;
    py::dict d;
    d["t_fs"] = tr.t_fs;
    d["P_g0"] = tr.P_g0;
    d["P_minus"] = tr.P_minus;
    d["P_plus"] = tr.P_plus;
    d["norm"] = tr.norm;
    d["absorbed"] = tr.absorbed;
    return d;
  }, py::arg("path"), py::arg("t_final_fs") = py::none(), py::arg("mode") = py::none(),
     py::arg("sample_fs") = 2.0);

  m.def("fit_biexponential", [](const std::vector<double>& t, const std::vector<double>& y,
                                double t_min, bool offset, int starts, std::uint64_t seed) {
    FitOptions opt;
    opt.t_min = t_min;
    opt.with_offset = offset;
    opt.starts = starts;
    opt.seed = seed;
    return fit_dict(fit_biexponential(t, y, opt));
  }, py::arg("t"), py::arg("y"), py::arg("t_min") = 20.0, py::arg("offset") = false,
     py::arg("starts") = 24, py::arg("seed") = FitOptions{}.seed);

  m.def("ground_state", [](double q_min_angstrom, double q_max_angstrom, int points,
                           const std::string& method) {
    const Grid grid(GridSpec{units::angstrom_to_au(q_min_angstrom),
                             units::angstrom_to_au(q_max_angstrom), points,
                             models::kReducedMass, false});
    const Field V = grid.sample([](double q) { return eval_morse(models::s0(), q); });
    const GroundState g = method == "relax" ? relax_ground_state(V, grid)
                          : ground_state(V, grid, method == "imaginary_time"
                                                      ? GroundStateMethod::imaginary_time
                                                      : GroundStateMethod::fourier_grid);
    py::dict d;
    d["q"] = grid.points();
    d["chi"] = g.chi;
    d["energy"] = g.energy;
    return d;
  }, py::arg("q_min_angstrom") = 1.0, py::arg("q_max_angstrom") = 12.0, py::arg("points") = 512,
     py::arg("method") = "relax", "S0 Morse vibrational ground state.");

  m.def("morse_eigenvalue", [](int n) {
    return morse_eigenvalue(models::s0(), models::kReducedMass, n);
  }, py::arg("n") = 0, "Analytic S0 Morse level (hartree).");

  m.def("gap_map", [](double g_max_mev, int n1, int n2, double extent) {
    const auto model = TwoModeCoInModel::defaults();
    const GapMapSpec spec{-extent, extent, -extent, extent, n1, n2};
    const CavityParams cav = coin_cavity(model, spec, units::ev_to_au(g_max_mev * 1e-3));
    const GapMap map = coin_gap_map(model, cav, spec);
    const GapMinimum gm = interpolated_gap_minimum(map);
    py::dict d;
    d["q1"] = map.q1;
    d["q2"] = map.q2;
    d["gap"] = map.gap;
    d["min_gap_sampled"] = gm.gap_sampled;
    d["min_gap_interpolated"] = gm.gap_interpolated;
    d["min_location"] = py::make_tuple(gm.q1, gm.q2);
    return d;
  }, py::arg("g_max_mev") = 434.0, py::arg("n1") = 60, py::arg("n2") = 60,
     py::arg("extent") = 1.5);

  m.def("cone_check", [](const std::vector<double>& q1, double g_max_mev) {
    const auto model = TwoModeCoInModel::defaults();
    const CavityParams cav = coin_cavity(model, GapMapSpec{}, units::ev_to_au(g_max_mev * 1e-3));
    const ConeCheck c = cone_check(model, cav, q1);
    py::dict d;
    d["q1"] = c.q1;
    d["ratio"] = c.ratio;
    d["spread"] = c.spread;
    return d;
  }, py::arg("q1"), py::arg("g_max_mev") = 434.0);

  m.def("sha256_hex", &sha256_hex, py::arg("data"));
}
