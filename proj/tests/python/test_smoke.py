import math
import os
import pathlib

import numpy as np
import pytest

import polariton

ROOT = pathlib.Path(os.environ.get("POLARITON_SOURCE_DIR", pathlib.Path(__file__).resolve().parents[2]))
CONFIGS = ROOT / "configs"


def test_units():
    assert polariton.units.convert(1.0, "hartree", "eV") == pytest.approx(27.21138602, rel=1e-9)
    assert polariton.units.AU_TIME_IN_FS == pytest.approx(0.02418884326509, rel=1e-12)


def test_shipped_configs_validate():
    for cfg in sorted(CONFIGS.glob("*.ini")):
        assert polariton.validate_config(str(cfg)) == []


def test_bad_config_raises(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[system]\nscenario = photonic-bound\n[grid]\nbogus = 1\n")
    with pytest.raises(ValueError, match="grid.bogus"):
        polariton.validate_config(str(bad))


def test_catalyst_surfaces():
    s = polariton.dressed_surfaces(str(CONFIGS / "photonic-catalyst.ini"))
    assert s["omega_c"] * polariton.units.HARTREE_IN_EV == pytest.approx(1.496, abs=1e-3)
    c, sn = s["cos_theta"], s["sin_theta"]
    assert np.max(np.abs(c**2 + sn**2 - 1)) < 1e-12
    gap = s["V_plus"] - s["V_minus"]
    assert np.max(np.abs(gap - np.sqrt(4 * s["g"] ** 2 + s["delta_c"] ** 2))) < 1e-12
    bare = polariton.bare_surfaces(str(CONFIGS / "photonic-catalyst.ini"))
    assert np.allclose(bare["V_g0"], s["V_g0"])


def test_ground_state_matches_morse_level():
    g = polariton.ground_state()
    assert g["energy"] == pytest.approx(polariton.morse_eigenvalue(0), abs=1e-8)
    dq = g["q"][1] - g["q"][0]
    assert np.sum(g["chi"] ** 2) * dq == pytest.approx(1.0, abs=1e-12)


def test_fit_biexponential():
    t = np.arange(0.0, 3000.0, 5.0)
    y = 0.6 * np.exp(-t / 40.0) + 0.3 * np.exp(-t / 900.0)
    f = polariton.fit_biexponential(t.tolist(), y.tolist(), t_min=0.0)
    assert f["tau1"] == pytest.approx(40.0, rel=1e-6)
    assert f["tau2"] == pytest.approx(900.0, rel=1e-6)
    assert not f["degenerate"]


def test_gap_map_and_cone():
    m = polariton.gap_map()
    assert m["min_gap_interpolated"] * polariton.units.HARTREE_IN_EV < 1e-6
    assert 0.0 not in m["q1"]
    c = polariton.cone_check([1e-3, 1e-2, 1e-1])
    assert c["spread"] < 0.05


def test_short_propagation():
    p = polariton.simulate_populations(str(CONFIGS / "photonic-bound.ini"), t_final_fs=20.0)
    total = np.asarray(p["norm"]) + np.asarray(p["absorbed"])
    assert np.max(np.abs(total - 1.0)) < 1e-8
    assert p["P_plus"][0] + p["P_minus"][0] == pytest.approx(1.0, abs=1e-12)


def test_run_coin(tmp_path):
    out = polariton.run_scenario(str(CONFIGS / "photoinduced-coin.ini"), output_dir=str(tmp_path))
    assert len(out["metadata_hash"]) == 64
    assert (tmp_path / "gap_map.csv").exists()
    assert out["min_gap_interpolated"] * polariton.units.HARTREE_IN_EV < 1e-6
    assert polariton.sha256_hex("abc").startswith("ba7816bf")
    assert not math.isnan(out["min_gap_interpolated"])
