import json
import warnings

import numpy as np
import pytest

from besselspdc.cli import main, reference_config_text
from besselspdc.io import read_grid, read_matrix, read_pgm

SMALL = reference_config_text().replace("grid.nx = 256", "grid.nx = 9").replace("grid.ny = 256", "grid.ny = 9")
SMALL = SMALL.replace("quad.radial_points = 128", "quad.radial_points = 16").replace(
    "quad.azimuthal_points = 256", "quad.azimuthal_points = 32").replace(
    "quad.max_doublings = 2", "quad.max_doublings = 1")

R_AS = 0.48657863352005648


@pytest.fixture
def small_cfg(tmp_path):
    p = tmp_path / "small.cfg"
    p.write_text(SMALL, encoding="utf-8")
    return p


def summary(out):
    return json.loads((out / "summary.json").read_text(encoding="utf-8"))


def test_indices(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["indices", "--out", str(out)]) == 0
    s = summary(out)
    assert s["ok"] and s["command"] == "indices"
    assert s["results"]["cone_geometry"]["r_as"] == pytest.approx(R_AS, rel=1e-12)
    assert s["results"]["indices"]["walkoff"] == pytest.approx(-0.0679, abs=1e-4)
    assert (out / "config.cfg").read_text(encoding="utf-8").startswith("crystal.")
    assert "n_eff" in capsys.readouterr().out


def test_as_both(tmp_path, small_cfg):
    out = tmp_path / "o"
    assert main(["as", "--config", str(small_cfg), "--out", str(out), "--both", "--scale", "log"]) == 0
    g = read_grid(out / "as_numeric.kgrid")
    assert g.values.shape == (9, 9)
    assert read_pgm(out / "as_analytic.pgm").shape == (9, 9)
    res = summary(out)["results"]
    assert res["as_numeric"]["failed_cells"] == 0


def test_cas_zoom(tmp_path, small_cfg):
    out = tmp_path / "o"
    cfg = small_cfg.read_text(encoding="utf-8") + "cas.idler_kx = 0 µm⁻¹\ncas.idler_ky = 0.48 µm⁻¹\n"
    small_cfg.write_text(cfg, encoding="utf-8")
    assert main(["cas", "--config", str(small_cfg), "--out", str(out), "--both", "--zoom", "0.08"]) == 0
    res = summary(out)["results"]
    assert res["grid"]["ky_range"] == pytest.approx([-0.56, -0.40])
    assert res["cas_analytic"]["closed_form"]["k0_perp"][1] == pytest.approx(-0.48, abs=1e-3)
    assert (out / "cas_numeric.kgrid").exists()


def test_cas_needs_idler(tmp_path, small_cfg):
    assert main(["cas", "--config", str(small_cfg), "--out", str(tmp_path)]) == 1
    assert not summary(tmp_path)["ok"]


def test_oam(tmp_path, small_cfg):
    text = small_cfg.read_text(encoding="utf-8")
    text = text.replace("pump.cone_radius = 0.05", "pump.cone_radius = 0.01").replace(
        "pump.width = 0.0007", "pump.width = 0.0005")
    for side in ("signal", "idler"):
        text = text.replace(f"oam.ell_{side}_min = -15", f"oam.ell_{side}_min = -3").replace(
            f"oam.ell_{side}_max = 15", f"oam.ell_{side}_max = 3")
    text = text.replace("quad.azimuthal_points = 32", "quad.azimuthal_points = 64")
    small_cfg.write_text(text, encoding="utf-8")
    out = tmp_path / "o"
    assert main(["oam", "--config", str(small_cfg), "--out", str(out)]) == 0
    res = summary(out)["results"]
    assert res["argmax"] == [0, 0]
    m = read_matrix(out / "oam_matrix.koam")
    assert m.amplitudes.shape == (7, 7)
    rows = (out / "marginals.csv").read_text(encoding="utf-8").splitlines()
    assert rows[0] == "ell,signal,idler" and len(rows) == 8
    assert sum(float(r.split(",")[1]) for r in rows[1:]) == pytest.approx(1.0)


def test_sweep(tmp_path, small_cfg):
    small_cfg.write_text(small_cfg.read_text(encoding="utf-8")
                         + "sweep.length = 1, 2 mm\n", encoding="utf-8")
    out = tmp_path / "o"
    assert main(["sweep", "--command", "indices", "--config", str(small_cfg), "--out", str(out)]) == 0
    pts = summary(out)["results"]["points"]
    assert [p["values"]["length"] for p in pts] == [1000.0, 2000.0]
    assert summary(out / "point_001")["config"]["crystal"]["length"] == 2000.0


def test_sweep_without_values(tmp_path, small_cfg):
    assert main(["sweep", "--config", str(small_cfg), "--out", str(tmp_path)]) == 1


def test_validate_subset(tmp_path):
    assert main(["validate", "--criteria", "1,2", "--out", str(tmp_path)]) == 0
    crit = summary(tmp_path)["results"]["criteria"]
    assert [c["criterion"] for c in crit] == [1, 2] and all(c["passed"] for c in crit)


def test_exit_codes(tmp_path, capsys):
    assert main(["indices", "--config", str(tmp_path / "nope.cfg")]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("crystal.length = 1\n", encoding="utf-8")
    assert main(["indices", "--config", str(bad), "--out", str(tmp_path)]) == 1
    assert "line 1" in capsys.readouterr().err
    assert main(["frobnicate"]) == 2
    assert main(["cas", "--zoom", "-1", "--out", str(tmp_path)]) == 2
