import json
import math
import os
import subprocess

import numpy as np
import pytest

import bimembrane as bm


def test_project_cone():
    assert bm.project_cone(2.0, 1.0) == (2.0, 1.0)
    assert bm.project_cone(-1.0, -1.0) == (0.0, 0.0)
    a, b = bm.project_cone(0.0, 1.0)
    assert a == pytest.approx(0.5) and b == pytest.approx(0.5)


def test_presets_listed():
    names = bm.preset_names()
    assert "plane" in names and "signorini" in names


def test_plane_solve_recovers_half_plane():
    r = bm.solve("plane", h=1 / 32)
    pair = r["pair"]
    g = pair.grid
    y = g["y0"] + g["h"] * np.arange(g["ny"])
    exact = math.sqrt(0.7) * np.maximum(y, 0.0)[:, None]
    err = np.nanmax(np.abs(pair.u - exact))
    assert err < 0.1
    assert np.all(np.isnan(pair.u) == np.isnan(pair.v))
    assert bm.energy(pair, 0.05)["total_sharp"] > 0.0


def test_planted_frequency():
    pair = bm.planted(2.0, h=1 / 64)
    rows = bm.frequency_trace(pair, (0.0, 0.0), (0.0, 1.0), [0.2, 0.3, 0.4], half_plane_phases=True)
    for row in rows:
        assert row["Ntilde"] == pytest.approx(2.0, abs=0.05)


def test_flatness_of_planted_plane_part():
    pair = bm.planted(2.0, h=1 / 32, amplitude=0.0)
    cert = bm.flatness(pair, (0.0, 0.0), 0.5)
    assert cert["epsilon"] < 1e-6
    assert bm.boundary_samples(pair)


def test_signorini_small():
    out = bm.signorini(16)
    assert out["complementarity"] < 1e-6
    assert out["sup_error"] < 1e-2


@pytest.mark.skipif("BIMEMBRANE_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_grid_readable(tmp_path):
    cli = os.environ["BIMEMBRANE_CLI"]
    subprocess.run([cli, "solve", "--preset", "plane", "--set", "grid.h=0.0625", "--out", str(tmp_path)], check=True)
    summary = json.loads((tmp_path / "summary.json").read_text())
    u = bm.read_grid(str(tmp_path / "u.grid"))
    assert u["grid"]["nx"] == summary["nx"]
    with pytest.raises(bm.GridIoError):
        bm.read_grid(str(tmp_path / "summary.json"))
