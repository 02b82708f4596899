import json

import numpy as np
import pytest

from phasequant import fields, groupoid, io
from phasequant.cli import main
from phasequant.core import PhaseGrid

SMALL = ["--grid-n", "32", "--extent", "6"]


def test_field_csv_round_trip(tmp_path):
    g = PhaseGrid(3.0, 16)
    f = fields.hermite(g, 1, 2) * (1 + 0.5j)
    io.write_field(tmp_path / "f.csv", f)
    assert (tmp_path / "f.csv").read_text().splitlines()[0] == "q,p,re,im"
    back = io.read_field(tmp_path / "f.csv")
    assert back.grid == g
    np.testing.assert_array_equal(back.samples, f.samples)


def test_kernel_csv_round_trip(tmp_path):
    g = PhaseGrid(3.0, 8)
    K = groupoid.quantize(fields.gaussian(g), 0.5)
    io.write_kernel(tmp_path / "k.csv", K)
    back = io.read_kernel(tmp_path / "k.csv", g)
    np.testing.assert_array_equal(back.samples, K.samples)
    with pytest.raises(ValueError):
        io.read_kernel(tmp_path / "k.csv", PhaseGrid(4.0, 8))


def test_reader_rejects_bad_files(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("x,y,re,im\n0,0,1,0\n")
    with pytest.raises(ValueError):
        io.read_field(p)
    p.write_text("q,p,re,im\n0,0,1,0\n0,1,1,0\n1,0,1,0\n")
    with pytest.raises(ValueError):
        io.read_field(p)
    p.write_text("q,p,re,im\n-0.5,-0.5,1,0\n-0.5,0.5,1,0\n0.5,-0.5,1,0\n0.7,0.5,1,0\n")
    with pytest.raises(ValueError):
        io.read_field(p)


def test_json_handles_numpy(tmp_path):
    io.write_json(tmp_path / "a.json", {"x": np.float64(1.5), "z": 1 + 2j, "a": np.arange(2),
                                        "b": np.bool_(True)})
    assert io.read_json(tmp_path / "a.json") == {"a": [0, 1], "b": True, "x": 1.5, "z": [1.0, 2.0]}


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def test_star_fast(tmp_path):
    assert run(tmp_path, "star", *SMALL, "--f", "gaussian", "--g", "gaussian", "--hbar", "0.5") == 0
    m = io.read_json(tmp_path / "star.json")
    assert m["subcommand"] == "star" and m["config"]["method"] == "fast"
    assert set(m["artifacts"]) == {"star.csv", "star.svg"}
    assert io.read_field(tmp_path / "star.csv").grid == PhaseGrid(6.0, 32)


def test_star_direct_and_series(tmp_path):
    assert run(tmp_path, "star", *SMALL, "--method", "direct", "--targets", "0,0;1,0.5") == 0
    rows = (tmp_path / "star.csv").read_text().splitlines()
    assert rows[0] == "q,p,re,im" and len(rows) == 3
    assert run(tmp_path, "star", *SMALL, "--method", "series", "--order", "2") == 0


@pytest.mark.parametrize("args", [
    ["star", "--method", "direct"],
    ["star", "--hbar", "0"],
    ["star", "--hbar", "20"],
    ["star", "--grid-n", "15"],
    ["star", "--grid-n", "1024"],
    ["star", "--extent", "-1"],
    ["star", "--f", "no-such-field"],
    ["star", "--method", "direct", "--targets", "100,0"],
    ["frobnicate"],
    ["lattice", "--boundary", "free"],
])
def test_usage_errors_exit_2(tmp_path, args):
    assert run(tmp_path, *args) == 2


def test_check_failure_exits_1(tmp_path):
    # an aliased transform fails the round-trip check
    assert run(tmp_path, "quantize", "--grid-n", "16", "--extent", "8", "--hbar", "0.05") == 1
    m = io.read_json(tmp_path / "quantize.json")
    assert not m["checks"][0]["pass"]


def test_quantize(tmp_path):
    assert run(tmp_path, "quantize", *SMALL, "--hbar", "1.0") == 0
    m = io.read_json(tmp_path / "quantize.json")
    assert m["results"]["trivialization"] == "geodesic"
    assert {c["name"] for c in m["checks"]} == {"round_trip", "gaussian_oracle"}
    io.read_kernel(tmp_path / "kernel.csv", PhaseGrid(6.0, 32))


def test_act_routes(tmp_path):
    assert run(tmp_path, "act", *SMALL, "--route", "polarized", "--polarization", "momentum") == 0
    assert run(tmp_path, "act", *SMALL, "--route", "kernel", "--polarization", "real:1,1") == 0
    assert run(tmp_path, "act", *SMALL, "--route", "triangle", "--targets", "0,0") == 0
    assert run(tmp_path, "act", *SMALL, "--polarization", "real:0,0") == 2
    assert run(tmp_path, "act", *SMALL, "--profile", "gauss") == 2


def test_polarize_check(tmp_path):
    assert run(tmp_path, "polarize-check", *SMALL, "--no-ladder") == 0
    m = io.read_json(tmp_path / "polarize-check.json")
    assert m["results"]["polarization"] == "position"
    assert "ladder-errors" not in m["results"]


def test_lattice_and_scan(tmp_path):
    assert run(tmp_path, "lattice", *SMALL, "--refinement", "2") == 0
    m = io.read_json(tmp_path / "lattice.json")
    r = m["results"]
    assert (r["V"], r["E"], r["F"]) == (15, 30, 16)
    assert r["refinement_invariance_delta"] < 1e-6
    assert run(tmp_path, "hbar-scan", "--grid-n", "64", "--extent", "8", "--hbars", "0.4,0.2,0.1,0.05") == 0
    assert (tmp_path / "hbar_scan.svg").exists()
    assert io.read_json(tmp_path / "hbar-scan.json")["checks"][0]["pass"]


def test_config_file_overrides_flags(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# quantize settings\nhbar = 1.0\ngrid-n = 48\n")
    assert run(tmp_path, "quantize", *SMALL, "--config", str(cfg)) == 0
    conf = io.read_json(tmp_path / "quantize.json")["config"]
    assert conf["hbar"] == 1.0 and conf["grid_n"] == 48
    cfg.write_text("colour = blue\n")
    assert run(tmp_path, "quantize", "--config", str(cfg)) == 2
    cfg.write_text("grid-n = many\n")
    assert run(tmp_path, "quantize", "--config", str(cfg)) == 2


def test_outputs_are_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["star", *SMALL, "--g", "hermite-2", "--out", str(d)]) == 0
    for name in ("star.csv", "star.svg"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    ja, jb = json.loads((a / "star.json").read_text()), json.loads((b / "star.json").read_text())
    ja["config"].pop("out"), jb["config"].pop("out")
    assert ja == jb
