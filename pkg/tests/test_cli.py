import json

import numpy as np
import pytest

from qilab import io
from qilab.cli import main


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def test_fmt_roundtrip(tmp_path):
    vals = [0.1, -1 / 3, 1e-300, 6.02214076e23]
    path = io.write_csv(tmp_path / "x.csv", ("a",), [[v] for v in vals])
    header, body = io.read_csv(path)
    assert header == ["a"]
    assert body[:, 0].tolist() == vals
    assert io.fmt(True) == "true" and io.fmt(3) == "3"


def test_atomic_write_leaves_no_temp(tmp_path):
    io.write_json(tmp_path / "d.json", {"x": np.float64(1.5), "ok": np.bool_(True)})
    assert sorted(p.name for p in tmp_path.iterdir()) == ["d.json"]
    assert json.loads((tmp_path / "d.json").read_text()) == {"x": 1.5, "ok": True}


def test_density_command(tmp_path):
    assert run(tmp_path, "density", "--v0", "1", "--a", "1", "--grid", "41") == 0
    header, body = io.read_csv(tmp_path / "density.csv")
    assert header == ["x", "t00r"]
    inside = np.abs(body[:, 0]) < 1
    assert np.all(body[inside, 1] < 0) and np.all(body[~inside, 1] == 0)
    rep = json.loads((tmp_path / "energy.json").read_text())
    assert list(rep) == ["v0", "a", "e_ke_closed", "e_ke_direct", "e_ke_profile", "rel_tol",
                         "kappa_max"]
    assert rep["e_ke_direct"] == pytest.approx(rep["e_ke_closed"], rel=1e-6)
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["command"] == "density" and "timestamp" in man and man["version"]


def test_free_density_command(tmp_path):
    assert run(tmp_path, "density", "--v0", "0", "--a", "1", "--grid", "21") == 0
    _, body = io.read_csv(tmp_path / "density.csv")
    assert np.all(body[:, 1] == 0)
    assert json.loads((tmp_path / "energy.json").read_text())["e_ke_closed"] == 0


def test_usage_errors(tmp_path, capsys):
    assert main(["density", "--v0", "1"]) == 1
    assert "usage" in capsys.readouterr().err
    assert main(["bogus"]) == 1
    assert run(tmp_path, "density", "--v0", "1", "--a", "-1") == 1
    assert run(tmp_path, "qi", "--v0", "1", "--a", "1", "--eta", "fast") == 1
    assert run(tmp_path, "oracle", "--v0", "1", "--a", "1", "--M", "64") == 1


def test_qi_command(tmp_path):
    assert run(tmp_path, "qi", "--v0", "1", "--a", "1", "--eta", "auto") == 0
    rep = json.loads((tmp_path / "qi.json").read_text())
    assert rep["violated"] is True and rep["eta"] == pytest.approx(rep["eta_star"] / 2)
    assert run(tmp_path, "qi", "--v0", "1", "--a", "1", "--eta", "1e6") == 0
    assert json.loads((tmp_path / "qi.json").read_text())["violated"] is False
    assert run(tmp_path, "qi", "--v0", "0", "--a", "1") == 0
    rep = json.loads((tmp_path / "qi.json").read_text())
    assert rep["e_ke"] == 0 and rep["eta_star"] == 0 and rep["violated"] is False


def test_pulses_t0_byte_identical(tmp_path):
    d1, d2 = tmp_path / "a", tmp_path / "b"
    assert main(["density", "--v0", "1", "--a", "1", "--grid", "61", "--out", str(d1)]) == 0
    assert main(["pulses", "--v0", "1", "--a", "1", "--grid", "61", "--t", "0,3",
                 "--out", str(d2)]) == 0
    assert (d1 / "density.csv").read_bytes() == (d2 / "pulses_t0.csv").read_bytes()
    rep = json.loads((d2 / "pulses.json").read_text())
    assert [s["t"] for s in rep["snapshots"]] == [0.0, 3.0]


def test_deterministic_outputs(tmp_path):
    d1, d2 = tmp_path / "a", tmp_path / "b"
    for d in (d1, d2):
        assert main(["modes", "--v0", "1", "--a", "1", "--k", "0.5,1,2", "--out", str(d)]) == 0
    assert (d1 / "overlaps.csv").read_bytes() == (d2 / "overlaps.csv").read_bytes()
    assert (d1 / "overlaps.csv").read_text().splitlines()[0] == "k,q,parity_pair,c"


def test_ramp_command(tmp_path):
    assert run(tmp_path, "ramp", "--v0", "0.1", "--a", "1", "--alpha", "10", "--kmax", "20",
               "--nk", "40") == 0
    assert (tmp_path / "ramp.csv").read_text().splitlines()[0] == "t,dEdt,D"
    rep = json.loads((tmp_path / "ramp.json").read_text())
    assert rep["delta_e"] < 0
    assert {"alpha", "delta_e", "e_ke", "post_ramp_eta_star", "post_ramp_violated"} <= set(rep)


def test_oracle_and_compare(tmp_path):
    assert run(tmp_path, "oracle", "--v0", "0", "--a", "1", "--M", "512", "--t", "0,2") == 0
    header, body = io.read_csv(tmp_path / "lattice_t2.csv")
    assert header == ["x", "t00"] and np.all(body[:, 1] == 0)
    assert run(tmp_path, "oracle", "--v0", "1", "--a", "1", "--M", "512") == 0
    rep = json.loads((tmp_path / "oracle.json").read_text())
    assert {"total_energy", "e_ke_continuum", "L", "M"} <= set(rep)
    assert run(tmp_path, "compare", "--v0", "1", "--a", "1", "--M", "512", "--grid", "41",
               "--t", "0") == 0
    assert (tmp_path / "compare.csv").read_text().splitlines()[0] == \
        "t,x,continuum,lattice,regulator_offset"
