import csv
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quaddomains import io
from quaddomains.cli import RunConfig, main
from quaddomains.conformal import disk_map


@settings(max_examples=200, deadline=None)
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_format_round_trips(x):
    text = io.format_float(x)
    assert float(text) == x
    assert io.format_float(float(text)) == text


@settings(max_examples=50, deadline=None)
@given(
    st.recursive(
        st.none() | st.booleans() | st.integers(-(10**6), 10**6) | st.floats(allow_nan=False, allow_infinity=False) | st.text(max_size=5),
        lambda kids: st.lists(kids, max_size=4) | st.dictionaries(st.text(max_size=4), kids, max_size=4),
        max_leaves=20,
    )
)
def test_dumps_round_trip(obj):
    text = io.dumps(obj)
    again = io.dumps(json.loads(text))
    assert again == text


def test_nonfinite_refused():
    with pytest.raises(ValueError):
        io.dumps({"x": float("nan")})


def test_map_document_round_trip(singular_maps, tmp_path):
    rec = singular_maps[0.02]
    path = tmp_path / "m.json"
    io.write_json(path, io.map_document(rec, {"k": 1}))
    text = path.read_text()
    back = io.map_from_document(io.read_json(path))
    assert back.digest() == rec.digest()
    assert io.dumps(json.loads(text)) + "\n" == text


def test_schema_rejects_bad_documents(tmp_path):
    doc = io.map_document(disk_map(), {})
    doc["schema_version"] = 99
    with pytest.raises(io.DocumentError, match="schema_version"):
        io.validate(doc)
    with pytest.raises(io.DocumentError, match="unknown"):
        io.validate({"kind": "nothing"})


def test_measure_document():
    spec = io.measure_from_document({"modes": {"0": 1.0, "4": 0.25, "8": [0.1, 0.05]}})
    assert spec.density[8] == pytest.approx(0.1 + 0.05j)
    assert spec.density[-4] == pytest.approx(0.25)
    with pytest.raises(io.DocumentError):
        io.measure_from_document({"modes": {"0": 1.0, "2": 0.25}})


def test_run_config_validation():
    RunConfig().validate()
    with pytest.raises(ValueError):
        RunConfig(modes=300, angles=512).validate()
    with pytest.raises(ValueError):
        RunConfig(series=100).validate()
    assert RunConfig(a_max=0.08, a_points=3).a_grid() == (0.0, 0.02, 0.04, 0.08)
    assert RunConfig(a_max=0.09, a_points=3, a_spacing="linear").a_grid() == pytest.approx((0, 0.03, 0.06, 0.09))


def test_selftest_exit_codes(capsys):
    small = ["--modes", "16", "--angles", "64", "--radial-nodes", "16"]
    assert main(["selftest", *small]) == 0
    assert main(["selftest", *small, "--fault", "radial-weights"]) == 1
    out = capsys.readouterr().out
    assert "first failing check: balayage diagonal" in out


def test_solve_consistent_summary(tmp_path, capsys):
    code = main(["solve", "--mode", "consistent", "--a-max", "0.05", "--a-points", "2", "--out", str(tmp_path)])
    assert code == 0
    line = [s for s in capsys.readouterr().out.splitlines() if "W + a Pi0 mu" in s][0]
    assert float(line.split("=")[-1]) <= 1e-9
    doc = io.read_json(tmp_path / "branch.json")
    assert doc["stop_reason"] == "completed" and len(doc["points"]) == 3
    with open(tmp_path / "geometry.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3 and all(float(r["circularity_deficit"]) < 1e-8 for r in rows)


def test_solve_truncated_branch_recorded(tmp_path, capsys):
    args = ["solve", "--a-max", "10", "--a-points", "5", "--modes", "63", "--angles", "128", "--radial-nodes", "32"]
    assert main([*args, "--out", str(tmp_path)]) == 0
    doc = io.read_json(tmp_path / "branch.json")
    assert doc["stop_reason"] in ("contraction_lost", "positivity_lost")
    assert doc["failed_a"] <= 10


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"mode": "consistent", "a-max": 0.02, "a_points": 1}))
    assert main(["solve", "--config", str(cfg), "--mode", "singular", "--out", str(tmp_path / "o")]) == 0
    doc = io.read_json(tmp_path / "o" / "branch.json")
    assert doc["config"]["mode"] == "singular"
    assert doc["config"]["a_max"] == 0.02
    cfg.write_text(json.dumps({"bogus": 1}))
    assert main(["solve", "--config", str(cfg)]) == 2


def test_audit_cli(tmp_path, capsys):
    assert main(["audit", "disk", "--out", str(tmp_path)]) == 0
    doc = io.read_json(tmp_path / "audit.json")
    assert doc["report"]["verdict"] == "DISK"
    assert main(["audit", "disk", "--c-override", "0.4", "--out", str(tmp_path)]) == 0
    doc = io.read_json(tmp_path / "audit.json")
    assert abs(doc["report"]["orth_residuals"][0] - 0.2) < 1e-12
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "map", "schema_version": 1}')
    assert main(["audit", str(bad)]) == 2
    assert main(["audit", str(tmp_path / "missing.json")]) == 2


def test_moments_and_export(tmp_path, capsys):
    assert main(["moments", "--n", "3", "4", "--a", "0", "0.001", "--out", str(tmp_path)]) == 0
    with open(tmp_path / "moments.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert all(float(r["abs"]) < 1e-14 for r in rows if r["n"] == "3" or float(r["a"]) == 0)
    with open(tmp_path / "moments_slope.csv") as fh:
        slopes = {r["n"]: r for r in csv.DictReader(fh)}
    assert abs(float(slopes["4"]["slope_re"]) + 0.2) <= 1e-4
    assert main(["export-boundary", "disk", "--points", "16", "--out", str(tmp_path)]) == 0
    pts = np.loadtxt(tmp_path / "disk_boundary.csv", delimiter=",", skiprows=1)
    assert pts.shape == (16, 2)
    assert np.allclose(np.hypot(pts[:, 0], pts[:, 1]), 1)
