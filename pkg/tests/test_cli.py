import json

import numpy as np

import fatoulab.cli as cli
from fatoulab.measure import CalibrationResult


def write_config(tmp_path, payload, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(payload))
    return p


BASE = {
    "map": {"family": "exp_lambda", "lambda": 0.25},
    "window": [-2.0, 4.0, -3.0, 3.0],
    "resolution": [80, 80],
    "budgets": {"orbit": 150, "pullback": 100, "walk": 100000},
    "rng_seed": 7,
}


def test_malformed_json_exits_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    out = tmp_path / "out"
    code = cli.main(["render", "--config", str(bad), "--out", str(out)])
    assert code == 2
    assert not out.exists()  # no partial outputs


def test_schema_violations_exit_2(tmp_path):
    cases = [
        ("render", {}),  # no map
        ("render", {"map": {"family": "uncatalogued"}}),
        ("render", {**BASE, "window": [4, -2, -3, 3]}),
        ("render", {**BASE, "resolution": [1, 80]}),
        ("render", {**BASE, "budgets": {"orbit": 0, "pullback": 1, "walk": 1}}),
        ("render", {**BASE, "attractors": [[0.3]]}),
        ("periodic", BASE),  # missing seed_region
        ("access", {**BASE, "access": {"seed": [2.2, 0.0]}}),  # missing z0
        ("audit", {**BASE, "audit": {"region": {"center": [0, 0]}}}),  # no chain
        ("measure", {**BASE, "measure": {"basepoint": [0.3, 0.0], "walk_eps_cells": 0.5}}),
        ("scan", {**BASE, "scan": {"kind": "escaping", "probes": []}}),
        ("inner", {**BASE, "inner": {}}),
    ]
    for sub, payload in cases:
        cfg = write_config(tmp_path, payload)
        out = tmp_path / "out_schema"
        assert cli.main([sub, "--config", str(cfg), "--out", str(out)]) == 2, (sub, payload)
        assert not out.exists()


def test_render_end_to_end_and_byte_identical(tmp_path):
    cfg = write_config(tmp_path, BASE)
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert cli.main(["render", "--config", str(cfg), "--out", str(out1)]) == 0
    assert cli.main(["render", "--config", str(cfg), "--out", str(out2)]) == 0
    for name in ("grid.ppm", "grid.csv", "resolved_config.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    summary = json.loads((out1 / "summary.json").read_text())
    assert set(summary) >= {"subcommand", "config_hash", "wall_time", "outputs", "errors"}
    assert summary["errors"] == []
    header = (out1 / "grid.ppm").read_bytes()[:15]
    assert header.startswith(b"P6\n80 80\n255\n")


def test_resolved_config_echoes_defaults(tmp_path):
    cfg = write_config(tmp_path, BASE)
    out = tmp_path / "echo"
    assert cli.main(["render", "--config", str(cfg), "--out", str(out)]) == 0
    resolved = json.loads((out / "resolved_config.json").read_text())
    assert resolved["escape_radius"] == 50.0  # default filled in
    assert resolved["tolerances"]["orbit_tol"] == 1e-6
    assert "out_dir" not in resolved  # location is not a run parameter


def test_periodic_subcommand(tmp_path):
    payload = {**BASE, "resolution": [150, 150], "budgets": {"orbit": 250, "pullback": 150, "walk": 1},
               "periodic": {"seed_region": [2.0, 2.3, -0.1, 0.1], "max_period": 1}}
    cfg = write_config(tmp_path, payload)
    out = tmp_path / "per"
    assert cli.main(["periodic", "--config", str(cfg), "--out", str(out)]) == 0
    pt = json.loads((out / "points.json").read_text())
    assert abs(pt["point"][0] - 2.15329) < 1e-4
    assert pt["period"] == 1 and pt["repelling"]


def test_numerical_failure_exits_3(tmp_path):
    payload = {**BASE, "periodic": {"seed_region": [-1.9, -1.5, -2.9, -2.5], "max_period": 1}}
    cfg = write_config(tmp_path, payload)
    out = tmp_path / "fail3"
    assert cli.main(["periodic", "--config", str(cfg), "--out", str(out)]) == 3
    summary = json.loads((out / "summary.json").read_text())
    assert summary["errors"] and "NoReturnWithinBudget" in summary["errors"][0]


def test_calibration_failure_exits_4(tmp_path, monkeypatch):
    monkeypatch.setattr(
        cli, "calibrate_disk",
        lambda **kw: CalibrationResult(chi2_p=0.0, ks_stat=1.0, passed=False, samples=0),
    )
    payload = {**BASE, "measure": {"basepoint": [0.3574, 0.0], "n_samples": 100, "orbit_budget": 20}}
    cfg = write_config(tmp_path, payload)
    out = tmp_path / "fail4"
    assert cli.main(["measure", "--config", str(cfg), "--out", str(out)]) == 4
    summary = json.loads((out / "summary.json").read_text())
    assert "disk oracle failed" in summary["errors"][0]


def test_scan_subcommand(tmp_path):
    payload = {
        "map": {"family": "z_exp"},
        "scan": {"kind": "parabolic", "probes": [[-0.5, 0.0], [0.0, 0.0], [0.2, 0.0]], "budget": 2000},
    }
    cfg = write_config(tmp_path, payload)
    out = tmp_path / "scan"
    assert cli.main(["scan", "--config", str(cfg), "--out", str(out)]) == 0
    result = json.loads((out / "points.json").read_text())
    assert result["escaping"] == [[-0.5, 0.0]]
    assert result["interior_controls"] == [[0.2, 0.0]]
    assert result["fixed"] == [[0.0, 0.0]]


def test_inner_subcommand(tmp_path):
    payload = {
        "map": {"family": "z_exp"},
        "inner": {
            "blaschke": {"rotation": [1.0, 0.0], "zeros": [[0.0, 0.0], [0.0, 0.0]]},
            "candidate": {"num": [3, 0, 1], "den": [1, 0, 3]},
            "periods": [1, 2, 3],
        },
    }
    cfg = write_config(tmp_path, payload)
    out = tmp_path / "inner"
    assert cli.main(["inner", "--config", str(cfg), "--out", str(out)]) == 0
    result = json.loads((out / "points.json").read_text())
    assert result["periodic_counts"] == {"1": 1, "2": 3, "3": 7}
    assert result["candidate"]["circle_preserving"] is True
    assert result["candidate"]["maps_disk_in"] is False
    assert result["candidate"]["notes"]  # the g(0) = 3 anomaly is flagged
    rows = (out / "periodic_points.csv").read_text().strip().splitlines()
    assert rows[0] == "n,j,theta,residual"
    assert len(rows) == 1 + 1 + 3 + 7


def test_render_strips_lists_three_major_components(tmp_path):
    three_pi = 3 * np.pi
    payload = {
        "map": {"family": "z_plus_exp"},
        "window": [-2.0, 10.0, -three_pi, three_pi],
        "resolution": [300, 300],
        "budgets": {"orbit": 400, "pullback": 100, "walk": 1},
        "rng_seed": 7,
    }
    cfg = write_config(tmp_path, payload)
    out = tmp_path / "strips"
    assert cli.main(["render", "--config", str(cfg), "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["major_components"] == 3


def test_seed_override_changes_hash(tmp_path):
    cfg = write_config(tmp_path, BASE)
    out1, out2 = tmp_path / "s1", tmp_path / "s2"
    assert cli.main(["render", "--config", str(cfg), "--out", str(out1), "--seed", "1"]) == 0
    assert cli.main(["render", "--config", str(cfg), "--out", str(out2), "--seed", "2"]) == 0
    h1 = json.loads((out1 / "summary.json").read_text())["config_hash"]
    h2 = json.loads((out2 / "summary.json").read_text())["config_hash"]
    assert h1 != h2
