"""Command-line front end: exit codes, output contract (CSV format,
manifest) and determinism."""

import csv
import json
import math

import pytest

from hyplab.cli import run


def read_manifest(out):
    return json.loads((out / "manifest.json").read_text())


def test_geom_check_success(tmp_path):
    out = tmp_path / "o"
    assert run(["geom-check", "--out", str(out)]) == 0
    man = read_manifest(out)
    assert man["command"].startswith("hyplab geom-check")
    assert man["seed"] == 0
    assert man["wall_time"] >= 0.0
    assert man["outputs"]


def test_usage_error_exit_2(tmp_path):
    assert run(["no-such-command"]) == 2
    assert run(["selberg", "bogus-action"]) == 2


def test_numerical_failure_exit_1(tmp_path):
    out = tmp_path / "o"
    # an unreachable tolerance must fail loudly, not silently succeed
    code = run(["geom-check", "--tol", "1e-18", "--out", str(out)])
    assert code == 1
    err = json.loads((out / "error.json").read_text())
    assert err["error"] and err["message"]
    assert not (out / "manifest.json").exists()


def test_group_injrad_value(tmp_path):
    out = tmp_path / "o"
    assert run(["group", "injrad", "--group", "bolza",
                "--rcap", "4.0", "--out", str(out)]) == 0
    doc = json.loads((out / "injrad.json").read_text())
    assert doc["injectivity_radius"] == pytest.approx(
        math.acosh(1.0 + math.sqrt(2.0)), abs=1e-9)


def test_csv_format_contract(tmp_path):
    out = tmp_path / "o"
    assert run(["group", "ball", "--group", "bolza", "--radius", "4",
                "--out", str(out)]) == 0
    raw = (out / "group_ball.csv").read_bytes()
    assert b"\r" not in raw  # LF endings
    with open(out / "group_ball.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][0] == "word"  # header row
    assert len(rows) == 9  # 8 shell elements + header
    float(rows[1][-1])  # numeric body


def test_rerun_byte_identical_and_thread_independent(tmp_path):
    outs = []
    for i, threads in enumerate(("1", "1", "4")):
        out = tmp_path / f"o{i}"
        assert run(["group", "ball", "--group", "bolza", "--radius", "4",
                    "--seed", "3", "--threads", threads,
                    "--out", str(out)]) == 0
        outs.append(out)
    bodies = [(o / "group_ball.csv").read_bytes() for o in outs]
    assert bodies[0] == bodies[1] == bodies[2]
    hashes = [read_manifest(o)["config_hash"] for o in outs]
    assert hashes[0] == hashes[1]  # same config -> same hash
    assert hashes[2] != hashes[0]  # --threads is part of the config


def test_selberg_roundtrip_passes_default_tol(tmp_path):
    out = tmp_path / "o"
    assert run(["selberg", "roundtrip", "--kernel", "disc", "--t", "1",
                "--out", str(out)]) == 0
    doc = json.loads((out / "roundtrip.json").read_text())
    assert doc["sup_error"] <= 1e-5


def test_trace_weyl_csv(tmp_path):
    out = tmp_path / "o"
    assert run(["trace", "weyl", "--window", "1.25,4.25",
                "--out", str(out)]) == 0
    assert (out / "manifest.json").exists()


def test_qe_subcommand(tmp_path):
    import numpy as np
    from hyplab.synthetic import flat_mesh_eigendata
    from hyplab.trace import save_eigendata

    E = flat_mesh_eigendata(30, 10, volume=2.0, seed=3, lam_scale=4.0)
    eig = tmp_path / "eig.json"
    save_eigendata(E, eig)
    obs = tmp_path / "obs.json"
    obs.write_text(json.dumps(
        {"values": list(np.sin(E.mesh_points[:, 0]))}))
    out = tmp_path / "o"
    assert run(["qe", "--eigen", str(eig), "--observable", str(obs),
                "--interval", "0.5,3.5", "--R", "1.5", "--ell-min", "3",
                "--rho-gap", "0.5", "--out", str(out)]) == 0
    doc = json.loads((out / "qe_report.json").read_text())
    assert doc["count"] >= 1
    assert doc["bound_main"] > 0.0
