import csv
import json
import math
import subprocess
import sys

import pytest

from hodge_approx.cli import HEADERS, fmt, main, parse_manifest
from hodge_approx import ValidationError


def write(tmp_path, data, name="m.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return p


def run_cli(tmp_path, experiment, data, *extra):
    out = tmp_path / "out"
    code = main([experiment, "--manifest", str(write(tmp_path, data)), "--out", str(out), *extra])
    return code, out


def read_csv(path):
    with path.open(newline="") as fh:
        return list(csv.reader(fh))


ROUND = {"geometry": {"k": 2}}


def test_convergence_round_y3(tmp_path):
    data = {**ROUND, "N_list": [2, 4, 8, 16, 32], "f": {"y3": 1}}
    code, out = run_cli(tmp_path, "convergence", data, "--grid", "16x32")
    assert code == 0
    rows = read_csv(out / "convergence.csv")
    assert rows[0] == HEADERS["convergence"]
    for r in rows[1:]:
        assert float(r[2]) == pytest.approx(1 / (int(r[0]) + 1), abs=1e-9)
    summary = json.loads((out / "convergence_summary.json").read_text())
    assert summary["fit"]["slope"] == pytest.approx(-1, abs=0.15)
    assert summary["quadrature"]["32"]["refinement"]["passed"]
    assert summary["passed"]


def test_spectrum_round(tmp_path):
    code, out = run_cli(tmp_path, "spectrum", {**ROUND, "N_list": [4]}, "--grid", "16x32")
    assert code == 0
    rows = read_csv(out / "spectrum.csv")[1:]
    assert [int(r[1]) for r in rows] == list(range(9))
    assert float(rows[0][2]) == 1.0
    assert json.loads((out / "spectrum_summary.json").read_text())["passed"]


def test_trace_check_constant(tmp_path):
    code, out = run_cli(tmp_path, "trace-check", {**ROUND, "N_list": [8], "f": {"1": 1}})
    assert code == 0
    row = read_csv(out / "trace_check.csv")[1]
    assert float(row[2]) == pytest.approx(17, abs=1e-10)
    assert float(row[4]) <= 1e-10


@pytest.mark.parametrize("experiment", ["density", "gram-check", "approx", "dual-path"])
def test_other_experiments_perturbed(tmp_path, experiment):
    data = {"geometry": {"k": 2, "psi": [[2, 0, 0.1]]}, "N_list": [2, 4, 8], "f": {"y3^2": 1, "y1": 0.5}}
    code, out = run_cli(tmp_path, experiment, data, "--grid", "8x8")
    assert code == 0
    stem = experiment.replace("-", "_")
    rows = read_csv(out / f"{stem}.csv")
    assert rows[0] == HEADERS[experiment]
    summary = json.loads((out / f"{stem}_summary.json").read_text())
    assert summary["passed"], summary["checks"]
    assert set(summary["quadrature"]) == {"2", "4", "8"}


def test_csv_line_endings_and_precision(tmp_path):
    code, out = run_cli(tmp_path, "density", {**ROUND, "N_list": [1, 2, 4]}, "--grid", "4x4")
    raw = (out / "density.csv").read_bytes()
    assert b"\r" not in raw
    row = read_csv(out / "density.csv")[1]
    assert float(row[5]) == 3 / (4 * math.pi)
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(3) == "3"
    assert fmt(None) == ""


def test_determinism(tmp_path):
    data = {"geometry": {"k": 2, "psi": [[3, 1, 0.04]]}, "N_list": [3, 5], "f": {"y1*y2": 1}}
    bodies = []
    for i in range(2):
        out = tmp_path / f"o{i}"
        assert main(["dual-path", "--manifest", str(write(tmp_path, data)), "--out", str(out), "--seed", "7"]) == 0
        bodies.append((out / "dual_path.csv").read_bytes())
    assert bodies[0] == bodies[1]


@pytest.mark.parametrize(
    "data",
    [
        {"N_list": [1]},
        {**ROUND, "N_list": []},
        {**ROUND, "N_list": [4, 2]},
        {**ROUND, "N_list": [2, 2]},
        {"geometry": {"k": 0}, "N_list": [1]},
        {"geometry": {"k": 2, "psi": [[7, 0, 0.1]]}, "N_list": [1]},
        {**ROUND, "N_list": [1], "f": {"z9": 1}},
        {**ROUND, "N_list": [1], "grid": "big"},
        {**ROUND, "N_list": [1], "colour": "blue"},
        {**ROUND, "N_list": [1], "experiment": "spectrum"},
    ],
)
def test_validation_errors_exit_1(tmp_path, capsys, data):
    code, _ = run_cli(tmp_path, "density", data)
    assert code == 1
    assert "invalid input" in capsys.readouterr().err


def test_unreadable_manifest(tmp_path):
    assert main(["density", "--manifest", str(tmp_path / "missing.json")]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["density", "--manifest", str(bad)]) == 1


def test_bad_cli_grid(tmp_path):
    code, _ = run_cli(tmp_path, "density", {**ROUND, "N_list": [1]}, "--grid", "0x3")
    assert code == 1


def test_numerical_error_exit_2(tmp_path, capsys):
    data = {"geometry": {"k": 2, "psi": [[2, 0, 2.0]]}, "N_list": [1]}
    code, _ = run_cli(tmp_path, "density", data)
    assert code == 2
    assert "NonPositiveCurvature" in capsys.readouterr().err


def test_parse_manifest_defaults():
    m = parse_manifest({**ROUND, "N_list": [1, 3]})
    assert m.grid == (64, 128)
    assert m.method == "kernel"
    assert m.f.coeffs == {(0, 0, 0): 1.0}
    with pytest.raises(ValidationError):
        parse_manifest({**ROUND, "N_list": [1], "method": "magic"})


def test_module_entry_point(tmp_path):
    path = write(tmp_path, {**ROUND, "N_list": [1, 2]})
    proc = subprocess.run(
        [sys.executable, "-m", "hodge_approx", "gram-check", "--manifest", str(path), "--out", str(tmp_path / "o")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert "gram-check: passed" in proc.stdout
