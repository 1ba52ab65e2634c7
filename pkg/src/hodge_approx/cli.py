"""approxctl: run named experiments from a JSON manifest and write CSV + JSON reports.

    approxctl <experiment> --manifest <path> [--out <dir>] [--grid 64x128] [--seed <u64>]

Exit codes: 0 success, 1 manifest/validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .approximation import (
    apply_P0N,
    apply_PN,
    apply_QN,
    apply_tN,
    convergence_study,
    density_ratio_error,
    parse_grid,
    probe_grid,
    rate_fit,
    trace_mean_deviation,
)
from .errors import DegenerateFit, NumericalError, ValidationError
from .geometry import ModelGeometry, Perturbation, make_geometry, random_sphere_points
from .kernels import KernelEvaluator
from .sections import closed_form_norms, orthonormal_basis
from .spectral_sphere import chi_via_operator_many, funk_hecke_chi, funk_hecke_chi_quadrature
from .toeplitz import (
    TestFunction,
    moment_map_value,
    rule_for,
    toeplitz_matrix,
    trace_integral,
)

EXPERIMENTS = ("density", "gram-check", "trace-check", "approx", "convergence", "spectrum", "dual-path")

HEADERS = {
    "density": ["N", "d_N", "E_min", "E_max", "density_ratio_sup", "round_expected"],
    "gram-check": [
        "N", "d_N", "orthonormality_residual", "condition_number",
        "closed_form_max_rel_error", "hermitian_defect", "refinement_delta",
    ],
    "trace-check": ["N", "d_N", "trace", "integral_EN_f", "residual", "trace_mean_deviation"],
    "approx": ["N", "y1", "y2", "y3", "f", "P_N", "Q_N", "t_N", "E_N", "P0_N"],
    "convergence": ["N", "d_N", "sup_error", "mean_abs_error", "trace_mean_deviation"],
    "spectrum": ["N", "m", "chi_closed_form", "chi_funk_hecke_quadrature", "chi_operator"],
    "dual-path": ["N", "point", "y1", "y2", "y3", "moment_map", "kernel", "abs_diff"],
}

DUAL_PATH_POINTS = 20
DENSITY_POINTS = 100


@dataclass
class Manifest:
    geometry: ModelGeometry
    N_list: list[int]
    f: TestFunction
    grid: tuple[int, int] = (64, 128)
    output: str = "reports"
    experiment: str | None = None
    method: str = "kernel"
    raw: dict = field(default_factory=dict)


def load_schema() -> dict:
    text = resources.files("hodge_approx").joinpath("manifest.schema.json").read_text()
    return json.loads(text)


def parse_manifest(data: dict) -> Manifest:
    """Validate against the shipped schema, then against the domain invariants."""
    try:
        jsonschema.validate(data, load_schema())
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ValidationError(f"manifest {path}: {exc.message}") from None
    N_list = list(data["N_list"])
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ValidationError("N_list must be strictly increasing")
    geo = data["geometry"]
    psi = Perturbation(tuple(tuple(t) for t in geo.get("psi", [])))
    geometry = make_geometry(geo["k"], psi)
    return Manifest(
        geometry=geometry,
        N_list=N_list,
        f=TestFunction.parse(data.get("f", {"1": 1.0})),
        grid=parse_grid(data.get("grid", "64x128")),
        output=data.get("output", "reports"),
        experiment=data.get("experiment"),
        method=data.get("method", "kernel"),
        raw=data,
    )


def fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _rules(basis_list) -> dict:
    return {str(b.N): b.rule.describe() for b in basis_list}


def _fit_or_none(points):
    try:
        slope, const = rate_fit(points)
    except DegenerateFit:
        return None
    return {"slope": slope, "constant": const}


# Each runner returns (rows, summary-extras) where extras hold "fit", "checks", "rules".


def run_density(m: Manifest, grid, rng):
    rows, bases, sups, round_ok = [], [], [], True
    k = m.geometry.k
    pts = random_sphere_points(rng, DENSITY_POINTS)
    for N in m.N_list:
        basis = orthonormal_basis(m.geometry, N)
        bases.append(basis)
        ev = KernelEvaluator(basis)
        E = ev.densities(grid)
        zs = density_ratio_error(ev, grid)
        sups.append((N, zs))
        expected = (k * N + 1) / (2 * math.pi * k) if m.geometry.is_round else None
        if expected is not None:
            Er = ev.densities(pts)
            round_ok &= bool(np.max(np.abs(Er / expected - 1)) <= 1e-9)
        rows.append([N, basis.dim - 1, E.min(), E.max(), zs, expected])
    checks = {"E_positive": all(r[2] > 0 for r in rows)}
    fit = _fit_or_none(sups)
    if m.geometry.is_round:
        checks["round_density_closed_form"] = round_ok
    if fit is not None:
        checks["density_ratio_slope_in_range"] = -1.3 <= fit["slope"] <= -0.7
    return rows, {"fit": fit, "checks": checks, "rules": _rules(bases)}


def run_gram_check(m: Manifest, grid, rng):
    rows, bases = [], []
    for N in m.N_list:
        basis = orthonormal_basis(m.geometry, N)
        bases.append(basis)
        G = basis.gram
        cf = None
        if m.geometry.is_round:
            ref = closed_form_norms(m.geometry.k, N)
            off = G - np.diag(np.diag(G))
            cf = max(
                float(np.max(np.abs(np.diag(G).real / ref - 1))),
                float(np.max(np.abs(off) / np.sqrt(np.outer(ref, ref)))),
            )
        herm = float(np.max(np.abs(G - G.conj().T)))
        rows.append([
            N, basis.dim - 1, basis.orthonormality_residual(), basis.condition_number,
            cf, herm, basis.rule.refinement["delta"],
        ])
    checks = {
        "orthonormality": all(r[2] <= 1e-10 for r in rows),
        "condition_number": all(r[3] <= 1e6 for r in rows),
    }
    if m.geometry.is_round:
        checks["round_closed_form"] = all(r[4] <= 1e-12 for r in rows)
    return rows, {"fit": None, "checks": checks, "rules": _rules(bases)}


def run_trace_check(m: Manifest, grid, rng):
    rows, bases = [], []
    for N in m.N_list:
        basis = orthonormal_basis(m.geometry, N)
        bases.append(basis)
        rule = rule_for(basis, m.f)
        T = toeplitz_matrix(basis, m.f, rule)
        integral = trace_integral(basis, m.f, rule)
        dev = trace_mean_deviation(T, m.geometry, rule, m.f)
        rows.append([N, basis.dim - 1, T.trace, integral, abs(T.trace - integral), dev])
    checks = {"trace_identity": all(r[4] <= 1e-9 for r in rows)}
    devs = [(r[0], r[5]) for r in rows]
    return rows, {"fit": _fit_or_none(devs), "checks": checks, "rules": _rules(bases)}


def run_approx(m: Manifest, grid, rng):
    rows, bases = [], []
    one_ok = True
    for N in m.N_list:
        basis = orthonormal_basis(m.geometry, N)
        bases.append(basis)
        ev = KernelEvaluator(basis)
        rule = rule_for(basis, m.f)
        T = toeplitz_matrix(basis, m.f, rule)
        t = apply_tN(ev, m.f, grid, rule)
        E = ev.densities(grid)
        P = t / E
        Q = apply_QN(ev, m.f, grid, rule)
        P0 = P - T.trace / T.dim
        ones = apply_PN(ev, TestFunction.constant(), grid[:64])
        one_ok &= bool(np.max(np.abs(ones - 1)) <= 1e-10)
        fv = m.f(grid)
        for i, y in enumerate(grid):
            rows.append([N, y[0], y[1], y[2], fv[i], P[i], Q[i], t[i], E[i], P0[i]])
    return rows, {"fit": None, "checks": {"P_N_one_is_one": one_ok}, "rules": _rules(bases)}


def run_convergence(m: Manifest, grid, rng):
    report = convergence_study(m.geometry, m.f, m.N_list, grid, m.method)
    rows = [
        [r.N, r.d_N, r.sup_error, r.mean_abs_error, r.trace_mean_deviation] for r in report.records
    ]
    fit = None
    checks = {"sup_ge_mean": all(r.sup_error >= r.mean_abs_error >= 0 for r in report.records)}
    if report.slope is not None:
        fit = {"slope": report.slope, "constant": report.constant}
        checks["slope_in_range"] = -1.2 <= report.slope <= -0.8
    rules = {str(r.N): r.rule for r in report.records}
    return rows, {"fit": fit, "checks": checks, "rules": rules}


def run_spectrum(m: Manifest, grid, rng):
    rows, bases = [], []
    checks = {
        "chi0_is_one": True, "strictly_decreasing": True, "non_projection": True,
        "closed_form_vs_quadrature": True,
    }
    if m.geometry.is_round:
        checks.update(operator_matches_closed_form=True, range_bound=True)
    for N in m.N_list:
        chis = [funk_hecke_chi(j, N) for j in range(2 * N + 1)]
        quad = [funk_hecke_chi_quadrature(j, N) for j in range(2 * N + 1)]
        op = [None] * (2 * N + 1)
        if m.geometry.is_round:
            basis = orthonormal_basis(m.geometry, N)
            bases.append(basis)
            measured = chi_via_operator_many(KernelEvaluator(basis), range(2 * N + 2), grid)
            op = [c for c, _ in measured[:-1]]
            checks["range_bound"] &= abs(measured[-1][0]) <= 1e-8
            checks["operator_matches_closed_form"] &= all(
                abs(a - b) <= 1e-8 for a, b in zip(op, chis)
            )
        checks["chi0_is_one"] &= abs(chis[0] - 1) <= 1e-12
        checks["strictly_decreasing"] &= all(b < a for a, b in zip(chis, chis[1:]))
        checks["non_projection"] &= all(c < 1 - 1e-9 for c in chis[1:])
        checks["closed_form_vs_quadrature"] &= all(abs(a - b) <= 1e-10 for a, b in zip(chis, quad))
        for j in range(2 * N + 1):
            rows.append([N, j, chis[j], quad[j], op[j]])
    return rows, {"fit": None, "checks": checks, "rules": _rules(bases)}


def run_dual_path(m: Manifest, grid, rng):
    rows, bases = [], []
    for N in m.N_list:
        basis = orthonormal_basis(m.geometry, N)
        bases.append(basis)
        ev = KernelEvaluator(basis)
        rule = rule_for(basis, m.f)
        T = toeplitz_matrix(basis, m.f, rule)
        pts = random_sphere_points(rng, DUAL_PATH_POINTS)
        mm = moment_map_value(basis, T, pts)
        kp = apply_P0N(ev, T, pts, rule)
        for i, y in enumerate(pts):
            rows.append([N, i, y[0], y[1], y[2], mm[i], kp[i], abs(mm[i] - kp[i])])
    checks = {"dual_path_agree": all(r[7] <= 1e-10 for r in rows)}
    return rows, {"fit": None, "checks": checks, "rules": _rules(bases)}


RUNNERS = {
    "density": run_density,
    "gram-check": run_gram_check,
    "trace-check": run_trace_check,
    "approx": run_approx,
    "convergence": run_convergence,
    "spectrum": run_spectrum,
    "dual-path": run_dual_path,
}


def write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(x) for x in row])


def run(experiment: str, manifest: Manifest, out_dir: Path, seed: int = 0) -> dict:
    """Execute one experiment; returns the summary that was written."""
    grid = probe_grid(*manifest.grid)
    rng = np.random.default_rng(seed)
    rows, extra = RUNNERS[experiment](manifest, grid, rng)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = experiment.replace("-", "_")
    csv_path = out_dir / f"{stem}.csv"
    write_csv(csv_path, HEADERS[experiment], rows)
    summary = {
        "experiment": experiment,
        "manifest": manifest.raw,
        "grid": list(manifest.grid),
        "seed": seed,
        "method": manifest.method,
        "csv": csv_path.name,
        "quadrature": extra["rules"],
        "fit": extra["fit"],
        "checks": extra["checks"],
        "passed": all(extra["checks"].values()),
    }
    (out_dir / f"{stem}_summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return summary


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="approxctl", description=__doc__.splitlines()[0])
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--manifest", required=True, type=Path)
    parser.add_argument("--out", type=Path, default=None, help="output directory")
    parser.add_argument("--grid", default=None, help="probe grid, e.g. 64x128")
    parser.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if not 0 <= args.seed < 2**64:
            raise ValidationError("seed must be an unsigned 64-bit integer")
        try:
            data = json.loads(args.manifest.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ValidationError(f"cannot read manifest: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ValidationError(f"manifest is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ValidationError("manifest must be a JSON object")
        manifest = parse_manifest(data)
        if manifest.experiment is not None and manifest.experiment != args.experiment:
            raise ValidationError(
                f"manifest names experiment {manifest.experiment!r}, command line {args.experiment!r}"
            )
        if args.grid is not None:
            manifest.grid = parse_grid(args.grid)
        out_dir = args.out if args.out is not None else Path(manifest.output)
        summary = run(args.experiment, manifest, out_dir, args.seed)
    except NumericalError as exc:
        print(f"approxctl: numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"approxctl: invalid input: {exc}", file=sys.stderr)
        return 1
    status = "passed" if summary["passed"] else "FAILED"
    print(f"{args.experiment}: {status} -> {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
