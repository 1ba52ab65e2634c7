"""The approximation operators P_N, Q_N, P^0_N and t_N, plus error/rate measurement.

    t_N f(z)  = integral K_N(z, z') f(z') dV_M(z')
    P_N f     = t_N f / E_N
    Q_N f     = Vol(M) / (d_N + 1) * t_N f
    P^0_N f   = P_N f - tr T_{f,N} / (d_N + 1)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateFit, ValidationError
from .geometry import ModelGeometry, SpherePoint, as_points
from .kernels import KernelEvaluator
from .quadrature import QuadratureRule, integrate
from .sections import orthonormal_basis
from .toeplitz import ToeplitzMatrix, moment_map_value, rule_for, toeplitz_matrix


def _out(y, vals):
    return float(vals[0]) if isinstance(y, SpherePoint) else vals


def _values_at_nodes(f, rule: QuadratureRule) -> np.ndarray:
    if isinstance(f, (list, tuple)):
        return np.column_stack([np.asarray(g(rule.points), dtype=float) for g in f])
    return np.asarray(f(rule.points), dtype=float)


def apply_tN(ev: KernelEvaluator, f, y, rule: QuadratureRule | None = None):
    """t_N f at the points y. ``f`` may be a list of functions (one column each)."""
    rule = rule or rule_for(ev.basis, f)
    return _out(y, ev.smooth(_values_at_nodes(f, rule), as_points(y), rule))


def apply_PN(ev: KernelEvaluator, f, y, rule: QuadratureRule | None = None):
    pts = as_points(y)
    t = np.asarray(apply_tN(ev, f, pts, rule))
    E = ev.densities(pts)
    vals = t / (E if t.ndim == 1 else E[:, None])
    return _out(y, vals)


def apply_QN(ev: KernelEvaluator, f, y, rule: QuadratureRule | None = None):
    t = apply_tN(ev, f, y, rule)
    return ev.geom.volume / ev.dim * t


def apply_P0N(ev: KernelEvaluator, T: ToeplitzMatrix, y, rule: QuadratureRule | None = None):
    """Kernel-path value of P^0_N f, with f the symbol of ``T``."""
    return apply_PN(ev, T.f, y, rule) - T.trace / T.dim


def trace_mean_deviation(
    T: ToeplitzMatrix, geom: ModelGeometry, rule: QuadratureRule, f=None
) -> float:
    """|tr T / (d_N + 1) - mean of f over (M, dV_M)|."""
    f = T.f if f is None else f
    mean = integrate(rule, f, geom) / geom.volume
    return abs(T.trace / T.dim - mean)


def probe_grid(n_theta: int = 64, n_phi: int = 128, poles: bool = True) -> np.ndarray:
    """Latitude-longitude probe grid at cell-centred colatitudes, optionally plus both poles."""
    theta = (np.arange(n_theta) + 0.5) * math.pi / n_theta
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    pts = np.stack(
        [np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1
    ).reshape(-1, 3)
    if poles:
        pts = np.vstack([pts, [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]])
    return pts


def parse_grid(spec: str) -> tuple[int, int]:
    try:
        a, b = spec.lower().split("x")
        n_theta, n_phi = int(a), int(b)
    except ValueError:
        raise ValidationError(f"grid must look like 64x128, got {spec!r}") from None
    if n_theta < 1 or n_phi < 1:
        raise ValidationError(f"grid dimensions must be positive, got {spec!r}")
    return n_theta, n_phi


def apply_PN_coherent(ev: KernelEvaluator, f, y, rule: QuadratureRule | None = None):
    """P_N f as the coherent-state quotient <T e_x, e_x> / |e_x|^2.

    Same quadrature as :func:`apply_PN`, but O(d_N^2) per point once T is built.
    """
    T = toeplitz_matrix(ev.basis, f, rule or rule_for(ev.basis, f))
    return moment_map_value(ev.basis, T, y) + T.trace / T.dim


def error_stats(
    ev: KernelEvaluator, f, grid=None, rule=None, method: str = "kernel"
) -> tuple[float, float]:
    """(sup, mean) over the grid of |P_N f - f|.

    ``method`` is "kernel" (integrate K_N / E_N against f) or "coherent".
    """
    grid = probe_grid() if grid is None else as_points(grid)
    if method == "kernel":
        approx = apply_PN(ev, f, grid, rule)
    elif method == "coherent":
        approx = apply_PN_coherent(ev, f, grid, rule)
    else:
        raise ValidationError(f"unknown evaluation method {method!r}")
    err = np.abs(approx - f(grid))
    return float(err.max()), float(err.mean())


def sup_error(ev: KernelEvaluator, f, grid=None, rule=None, method: str = "kernel") -> float:
    return error_stats(ev, f, grid, rule, method)[0]


def density_ratio_error(ev: KernelEvaluator, grid=None) -> float:
    """sup over the grid of |E_N * 2 pi / N - 1| (leading Bergman density term)."""
    grid = probe_grid() if grid is None else as_points(grid)
    E = ev.densities(grid)
    return float(np.max(np.abs(E * 2 * math.pi / ev.N - 1.0)))


def rate_fit(points) -> tuple[float, float]:
    """Least-squares fit error ~ C * N**slope; returns (slope, C)."""
    pts = [(float(n), float(e)) for n, e in points]
    if len(pts) < 3:
        raise DegenerateFit(f"need at least 3 points, got {len(pts)}")
    if any(n <= 0 or e <= 0 or not math.isfinite(e) for n, e in pts):
        raise DegenerateFit("rate fit needs positive N and positive finite errors")
    x = np.log([n for n, _ in pts])
    y = np.log([e for _, e in pts])
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(math.exp(intercept))


@dataclass
class ApproxRecord:
    N: int
    d_N: int
    sup_error: float
    mean_abs_error: float
    trace_mean_deviation: float
    rule: dict = field(default_factory=dict)


@dataclass
class ApproxReport:
    records: list[ApproxRecord]
    slope: float | None = None
    constant: float | None = None

    def fit(self) -> "ApproxReport":
        self.slope, self.constant = rate_fit([(r.N, r.sup_error) for r in self.records])
        return self


def convergence_study(
    geom: ModelGeometry, f, N_list, grid=None, method: str = "kernel"
) -> ApproxReport:
    """Sup and mean errors of P_N f on the grid plus the trace deviation, per N."""
    grid = probe_grid() if grid is None else grid
    records = []
    for N in N_list:
        basis = orthonormal_basis(geom, N)
        ev = KernelEvaluator(basis)
        rule = rule_for(basis, f)
        sup, mean = error_stats(ev, f, grid, rule, method)
        T = toeplitz_matrix(basis, f, rule)
        dev = trace_mean_deviation(T, geom, rule, f)
        records.append(ApproxRecord(N, basis.dim - 1, sup, mean, dev, rule.describe()))
    report = ApproxReport(records)
    if len(records) >= 3 and all(r.sup_error > 0 for r in records):
        report.fit()
    return report
