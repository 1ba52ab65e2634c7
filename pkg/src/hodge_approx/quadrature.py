"""Gauss-Legendre x uniform-azimuth product rules on S^2.

A rule with ``n_t`` Legendre nodes in t = cos(theta) and ``n_phi`` equispaced
azimuths integrates every polynomial in (y1, y2, y3) of total degree
``min(2 n_t - 1, n_phi - 1)`` exactly against the round area element.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np
from scipy.fft import next_fast_len

from .errors import NonFiniteIntegrand, QuadratureUnderresolved
from .geometry import ModelGeometry, SpherePoint

DEFAULT_OVERSAMPLE = 2
REFINEMENT_TOL = 1e-9
MAX_INFLATIONS = 3


def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1]."""
    if n < 1:
        raise ValueError("need at least one node")
    return np.polynomial.legendre.leggauss(n)


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray
    n_t: int
    n_phi: int
    refinement: dict | None = field(default=None)
    structured: bool = False  # points laid out as an (n_t, n_phi) ring grid

    @property
    def exact_poly_degree(self) -> int:
        return min(2 * self.n_t - 1, self.n_phi - 1)

    @property
    def size(self) -> int:
        return len(self.weights)

    def nodes(self) -> Iterator[tuple[SpherePoint, float]]:
        for p, w in zip(self.points, self.weights):
            yield SpherePoint(*map(float, p)), float(w)

    def describe(self) -> dict:
        out = {
            "n_t": self.n_t,
            "n_phi": self.n_phi,
            "exact_poly_degree": self.exact_poly_degree,
            "n_nodes": self.size,
        }
        if self.refinement is not None:
            out["refinement"] = dict(self.refinement)
        return out


def product_rule(n_t: int, n_phi: int) -> QuadratureRule:
    if n_t < 1 or n_phi < 1:
        raise ValueError("n_t and n_phi must be positive")
    t, wt = gauss_legendre(n_t)
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    s = np.sqrt(1.0 - t**2)
    pts = np.stack(
        [
            np.outer(s, np.cos(phi)),
            np.outer(s, np.sin(phi)),
            np.repeat(t[:, None], n_phi, axis=1),
        ],
        axis=-1,
    ).reshape(-1, 3)
    w = np.repeat(wt * (2 * math.pi / n_phi), n_phi)
    return QuadratureRule(pts, w, n_t, n_phi, structured=True)


def rule_for_degree(d: int) -> QuadratureRule:
    """Product rule exact to total degree d, with an FFT-friendly azimuth count."""
    d = max(int(d), 0)
    return product_rule(d // 2 + 1, next_fast_len(d + 1))


def integrate(
    rule: QuadratureRule,
    f: Callable[[np.ndarray], np.ndarray] | np.ndarray,
    geom: ModelGeometry | None = None,
):
    """Sum of w * f(y) * density(y); ``geom=None`` means the round area element.

    ``f`` is either a vectorized callable on (n, 3) point arrays or the array of
    its values at ``rule.points`` (trailing axes are integrated independently).
    """
    vals = f(rule.points) if callable(f) else f
    vals = np.asarray(vals)
    if not np.all(np.isfinite(vals)):
        raise NonFiniteIntegrand("integrand is not finite at some quadrature node")
    w = rule.weights if geom is None else rule.weights * geom.density(rule.points)
    out = np.tensordot(w, vals, axes=(0, 0))
    if np.ndim(out) == 0:
        return complex(out) if np.iscomplexobj(out) else float(out)
    return out


def _probe_gram_entries(rule: QuadratureRule, geom: ModelGeometry, N: int) -> np.ndarray:
    """A few normalized monomial L^2 pairings, used as the refinement probe.

    Entries are the Gram diagonal at three indices plus one normalized
    off-diagonal entry, with u = |z0|^2 and monomials of degree n = kN.
    """
    n = geom.k * N
    pts = rule.points
    u = (1.0 + pts[:, 2]) / 2.0
    v = 1.0 - u
    half = (pts[:, 0] + 1j * pts[:, 1]) / 2.0  # z1 * conj(z0)
    weight = rule.weights * geom.density(pts) * geom.weight(pts, N)
    a = n // 2
    diag = {}
    for j in sorted({0, a, n, min(a + 1, n)}):
        diag[j] = float(np.sum(weight * u**j * v ** (n - j)))
    off = 0.0j
    if n >= 1:
        # m_a * conj(m_{a+1}) = u^a v^(n-a-1) * z1 conj(z0)
        b = min(a + 1, n)
        if b != a:
            off = complex(np.sum(weight * u**a * v ** (n - b) * half))
            off /= math.sqrt(diag[a] * diag[b])
    vals = [diag[0], diag[a], diag[n]]
    return np.array([*vals, off])


def refinement_delta(rule: QuadratureRule, geom: ModelGeometry, N: int) -> float:
    """Max relative change of the probe entries when n_t and n_phi are doubled."""
    coarse = _probe_gram_entries(rule, geom, N)
    fine = _probe_gram_entries(product_rule(2 * rule.n_t, 2 * rule.n_phi), geom, N)
    scale = np.where(np.arange(len(coarse)) < 3, np.abs(fine), 1.0)
    return float(np.max(np.abs(coarse - fine) / scale))


def recommended_rule(
    N: int,
    geom: ModelGeometry,
    extra_degree: int = 0,
    oversample: int = DEFAULT_OVERSAMPLE,
) -> QuadratureRule:
    """Rule exact to degree 2kN + extra_degree, inflated and refinement-checked if psi != 0.

    Raises QuadratureUnderresolved if the refinement check still fails after
    ``MAX_INFLATIONS`` doublings.
    """
    if N < 1:
        raise ValueError("N must be positive")
    degree = 2 * geom.k * N + max(int(extra_degree), 0)
    if not geom.is_round:
        degree = oversample * (degree + 2 * geom.psi.degree)
    rule = rule_for_degree(degree)
    deltas = []
    for attempt in range(MAX_INFLATIONS + 1):
        delta = refinement_delta(rule, geom, N)
        deltas.append(delta)
        if delta <= REFINEMENT_TOL:
            info = {"delta": delta, "passed": True, "inflations": attempt}
            return QuadratureRule(rule.points, rule.weights, rule.n_t, rule.n_phi, info, True)
        if attempt < MAX_INFLATIONS:
            rule = product_rule(2 * rule.n_t, 2 * rule.n_phi)
    raise QuadratureUnderresolved(
        f"probe Gram entries still move by {deltas[-1]:.3g} after {MAX_INFLATIONS} inflations"
    )
