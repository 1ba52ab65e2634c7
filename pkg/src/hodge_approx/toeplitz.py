"""Toeplitz matrices T_{f,N} = Pi_N f Pi_N on V_N and the moment-map evaluation of P^0_N."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Mapping

import numpy as np

from .errors import NonPositiveDensity, ValidationError
from .geometry import ModelGeometry, SpherePoint, as_points
from .quadrature import QuadratureRule, integrate, recommended_rule
from .sections import SectionBasis

MAX_POLY_DEGREE = 8

_FACTOR = re.compile(r"^y([123])(?:\^(\d+))?$")


class TestFunction:
    """Real polynomial in (y1, y2, y3) restricted to the sphere.

    Stored as ``{(i, j, k): coefficient}`` for y1^i y2^j y3^k.
    """

    __test__ = False  # not a pytest class

    def __init__(self, coeffs: Mapping[tuple[int, int, int], float] | None = None):
        clean = {}
        for exps, c in (coeffs or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != 3 or min(exps) < 0:
                raise ValidationError(f"bad monomial exponents {exps}")
            if c != 0:
                clean[exps] = clean.get(exps, 0.0) + float(c)
        self.coeffs = {e: c for e, c in clean.items() if c != 0.0}
        if self.degree > MAX_POLY_DEGREE:
            raise ValidationError(f"polynomial degree {self.degree} exceeds {MAX_POLY_DEGREE}")

    @classmethod
    def parse(cls, mapping: Mapping[str, float]) -> "TestFunction":
        """From a map like ``{"1": 0.5, "y3^2": 1, "y1*y2": -2}``."""
        coeffs: dict[tuple[int, int, int], float] = {}
        for key, c in mapping.items():
            exps = [0, 0, 0]
            key = key.replace(" ", "")
            if key not in ("1", ""):
                for factor in key.split("*"):
                    m = _FACTOR.match(factor)
                    if m is None:
                        raise ValidationError(f"cannot parse monomial {key!r}")
                    exps[int(m.group(1)) - 1] += int(m.group(2) or 1)
            try:
                value = float(c)
            except (TypeError, ValueError):
                raise ValidationError(f"coefficient of {key!r} is not a number") from None
            coeffs[tuple(exps)] = coeffs.get(tuple(exps), 0.0) + value
        return cls(coeffs)

    @classmethod
    def constant(cls, c: float = 1.0) -> "TestFunction":
        return cls({(0, 0, 0): c})

    @classmethod
    def monomial(cls, i: int, j: int, k: int, c: float = 1.0) -> "TestFunction":
        return cls({(i, j, k): c})

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.coeffs), default=0)

    def __call__(self, points) -> np.ndarray:
        p = as_points(points)
        out = np.zeros(len(p))
        for (i, j, k), c in self.coeffs.items():
            out += c * p[:, 0] ** i * p[:, 1] ** j * p[:, 2] ** k
        return out

    def __add__(self, other: "TestFunction") -> "TestFunction":
        merged = dict(self.coeffs)
        for e, c in other.coeffs.items():
            merged[e] = merged.get(e, 0.0) + c
        return TestFunction(merged)

    def __mul__(self, scalar: float) -> "TestFunction":
        return TestFunction({e: scalar * c for e, c in self.coeffs.items()})

    __rmul__ = __mul__

    def __repr__(self) -> str:
        terms = []
        for (i, j, k), c in sorted(self.coeffs.items()):
            mono = "*".join(
                f"y{n}" + (f"^{e}" if e > 1 else "") for n, e in ((1, i), (2, j), (3, k)) if e
            )
            terms.append(f"{c:g}*{mono}" if mono else f"{c:g}")
        return f"TestFunction({' + '.join(terms) or '0'})"


@lru_cache(maxsize=64)
def _cached_rule(N: int, geom: ModelGeometry, extra: int) -> QuadratureRule:
    return recommended_rule(N, geom, extra_degree=extra)


def rule_for(basis: SectionBasis, f) -> QuadratureRule:
    """A rule exact for the Toeplitz integrand of a polynomial f (round case).

    ``f`` may also be a list of functions; the largest degree wins. Functions
    without a ``degree`` fall back to the basis rule.
    """
    fs = f if isinstance(f, (list, tuple)) else [f]
    degrees = [getattr(g, "degree", None) for g in fs]
    degree = None if None in degrees else max(degrees)
    if degree is None or degree == 0:
        return basis.rule
    return _cached_rule(basis.N, basis.geom, int(degree))


@dataclass(frozen=True, eq=False)
class ToeplitzMatrix:
    mat: np.ndarray
    N: int
    f: Callable

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.mat)))

    @property
    def hermitian_defect(self) -> float:
        return float(np.max(np.abs(self.mat - self.mat.conj().T)))


def toeplitz_matrix(
    basis: SectionBasis, f, rule: QuadratureRule | None = None
) -> ToeplitzMatrix:
    """Entries <f s_k, s_j>_{L^2} in the orthonormal basis."""
    rule = rule or rule_for(basis, f)
    S = basis.evaluate(rule.points)
    w = rule.weights * basis.geom.density(rule.points) * np.asarray(f(rule.points), dtype=float)
    mat = S.conj().T @ (w[:, None] * S)
    return ToeplitzMatrix(mat, basis.N, f)


def trace(T: ToeplitzMatrix) -> float:
    return T.trace


def trace_integral(basis: SectionBasis, f, rule: QuadratureRule | None = None) -> float:
    """Integral of E_N f dV_M."""
    rule = rule or rule_for(basis, f)
    S = basis.evaluate(rule.points)
    E = np.sum(np.abs(S) ** 2, axis=1)
    return float(integrate(rule, E * f(rule.points), basis.geom))


def trace_identity_residual(
    T: ToeplitzMatrix, basis: SectionBasis, rule: QuadratureRule | None = None
) -> float:
    return abs(T.trace - trace_integral(basis, T.f, rule))


def traceless(T: ToeplitzMatrix) -> ToeplitzMatrix:
    shift = T.trace / T.dim
    return ToeplitzMatrix(T.mat - shift * np.eye(T.dim), T.N, T.f)


def moment_map_value(basis: SectionBasis, T: ToeplitzMatrix, y) -> np.ndarray | float:
    """Pairing of the moment map at phi_N(z) with i T^0, as a coherent-state quotient.

    <T e_x, e_x> / |e_x|^2 - tr T / (d_N + 1).
    """
    pts = as_points(y)
    c = basis.evaluate(pts).conj()
    norm2 = np.sum(np.abs(c) ** 2, axis=1)
    if np.any(norm2 <= 1e-14):
        raise NonPositiveDensity("coherent state vanishes")
    quad = np.real(np.einsum("pj,jk,pk->p", c.conj(), T.mat, c))
    vals = quad / norm2 - T.trace / T.dim
    return float(vals[0]) if isinstance(y, SpherePoint) else vals

