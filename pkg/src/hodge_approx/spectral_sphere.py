"""Spectrum of P_N on the round sphere.

For the round O(2) the smoothing kernel is zonal,

    P_N(y, y') = (2N+1)/(4 pi) * ((1 + y.y')/2)^(2N),

so by Funk-Hecke it acts on degree-m harmonics as multiplication by

    chi_{m,2N} = 2 pi * integral_{-1}^{1} kernel(t) P_m(t) dt
               = (2N+1) (2N)!^2 / ((2N-m)! (2N+m+1)!),   m <= 2N,

and annihilates every harmonic of degree above 2N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .approximation import apply_PN, probe_grid
from .errors import EquivarianceViolation, ValidationError
from .geometry import as_points
from .harmonics import legendre, real_spherical_harmonic, zonal_harmonic
from .kernels import KernelEvaluator
from .quadrature import gauss_legendre, recommended_rule

__all__ = [
    "SpectralTable",
    "chi_via_operator",
    "chi_via_operator_many",
    "funk_hecke_chi",
    "funk_hecke_chi_quadrature",
    "legendre",
    "real_spherical_harmonic",
    "spectral_table",
]

EQUIVARIANCE_TOL = 1e-7


def funk_hecke_chi_exact(m: int, N: int) -> Fraction:
    if m < 0 or N < 1:
        raise ValueError("need m >= 0 and N >= 1")
    n = 2 * N
    if m > n:
        return Fraction(0)
    return Fraction(
        (n + 1) * math.factorial(n) ** 2,
        math.factorial(n - m) * math.factorial(n + m + 1),
    )


def funk_hecke_chi(m: int, N: int) -> float:
    return float(funk_hecke_chi_exact(m, N))


def funk_hecke_chi_quadrature(m: int, N: int) -> float:
    """Brute-force Funk-Hecke integral with an exact Gauss-Legendre rule."""
    n_nodes = (2 * N + m) // 2 + 2
    t, w = gauss_legendre(n_nodes)
    zonal = (2 * N + 1) / (4 * math.pi) * ((1 + t) / 2) ** (2 * N)
    return float(2 * math.pi * np.sum(w * zonal * legendre(m, t)))


@dataclass(frozen=True)
class SpectralTable:
    N: int
    chi: tuple[float, ...]

    @property
    def rows(self) -> list[tuple[int, float]]:
        return list(enumerate(self.chi))


def spectral_table(N: int) -> SpectralTable:
    return SpectralTable(N, tuple(funk_hecke_chi(m, N) for m in range(2 * N + 1)))


def chi_via_operator_many(
    ev: KernelEvaluator, degrees, grid=None, rule=None
) -> list[tuple[float, float]]:
    """(chi, residual) per degree l from applying P_N to Y_{l,0} on the grid.

    chi is the least-squares ratio of P_N Y_{l,0} to Y_{l,0}; the residual is
    the sup of P_N Y_{l,0} - chi Y_{l,0}.
    """
    if not ev.geom.is_round:
        raise ValidationError("the operator route to chi needs the round metric")
    degrees = list(degrees)
    grid = probe_grid() if grid is None else as_points(grid)
    rule = rule or recommended_rule(ev.N, ev.geom, extra_degree=max(degrees))
    fs = [_Zonal(l) for l in degrees]
    applied = np.asarray(apply_PN(ev, fs, grid, rule)).reshape(len(grid), len(fs))
    out = []
    for col, g in enumerate(fs):
        Y = g(grid)
        PY = applied[:, col]
        chi = float(np.dot(PY, Y) / np.dot(Y, Y))
        resid = float(np.max(np.abs(PY - chi * Y)))
        if resid > EQUIVARIANCE_TOL:
            raise EquivarianceViolation(
                f"P_N Y_{{{g.l},0}} is not a multiple of Y_{{{g.l},0}} (residual {resid:.3g})"
            )
        out.append((chi, resid))
    return out


def chi_via_operator(ev: KernelEvaluator, l: int, rule=None, grid=None) -> float:
    return chi_via_operator_many(ev, [l], grid, rule)[0][0]


class _Zonal:
    def __init__(self, l: int):
        self.l = l
        self.degree = l

    def __call__(self, points):
        return zonal_harmonic(self.l, as_points(points))
