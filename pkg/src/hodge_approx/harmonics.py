"""Legendre polynomials and real spherical harmonics on the unit sphere."""

import math

import numpy as np
from scipy.special import lpmv


def legendre(m, t):
    """Legendre polynomial P_m(t) by the Bonnet three-term recurrence.

    Works elementwise on arrays; returns a float for scalar input.
    """
    if m < 0:
        raise ValueError("degree must be non-negative")
    t = np.asarray(t, dtype=float)
    p_prev = np.ones_like(t)
    if m == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    p = t.copy()
    for j in range(1, m):
        p_prev, p = p, ((2 * j + 1) * t * p - j * p_prev) / (j + 1)
    return p if p.ndim else float(p)


def zonal_harmonic(l, points):
    """Y_{l,0} for arbitrary degree, via the recurrence."""
    points = np.asarray(points, dtype=float)
    return math.sqrt((2 * l + 1) / (4 * math.pi)) * legendre(l, points[..., 2])


def real_spherical_harmonic(l, mm, points):
    """Real orthonormal spherical harmonic Y_{l,mm} evaluated at points (..., 3).

    Orthonormal for the round area measure (total area 4*pi). Positive ``mm``
    uses cos(mm*phi), negative ``mm`` uses sin(|mm|*phi).
    """
    if l < 0 or abs(mm) > l:
        raise ValueError(f"invalid harmonic index ({l}, {mm})")
    points = np.asarray(points, dtype=float)
    if mm == 0:
        return zonal_harmonic(l, points)
    m = abs(mm)
    t = np.clip(points[..., 2], -1.0, 1.0)
    phi = np.arctan2(points[..., 1], points[..., 0])
    norm = math.sqrt(
        2 * (2 * l + 1) / (4 * math.pi) * math.factorial(l - m) / math.factorial(l + m)
    )
    angular = np.cos(m * phi) if mm > 0 else np.sin(m * phi)
    return norm * lpmv(m, l, t) * angular
