"""Holomorphic sections of O(kN): monomials, L^2 Gram matrix, orthonormal basis.

A section of O(n) is a homogeneous polynomial of degree n = kN in (z0, z1).
Evaluated at a unit representative x = (z0, z1), with the factor
exp(-N psi / 2) attached, it gives the equivariant function s_hat(x) whose
modulus is the pointwise norm |s|_{h^N}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import GramNotPositiveDefinite
from .geometry import HomogeneousRep, ModelGeometry, as_points, hopf_lift, hopf_project
from .quadrature import QuadratureRule, recommended_rule

NODE_CHUNK = 16384


@dataclass(frozen=True)
class MonomialBasis:
    """Monomials of degree n; index j is z0^(n-j) z1^j, so j = 0 peaks at the north pole."""

    n: int

    @property
    def exponents(self) -> list[tuple[int, int]]:
        """(power of z0, power of z1) per index."""
        return [(self.n - j, j) for j in range(self.n + 1)]

    @property
    def dim(self) -> int:
        return self.n + 1


def _binomial_sqrt(n: int) -> np.ndarray:
    return np.sqrt(np.array([float(math.comb(n, a)) for a in range(n + 1)]))


def scaled_monomials(z0: np.ndarray, z1: np.ndarray, n: int) -> np.ndarray:
    """sqrt(C(n, j)) z0^(n-j) z1^j, shape (len(z0), n + 1); bounded by 1 on unit reps."""
    z0 = np.asarray(z0, dtype=complex)
    z1 = np.asarray(z1, dtype=complex)
    p0 = np.ones((len(z0), n + 1), dtype=complex)
    p1 = np.ones((len(z0), n + 1), dtype=complex)
    if n:
        p0[:, 1:] = np.cumprod(np.repeat(z0[:, None], n, axis=1), axis=1)
        p1[:, 1:] = np.cumprod(np.repeat(z1[:, None], n, axis=1), axis=1)
    return _binomial_sqrt(n) * p0[:, ::-1] * p1


def monomials(z0, z1, n: int) -> np.ndarray:
    """Plain monomials z0^(n-j) z1^j, j = 0..n."""
    return scaled_monomials(z0, z1, n) / _binomial_sqrt(n)


def closed_form_norms(k: int, N: int) -> np.ndarray:
    """Round-case squared L^2 norms 2*pi*k * j! (n-j)! / (n+1)! of the monomials."""
    n = k * N
    return np.array(
        [2 * math.pi * k / ((n + 1) * math.comb(n, a)) for a in range(n + 1)]
    )


def _scaled_gram(geom: ModelGeometry, N: int, rule: QuadratureRule) -> np.ndarray:
    n = geom.k * N
    G = np.zeros((n + 1, n + 1), dtype=complex)
    for lo in range(0, rule.size, NODE_CHUNK):
        pts = rule.points[lo : lo + NODE_CHUNK]
        w = rule.weights[lo : lo + NODE_CHUNK] * geom.density(pts) * geom.weight(pts, N)
        M = scaled_monomials(*hopf_lift(pts), n)
        G += M.conj().T @ (w[:, None] * M)
    return 0.5 * (G + G.conj().T)


def gram_matrix(geom: ModelGeometry, N: int, rule: QuadratureRule | None = None) -> np.ndarray:
    """G[a, b] = <m_b, m_a>_{L^2} = integral of conj(m_a) m_b e^{-N psi} dV_M.

    With this ordering conj(C).T @ G @ C is the Gram matrix of the sections
    whose monomial coefficients are the columns of C.
    """
    rule = rule or recommended_rule(N, geom)
    s = _binomial_sqrt(geom.k * N)
    return _scaled_gram(geom, N, rule) / np.outer(s, s)


@dataclass(frozen=True, eq=False)
class SectionBasis:
    """Orthonormal basis s_j = sum_a coeff[a, j] z0^(n-a) z1^a of V_N."""

    geom: ModelGeometry
    N: int
    gram: np.ndarray
    coeff: np.ndarray
    rule: QuadratureRule
    condition_number: float
    scaled_coeff: np.ndarray

    @property
    def n(self) -> int:
        return self.geom.k * self.N

    @property
    def dim(self) -> int:
        """d_N + 1."""
        return self.n + 1

    def evaluate_reps(self, z0, z1) -> np.ndarray:
        """s_hat_j(x) for unit representatives, shape (npts, d_N + 1)."""
        z0 = np.atleast_1d(np.asarray(z0, dtype=complex))
        z1 = np.atleast_1d(np.asarray(z1, dtype=complex))
        vals = scaled_monomials(z0, z1, self.n) @ self.scaled_coeff
        if not self.geom.is_round:
            pts = hopf_project(z0, z1)
            vals *= np.exp(-0.5 * self.N * self.geom.psi(pts))[:, None]
        return vals

    def evaluate(self, points) -> np.ndarray:
        """Section values at the chart representatives of sphere points."""
        return self.evaluate_reps(*hopf_lift(as_points(points)))

    def orthonormality_residual(self) -> float:
        eye = np.eye(self.dim)
        return float(np.max(np.abs(self.coeff.conj().T @ self.gram @ self.coeff - eye)))


def orthonormal_basis(
    geom: ModelGeometry, N: int, rule: QuadratureRule | None = None
) -> SectionBasis:
    """Cholesky orthonormalization of the monomial Gram matrix.

    The factorization is done on the Jacobi-equilibrated Gram matrix of the
    binomially scaled monomials; this is the same triangular factor up to a
    diagonal rescaling and keeps the condition number O(1) in the round case.
    """
    if N < 1:
        raise ValueError("N must be positive")
    rule = rule or recommended_rule(N, geom)
    n = geom.k * N
    G_scaled = _scaled_gram(geom, N, rule)
    d = np.sqrt(np.real(np.diag(G_scaled)))
    if not np.all(np.isfinite(d)) or np.any(d <= 0):
        raise GramNotPositiveDefinite("Gram matrix has a non-positive diagonal")
    G_eq = G_scaled / np.outer(d, d)
    try:
        L = np.linalg.cholesky(G_eq)
    except np.linalg.LinAlgError as exc:
        raise GramNotPositiveDefinite(str(exc)) from exc
    # G_eq = L L^H  =>  C_eq = L^{-H}
    C_eq = scipy.linalg.solve_triangular(L, np.eye(n + 1), lower=True).conj().T
    scaled_coeff = C_eq / d[:, None]
    s = _binomial_sqrt(n)
    eig = np.linalg.eigvalsh(G_eq)
    return SectionBasis(
        geom=geom,
        N=N,
        gram=G_scaled / np.outer(s, s),
        coeff=scaled_coeff * s[:, None],
        rule=rule,
        condition_number=float(eig[-1] / eig[0]),
        scaled_coeff=scaled_coeff,
    )


def eval_sections(basis: SectionBasis, x: HomogeneousRep) -> np.ndarray:
    return basis.evaluate_reps([x.z0], [x.z1])[0]
