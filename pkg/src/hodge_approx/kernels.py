"""Szegő kernel mode Pi_N, Bergman density E_N, kernel K_N and coherent states.

Everything is expressed through the orthonormal section values s_hat_j(x):

    Pi_N(x, x') = sum_j s_hat_j(x) conj(s_hat_j(x'))
    E_N(z)      = Pi_N(x, x)
    K_N(z, z')  = |Pi_N(x, x')|^2

Integrals over the circle bundle never appear; every quantity used downstream
is S^1-invariant and is integrated over the sphere directly.
"""

from __future__ import annotations

import numpy as np

from .errors import NonPositiveDensity
from .geometry import HomogeneousRep, SpherePoint, as_points
from .quadrature import QuadratureRule
from .sections import SectionBasis, scaled_monomials

DENSITY_FLOOR = 1e-14
TARGET_CHUNK = 512
RING_CHUNK_ELEMS = 1 << 21


class KernelEvaluator:
    """Kernel evaluations for one orthonormal basis.

    Section values at quadrature nodes are cached per rule, so repeated
    smoothing over the same rule costs one matrix product per target chunk.
    """

    def __init__(self, basis: SectionBasis):
        self.basis = basis
        self._node_cache: dict[int, tuple[QuadratureRule, np.ndarray, np.ndarray]] = {}

    @property
    def geom(self):
        return self.basis.geom

    @property
    def N(self) -> int:
        return self.basis.N

    @property
    def dim(self) -> int:
        return self.basis.dim

    def node_data(self, rule: QuadratureRule | None = None) -> tuple[np.ndarray, np.ndarray]:
        """(section values at nodes, w * dV_M density at nodes) for ``rule``."""
        rule = rule or self.basis.rule
        hit = self._node_cache.get(id(rule))
        if hit is None or hit[0] is not rule:
            S = self.basis.evaluate(rule.points)
            wd = rule.weights * self.geom.density(rule.points)
            hit = (rule, S, wd)
            self._node_cache[id(rule)] = hit
        return hit[1], hit[2]

    def densities(self, points) -> np.ndarray:
        S = self.basis.evaluate(points)
        E = np.sum(np.abs(S) ** 2, axis=1)
        if np.any(E <= DENSITY_FLOOR):
            raise NonPositiveDensity(f"E_N = {E.min():.3g} is not positive")
        return E

    def smooth(self, values, targets, rule: QuadratureRule | None = None) -> np.ndarray:
        """Integral of K_N(y, y') F(y') dV_M(y') for each target y.

        ``values`` holds F at the rule nodes, shape (nodes,) or (nodes, m).
        On ring-structured product rules the azimuthal sum of Pi_N(y, .) over
        each latitude ring is a DFT in the monomial index and is done by FFT;
        otherwise Pi_N is formed densely, O(nodes * d_N) per target.
        """
        rule = rule or self.basis.rule
        vals = np.asarray(values, dtype=float)
        squeeze = vals.ndim == 1
        targets = as_points(targets)
        if rule.structured and rule.n_phi > self.basis.n:
            out = self._smooth_rings(vals.reshape(rule.size, -1), targets, rule)
        else:
            out = self.smooth_dense(vals.reshape(rule.size, -1), targets, rule)
        return out[:, 0] if squeeze else out

    def smooth_dense(self, values, targets, rule: QuadratureRule | None = None) -> np.ndarray:
        S_nodes, wd = self.node_data(rule)
        F = wd[:, None] * np.asarray(values, dtype=float).reshape(len(wd), -1)
        targets = as_points(targets)
        out = np.empty((len(targets), F.shape[1]))
        SnH = S_nodes.conj().T
        for lo in range(0, len(targets), TARGET_CHUNK):
            St = self.basis.evaluate(targets[lo : lo + TARGET_CHUNK])
            B = St @ SnH
            K = B.real**2 + B.imag**2
            out[lo : lo + TARGET_CHUNK] = K @ F
        return out

    def _smooth_rings(self, values, targets, rule: QuadratureRule) -> np.ndarray:
        # Node (i, l) has z0 = c_i, z1 = s_i e^{i phi_l}, so
        # Pi_N(y, node) = e^{-N psi/2} sum_a v_a(y) r_{i,a} e^{-i a phi_l}
        # with r_{i,a} the scaled monomial moduli and v = S(y) conj(C)^T.
        n_t, n_phi, n = rule.n_t, rule.n_phi, self.basis.n
        t = rule.points[:, 2].reshape(n_t, n_phi)[:, 0]
        r = scaled_monomials(np.sqrt((1 + t) / 2), np.sqrt((1 - t) / 2), n).real
        wd = rule.weights * self.geom.density(rule.points)
        F = (wd[:, None] * values).reshape(n_t, n_phi, -1)
        if not self.geom.is_round:
            F = F * np.exp(-self.N * self.geom.psi(rule.points)).reshape(n_t, n_phi, 1)
        Ct = self.basis.scaled_coeff.conj().T
        out = np.empty((len(targets), F.shape[2]))
        chunk = max(1, RING_CHUNK_ELEMS // (n_t * n_phi))
        for lo in range(0, len(targets), chunk):
            V = self.basis.evaluate(targets[lo : lo + chunk]) @ Ct
            B = np.fft.fft(V[:, None, :] * r[None, :, :], n=n_phi, axis=2)
            K = B.real**2 + B.imag**2
            out[lo : lo + chunk] = np.tensordot(K, F, axes=([1, 2], [0, 1]))
        return out


def _rep_arrays(x):
    if isinstance(x, HomogeneousRep):
        return np.array([x.z0]), np.array([x.z1])
    z = np.asarray(x, dtype=complex).reshape(-1, 2)
    return z[:, 0], z[:, 1]


def bergman_B(ev: KernelEvaluator, x, xp) -> complex:
    """Pi_N(x, x') from the basis sum."""
    a = ev.basis.evaluate_reps(*_rep_arrays(x))
    b = ev.basis.evaluate_reps(*_rep_arrays(xp))
    vals = np.sum(a * b.conj(), axis=1)
    return complex(vals[0]) if len(vals) == 1 else vals


def density_E(ev: KernelEvaluator, y):
    E = ev.densities(as_points(y))
    return float(E[0]) if isinstance(y, SpherePoint) else E


def kernel_K(ev: KernelEvaluator, y, yp):
    """K_N(y, y') = |Pi_N|^2 for paired arrays of points (or single points)."""
    a = ev.basis.evaluate(as_points(y))
    b = ev.basis.evaluate(as_points(yp))
    K = np.abs(np.sum(a * b.conj(), axis=1)) ** 2
    return float(K[0]) if isinstance(y, SpherePoint) else K


def coherent_state(ev: KernelEvaluator, x) -> np.ndarray:
    """Coefficients conj(s_hat_j(x)) of e_{x,N} in the orthonormal basis."""
    c = ev.basis.evaluate_reps(*_rep_arrays(x)).conj()
    return c[0] if isinstance(x, HomogeneousRep) else c


def round_kernel_closed_form(k: int, N: int, y, yp) -> np.ndarray:
    """((kN+1)/(2 pi k))^2 ((1 + y.y')/2)^(kN) for the round metric."""
    y, yp = as_points(y), as_points(yp)
    n = k * N
    c = (n + 1) / (2 * np.pi * k)
    return c**2 * ((1.0 + np.sum(y * yp, axis=1)) / 2.0) ** n
