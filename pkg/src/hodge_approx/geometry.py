"""The polarized Riemann sphere (P^1, O(k), h) and its Hopf chart.

The metric on L = O(k) is h = h_FS^k * exp(-psi) with psi a band-limited real
spherical-harmonic expansion. Its curvature form is

    omega = k * omega_FS + i d dbar psi = (k/2 + Laplacian(psi)/2) dA,

where dA is the round area element of the unit sphere (total 4*pi). Since the
complex dimension is one, the volume form dV_M equals omega.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NonPositiveCurvature, ValidationError
from .harmonics import real_spherical_harmonic

MAX_PSI_DEGREE = 4
DENSITY_FLOOR = 1e-9


@dataclass(frozen=True)
class SpherePoint:
    y1: float
    y2: float
    y3: float

    def __post_init__(self):
        r2 = self.y1**2 + self.y2**2 + self.y3**2
        if abs(r2 - 1.0) > 1e-12:
            raise ValidationError(f"point not on the unit sphere (|y|^2 = {r2!r})")

    @classmethod
    def from_vector(cls, v) -> "SpherePoint":
        v = np.asarray(v, dtype=float)
        v = v / np.linalg.norm(v)
        return cls(float(v[0]), float(v[1]), float(v[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.y1, self.y2, self.y3])


@dataclass(frozen=True)
class HomogeneousRep:
    """Unit vector (z0, z1) in C^2, a point of the circle bundle over [z0:z1]."""

    z0: complex
    z1: complex

    def __post_init__(self):
        r2 = abs(self.z0) ** 2 + abs(self.z1) ** 2
        if abs(r2 - 1.0) > 1e-12:
            raise ValidationError(f"representative not unit-normalized ({r2!r})")

    def rotate(self, theta: float) -> "HomogeneousRep":
        """The point e^{i theta} x of the fibre."""
        u = complex(math.cos(theta), math.sin(theta))
        return HomogeneousRep(u * self.z0, u * self.z1)

    def project(self) -> SpherePoint:
        y = hopf_project(np.array([self.z0]), np.array([self.z1]))[0]
        return SpherePoint(float(y[0]), float(y[1]), float(y[2]))


def as_points(y) -> np.ndarray:
    """Coerce a SpherePoint, a sequence of them, or an array to shape (n, 3)."""
    if isinstance(y, SpherePoint):
        return y.as_array()[None, :]
    if isinstance(y, (list, tuple)) and y and isinstance(y[0], SpherePoint):
        return np.array([p.as_array() for p in y])
    arr = np.asarray(y, dtype=float)
    return arr.reshape(-1, 3)


def hopf_lift(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized chart z = (cos(theta/2), sin(theta/2) e^{i phi}).

    The azimuth is taken to be 0 where y1 = y2 = 0.
    """
    points = as_points(points)
    y3 = np.clip(points[:, 2], -1.0, 1.0)
    w = points[:, 0] + 1j * points[:, 1]
    # divide by the larger of the two moduli so tiny |w| keeps its digits
    north = y3 >= 0
    a = np.sqrt(2.0 * (1.0 + np.abs(y3)))
    big = a / 2.0
    r = np.abs(w)
    small_n = w / a
    small_s = r / a
    z0 = np.where(north, big, small_s).astype(complex)
    phase = np.exp(1j * np.angle(w))
    z1 = np.where(north, small_n, big * phase)
    return z0, z1


def hopf_project(z0: np.ndarray, z1: np.ndarray) -> np.ndarray:
    """Hopf map C^2 -> R^3: y3 = |z0|^2 - |z1|^2, y1 + i y2 = 2 conj(z0) z1."""
    w = 2.0 * np.conj(z0) * z1
    y3 = np.abs(z0) ** 2 - np.abs(z1) ** 2
    return np.stack([w.real, w.imag, y3], axis=-1)


def sphere_to_homogeneous(y: SpherePoint) -> HomogeneousRep:
    z0, z1 = hopf_lift(y)
    return HomogeneousRep(complex(z0[0]), complex(z1[0]))


def hermitian_pairing(x: HomogeneousRep, xp: HomogeneousRep) -> complex:
    """<x, x'> = z0 conj(z0') + z1 conj(z1') on C^2."""
    return x.z0 * np.conj(xp.z0) + x.z1 * np.conj(xp.z1)


@dataclass(frozen=True)
class Perturbation:
    """psi = sum c * Y_{l,m}; the empty expansion is the round metric."""

    terms: tuple[tuple[int, int, float], ...] = ()

    def __post_init__(self):
        clean = []
        for term in self.terms:
            l, m, c = term
            l, m, c = int(l), int(m), float(c)
            if not 1 <= l <= MAX_PSI_DEGREE:
                raise ValidationError(f"perturbation degree must be in 1..{MAX_PSI_DEGREE}, got {l}")
            if abs(m) > l:
                raise ValidationError(f"invalid harmonic order m={m} for l={l}")
            clean.append((l, m, c))
        object.__setattr__(self, "terms", tuple(clean))

    @property
    def is_zero(self) -> bool:
        return all(c == 0.0 for _, _, c in self.terms)

    @property
    def degree(self) -> int:
        return max((l for l, _, c in self.terms if c != 0.0), default=0)

    def __call__(self, points) -> np.ndarray:
        points = as_points(points)
        out = np.zeros(len(points))
        for l, m, c in self.terms:
            out += c * real_spherical_harmonic(l, m, points)
        return out

    def laplacian(self, points) -> np.ndarray:
        """Exact round Laplace-Beltrami of psi."""
        points = as_points(points)
        out = np.zeros(len(points))
        for l, m, c in self.terms:
            out -= c * l * (l + 1) * real_spherical_harmonic(l, m, points)
        return out


def random_sphere_points(rng: np.random.Generator, n: int) -> np.ndarray:
    """n points uniformly distributed on S^2."""
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def validation_grid(n_theta: int = 64, n_phi: int = 64) -> np.ndarray:
    theta = (np.arange(n_theta) + 0.5) * math.pi / n_theta
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    pts = np.stack(
        [np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1
    ).reshape(-1, 3)
    return np.vstack([pts, [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]])


@dataclass(frozen=True)
class ModelGeometry:
    """Complex dimension one, bundle degree k, metric perturbation psi."""

    k: int
    psi: Perturbation = field(default_factory=Perturbation)

    dim = 1

    @property
    def volume(self) -> float:
        """Vol(M) = 2*pi*c_1(L) for a curve."""
        return 2 * math.pi * self.k

    @property
    def is_round(self) -> bool:
        return self.psi.is_zero

    def density(self, points) -> np.ndarray:
        """Density of dV_M against the round area element; no positivity check."""
        return 0.5 * self.k + 0.5 * self.psi.laplacian(points)

    def weight(self, points, N: int) -> np.ndarray:
        """exp(-N psi), the factor that h^N adds to |.|^2_{FS}."""
        if self.is_round:
            return np.ones(len(as_points(points)))
        return np.exp(-N * self.psi(points))


def make_geometry(k: int, psi: Perturbation | None = None) -> ModelGeometry:
    if int(k) != k or k < 1:
        raise ValidationError(f"bundle degree must be a positive integer, got {k!r}")
    geom = ModelGeometry(int(k), psi if psi is not None else Perturbation())
    dens = geom.density(validation_grid())
    if dens.min() <= DENSITY_FLOOR:
        raise NonPositiveCurvature(
            f"curvature density reaches {dens.min():.3g}; perturbation too large for k={k}"
        )
    return geom


def volume_density(geom: ModelGeometry, y) -> np.ndarray | float:
    """Density of dV_M = omega relative to dA; 1 for the round O(2)."""
    dens = geom.density(y)
    if np.any(dens <= DENSITY_FLOOR):
        raise NonPositiveCurvature(f"curvature density {dens.min():.3g} is not positive")
    return float(dens[0]) if isinstance(y, SpherePoint) else dens


def total_volume(geom: ModelGeometry, rule) -> float:
    from .quadrature import integrate

    return float(np.real(integrate(rule, lambda p: np.ones(len(p)), geom)))
