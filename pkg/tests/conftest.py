import math
from functools import lru_cache

import numpy as np
import pytest

from hodge_approx import KernelEvaluator, Perturbation, TestFunction, make_geometry, orthonormal_basis

PSI_Y20 = Perturbation(((2, 0, 0.1),))


@pytest.fixture(scope="session")
def round_geom():
    return make_geometry(2)


@pytest.fixture(scope="session")
def pert_geom():
    return make_geometry(2, PSI_Y20)


@pytest.fixture(scope="session")
def rich_geom():
    """Non-zonal perturbation, breaks every symmetry the round and Y20 cases share."""
    return make_geometry(2, Perturbation(((2, 0, 0.1), (3, 1, 0.04), (1, -1, 0.05))))


@lru_cache(maxsize=None)
def _basis(k, terms, N):
    return orthonormal_basis(make_geometry(k, Perturbation(terms)), N)


@pytest.fixture(scope="session")
def basis_for():
    def get(geom, N):
        return _basis(geom.k, geom.psi.terms, N)

    return get


@pytest.fixture(scope="session")
def evaluator_for(basis_for):
    cache = {}

    def get(geom, N):
        key = (geom.k, geom.psi.terms, N)
        if key not in cache:
            cache[key] = KernelEvaluator(basis_for(geom, N))
        return cache[key]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(20241016)


def poly(spec):
    return TestFunction.parse(spec)


ONE = TestFunction.constant()
Y1 = poly({"y1": 1})
Y3 = poly({"y3": 1})
Y3SQ = poly({"y3^2": 1})
Y1Y2 = poly({"y1*y2": 1})


def sphere_moment(a, b, c):
    """Exact integral of y1^a y2^b y3^c over the unit sphere (area measure)."""
    if a % 2 or b % 2 or c % 2:
        return 0.0
    g = math.gamma
    return 2 * g((a + 1) / 2) * g((b + 1) / 2) * g((c + 1) / 2) / g((a + b + c + 3) / 2)


def fd_laplacian(fun, points, h=1e-4):
    """Finite-difference Laplace-Beltrami oracle.

    Extends fun homogeneously of degree 0 off the sphere, so the ambient
    Laplacian on |x| = 1 equals the spherical one.
    """
    points = np.atleast_2d(points)

    def ext(x):
        return fun(x / np.linalg.norm(x, axis=1, keepdims=True))

    out = -6 * ext(points)
    for axis in range(3):
        step = np.zeros(3)
        step[axis] = h
        out = out + ext(points + step) + ext(points - step)
    return out / h**2


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
