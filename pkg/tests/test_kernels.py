import math

import numpy as np
import pytest

from conftest import ONE, Y3SQ
from hodge_approx import (
    NonPositiveDensity,
    SpherePoint,
    bergman_B,
    coherent_state,
    density_E,
    kernel_K,
    sphere_to_homogeneous,
)
from hodge_approx.approximation import probe_grid
from hodge_approx.geometry import HomogeneousRep, ModelGeometry, Perturbation, hopf_lift, random_sphere_points
from hodge_approx.kernels import KernelEvaluator, round_kernel_closed_form

NORTH = SpherePoint(0.0, 0.0, 1.0)
SOUTH = SpherePoint(0.0, 0.0, -1.0)


def reps(points):
    z0, z1 = hopf_lift(points)
    return [HomogeneousRep(complex(a), complex(b)) for a, b in zip(z0, z1)]


def test_examples_round_n1(round_geom, evaluator_for):
    ev = evaluator_for(round_geom, 1)
    xn, xs = sphere_to_homogeneous(NORTH), sphere_to_homogeneous(SOUTH)
    assert bergman_B(ev, xn, xn) == pytest.approx(3 / (4 * math.pi), abs=1e-14)
    assert abs(bergman_B(ev, xn, xs)) <= 1e-15
    assert density_E(ev, SpherePoint(0.6, 0.0, 0.8)) == pytest.approx(0.2387324, abs=1e-7)
    assert kernel_K(ev, NORTH, NORTH) == pytest.approx((3 / (4 * math.pi)) ** 2, rel=1e-13)
    assert kernel_K(ev, SpherePoint(1.0, 0.0, 0.0), SpherePoint(-1.0, 0.0, 0.0)) <= 1e-15
    np.testing.assert_allclose(np.abs(coherent_state(ev, xn)), [math.sqrt(3 / (4 * math.pi)), 0, 0], atol=1e-14)


def test_density_n8(round_geom, evaluator_for):
    ev = evaluator_for(round_geom, 8)
    assert density_E(ev, SpherePoint(0.0, 1.0, 0.0)) == pytest.approx(17 / (4 * math.pi), rel=1e-12)


@pytest.mark.parametrize("N", [1, 5, 16])
def test_hermitian_symmetry(rich_geom, evaluator_for, rng, N):
    ev = evaluator_for(rich_geom, N)
    xs = reps(random_sphere_points(rng, 20))
    for x, xp in zip(xs[:10], xs[10:]):
        assert bergman_B(ev, x, xp) == pytest.approx(np.conj(bergman_B(ev, xp, x)), abs=1e-14)


def test_kernel_symmetry_and_phase_invariance(rich_geom, evaluator_for, rng):
    ev = evaluator_for(rich_geom, 6)
    a, b = random_sphere_points(rng, 30), random_sphere_points(rng, 30)
    K = kernel_K(ev, a, b)
    np.testing.assert_allclose(K, kernel_K(ev, b, a), rtol=1e-12)
    for y, yp, k in zip(reps(a), reps(b), K):
        rotated = bergman_B(ev, y.rotate(0.7), yp.rotate(-2.1))
        assert abs(rotated) ** 2 == pytest.approx(k, rel=1e-12)


@pytest.mark.parametrize("N", [1, 4, 12])
def test_round_closed_form(round_geom, evaluator_for, rng, N):
    ev = evaluator_for(round_geom, N)
    a, b = random_sphere_points(rng, 100), random_sphere_points(rng, 100)
    got = kernel_K(ev, a, b)
    want = round_kernel_closed_form(2, N, a, b)
    # near-antipodal pairs sit at the cancellation floor of the basis sum,
    # so relative error is measured against the diagonal scale E_N^2
    scale = ((2 * N + 1) / (4 * math.pi)) ** 2
    np.testing.assert_allclose(got, want, rtol=1e-10, atol=1e-12 * scale)


def test_reproducing_property(pert_geom, evaluator_for, rng):
    ev = evaluator_for(pert_geom, 6)
    basis = ev.basis
    rule = basis.rule
    S = basis.evaluate(rule.points)
    wd = rule.weights * pert_geom.density(rule.points)
    for x in reps(random_sphere_points(rng, 5)):
        a = rng.standard_normal(basis.dim) + 1j * rng.standard_normal(basis.dim)
        s_nodes = S @ a
        e_nodes = S @ coherent_state(ev, x)
        inner = np.sum(wd * s_nodes * np.conj(e_nodes))
        s_x = basis.evaluate_reps([x.z0], [x.z1])[0] @ a
        assert inner == pytest.approx(s_x, abs=1e-10)


def test_coherent_norm_is_density(rich_geom, evaluator_for, rng):
    ev = evaluator_for(rich_geom, 7)
    pts = random_sphere_points(rng, 10)
    for x, E in zip(reps(pts), density_E(ev, pts)):
        assert np.sum(np.abs(coherent_state(ev, x)) ** 2) == pytest.approx(E, rel=1e-10)


@pytest.mark.parametrize("N", [2, 9])
def test_marginal_law(rich_geom, evaluator_for, rng, N):
    ev = evaluator_for(rich_geom, N)
    rule = ev.basis.rule
    pts = random_sphere_points(rng, 10)
    marg = ev.smooth(ONE(rule.points), pts, rule)
    np.testing.assert_allclose(marg, density_E(ev, pts), rtol=1e-9)


@pytest.mark.parametrize("geom_name", ["round_geom", "pert_geom"])
def test_fft_and_dense_paths_agree(request, evaluator_for, rng, geom_name):
    geom = request.getfixturevalue(geom_name)
    ev = evaluator_for(geom, 10)
    rule = ev.basis.rule
    assert rule.structured
    pts = random_sphere_points(rng, 40)
    vals = np.column_stack([ONE(rule.points), Y3SQ(rule.points)])
    np.testing.assert_allclose(ev.smooth(vals, pts, rule), ev.smooth_dense(vals, pts, rule), atol=1e-13)


@pytest.mark.parametrize("N", [1, 8, 32])
def test_density_positive_on_grid(rich_geom, evaluator_for, N):
    assert np.all(density_E(evaluator_for(rich_geom, N), probe_grid()) > 0)


def test_broken_basis_flagged(round_geom, basis_for):
    import dataclasses

    basis = basis_for(round_geom, 2)
    broken = dataclasses.replace(basis, scaled_coeff=np.zeros_like(basis.scaled_coeff))
    with pytest.raises(NonPositiveDensity):
        density_E(KernelEvaluator(broken), NORTH)


class FlippedCurvature(ModelGeometry):
    """Wrong sign on i d dbar psi; the Bergman density then loses its flat limit."""

    def density(self, points):
        return 0.5 * self.k - 0.5 * self.psi.laplacian(points)


def test_curvature_sign_convention():
    from hodge_approx import orthonormal_basis
    from hodge_approx.approximation import density_ratio_error

    psi = Perturbation(((2, 0, 0.1),))
    grid = probe_grid(16, 8)
    right, wrong = [], []
    for N in (8, 32):
        right.append(density_ratio_error(KernelEvaluator(orthonormal_basis(ModelGeometry(2, psi), N)), grid))
        wrong.append(density_ratio_error(KernelEvaluator(orthonormal_basis(FlippedCurvature(2, psi), N)), grid))
    assert right[1] < right[0] / 2
    assert wrong[1] > 0.2
