import numpy as np
import pytest

from casorati import fixtures
from casorati.errors import DimensionError, RankDeficient
from casorati.expr import evaluate
from casorati.geometry import (
    ImmersionSpec, immersion_jet, point_geometry, with_normal_frame, with_tangent_rotation,
)

from helpers import random_orthogonal, random_unit


def test_plane_jet():
    jet = immersion_jet(fixtures.plane(), [1.0, 2.0])
    assert jet.value.tolist() == [1.0, 2.0, 0.0]
    assert jet.jacobian.tolist() == [[1, 0], [0, 1], [0, 0]]
    assert not jet.hessians.any()


def test_unit_sphere_jet_at_origin():
    jet = immersion_jet(fixtures.sphere(1.0), [0.0, 0.0])
    assert np.allclose(jet.value, [1, 0, 0], atol=1e-16)
    assert np.allclose(jet.jacobian[:, 0], [0, 0, 1], atol=1e-16)
    assert np.allclose(jet.jacobian[:, 1], [0, 1, 0], atol=1e-16)


def test_bilinear_graph_hessian():
    spec = ImmersionSpec.from_strings("saddle", 2, ["u1", "u2", "u1*u2"])
    jet = immersion_jet(spec, [0.0, 0.0])
    assert jet.hessians[2].tolist() == [[0, 1], [1, 0]]


@pytest.mark.parametrize("u", [(0.0, 0.0), (0.4, 1.1), (-1.2, 2.5)])
def test_sphere_shape_operator(u):
    pg = point_geometry(fixtures.sphere(2.0), u)
    assert pg.m == 1
    A = pg.A[0]
    assert np.allclose(np.abs(A), 0.5 * np.eye(2), atol=1e-14)
    assert np.allclose(A, A[0, 0] * np.eye(2), atol=1e-14)


@pytest.mark.parametrize("u", [(0.0, 0.0), (0.7, -0.3), (2.0, 5.0)])
def test_cylinder_principal_curvatures(u):
    pg = point_geometry(fixtures.cylinder(), u)
    k = np.sort(np.abs(np.linalg.eigvalsh(pg.A[0])))
    assert np.allclose(k, [0.0, 1.0], atol=1e-14)


def test_plane_is_totally_geodesic():
    assert not point_geometry(fixtures.plane(), [0.3, -0.2]).h.any()


def test_cusp_is_rank_deficient():
    with pytest.raises(RankDeficient):
        point_geometry(fixtures.cusp(), [0.0, 0.5])


def test_point_dimension_checked():
    with pytest.raises(DimensionError):
        point_geometry(fixtures.sphere(), [0.0, 0.0, 0.0])


def test_spec_rejects_bad_dimensions():
    with pytest.raises(DimensionError):
        ImmersionSpec.from_strings("bad", 2, ["u1", "u2"])


@pytest.mark.parametrize("name", ["sphere", "cylinder", "torus", "monkey_saddle", "graph_a", "graph_b", "cylinder4"])
def test_frames_orthonormal(all_fixtures, name):
    spec, u = all_fixtures[name]
    pg = point_geometry(spec, u)
    assert np.allclose(pg.E.T @ pg.E, np.eye(pg.n), atol=1e-12)
    assert np.allclose(pg.xi.T @ pg.xi, np.eye(pg.m), atol=1e-12)
    assert np.allclose(pg.E.T @ pg.xi, 0, atol=1e-12)
    assert np.array_equal(pg.h, np.swapaxes(pg.h, 1, 2))


@pytest.mark.parametrize("name", ["sphere", "torus", "monkey_saddle", "graph_a", "graph_b"])
def test_gauss_formula_against_finite_differences(all_fixtures, name, rng):
    spec, u = all_fixtures[name]
    pg = point_geometry(spec, u)
    P_normal = np.eye(pg.N) - pg.E @ pg.E.T

    def f(x):
        return np.array([float(evaluate(c, x)) for c in spec.components])

    h = 1e-4
    for _ in range(5):
        X, Y = rng.normal(size=pg.n), rng.normal(size=pg.n)
        a, b = pg.frame_to_param @ X, pg.frame_to_param @ Y
        # mixed second difference of f along a and b
        d2 = (f(u + h * a + h * b) - f(u + h * a - h * b) - f(u - h * a + h * b) + f(u - h * a - h * b)) / (4 * h * h)
        expected = pg.xi @ pg.second_form(X, Y)
        assert np.allclose(P_normal @ d2, expected, atol=1e-6 * max(1, np.abs(expected).max()))
        # same identity with exact second derivatives
        exact = np.einsum("Nkl,k,l->N", immersion_jet(spec, u).hessians, a, b)
        assert np.allclose(P_normal @ exact, expected, atol=1e-10)


@pytest.mark.parametrize("name", ["torus", "graph_a", "graph_b", "cylinder4"])
def test_shape_operator_duality(all_fixtures, name, rng):
    spec, u = all_fixtures[name]
    pg = point_geometry(spec, u)
    for _ in range(5):
        X, Y, zeta = rng.normal(size=pg.n), rng.normal(size=pg.n), random_unit(rng, pg.m)
        lhs = pg.second_form(X, Y) @ zeta
        rhs = (pg.shape_operator(zeta) @ X) @ Y
        assert lhs == pytest.approx(rhs, abs=1e-12)


@pytest.mark.parametrize("name", ["sphere", "torus", "monkey_saddle", "graph_a", "graph_b"])
def test_norm_of_h_frame_independent(all_fixtures, name, rng):
    spec, u = all_fixtures[name]
    pg = point_geometry(spec, u)
    base = np.sum(pg.h**2)
    for _ in range(3):
        rot = with_tangent_rotation(pg, random_orthogonal(rng, pg.n))
        rot = with_normal_frame(rot, rot.xi @ random_orthogonal(rng, pg.m))
        assert np.sum(rot.h**2) == pytest.approx(base, abs=1e-10)
        # the rotated geometry is still a consistent second fundamental form
        assert np.allclose(np.einsum("Na,Nij->aij", rot.xi, rot.ambient_second), rot.h, atol=1e-12)
