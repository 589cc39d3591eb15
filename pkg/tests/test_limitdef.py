import io

import numpy as np
import pytest

from casorati import fixtures
from casorati.errors import DimensionError
from casorati.expr import evaluate
from casorati.geometry import ImmersionSpec, immersion_jet, point_geometry
from casorati.limitdef import (
    casorati_limit, christoffel, geodesic_circle_ratio, geodesic_shoot, metric_norm, surface_invariants,
    unit_normal, write_profile_csv,
)

# exact rational value of C for the monkey saddle at (0.3, 0.2)
MONKEY_C = 5393823856200 / 1529221973761
MONKEY_H = 0.025545497262236922
MONKEY_K = -3.5258635387897463


def _fd_metric_christoffel(spec, u, h=1e-4):
    """Christoffel symbols from a finite-difference metric built with scalar evaluation only."""
    u = np.asarray(u, dtype=float)

    def f(x):
        return np.array([float(evaluate(c, x)) for c in spec.components])

    def metric(x):
        J = np.column_stack([(f(x + h * e) - f(x - h * e)) / (2 * h) for e in np.eye(2)])
        return J.T @ J

    dg = np.stack([(metric(u + h * e) - metric(u - h * e)) / (2 * h) for e in np.eye(2)], axis=-1)
    ginv = np.linalg.inv(metric(u))
    G = np.zeros((2, 2, 2))
    for k in range(2):
        for i in range(2):
            for j in range(2):
                G[k, i, j] = 0.5 * sum(ginv[k, l] * (dg[j, l, i] + dg[i, l, j] - dg[i, j, l]) for l in range(2))
    return G


def test_christoffel_plane_zero():
    assert not christoffel(fixtures.plane(), [0.3, 0.4]).any()


def test_christoffel_polar():
    G = christoffel(fixtures.polar_plane(), [1.5, 0.4])
    assert G[0, 1, 1] == pytest.approx(-1.5, abs=1e-14)
    assert G[1, 0, 1] == pytest.approx(1 / 1.5, abs=1e-14)
    assert G[1, 1, 0] == G[1, 0, 1]
    assert G[0, 0, 0] == pytest.approx(0.0, abs=1e-14)
    assert G[1, 1, 1] == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("name", ["sphere", "monkey_saddle", "cylinder"])
def test_christoffel_against_fd_metric(all_fixtures, name):
    spec, u = all_fixtures[name]
    assert np.allclose(christoffel(spec, u), _fd_metric_christoffel(spec, u), atol=1e-6)


def test_christoffel_requires_surface():
    with pytest.raises(DimensionError):
        christoffel(fixtures.torus(), [0.1, 0.2])


def test_plane_geodesic_is_straight():
    end = geodesic_shoot(fixtures.plane(), [0.0, 0.0], [3.0, 4.0], 1.0)
    assert np.allclose(end.u, [0.6, 0.8], atol=1e-14)


def test_polar_geodesic_is_straight_line():
    # from (r, t) = (1, 0) heading in +t: the straight line x = 1
    spec = fixtures.polar_plane()
    end = geodesic_shoot(spec, [1.0, 0.0], [0.0, 1.0], 1.0)
    pt = immersion_jet(spec, end.u).value
    assert np.allclose(pt, [1.0, 1.0, 0.0], atol=1e-10)


def test_sphere_great_circle_to_highest_latitude():
    # a great circle through (r, 0, 0) heading north-east peaks at latitude pi/4 a quarter turn later
    r = 2.0
    spec = fixtures.sphere(r)
    pg = point_geometry(spec, [0.0, 0.0])
    v = pg.frame_to_param @ (np.array([1.0, 1.0]) / np.sqrt(2))
    end = geodesic_shoot(spec, [0.0, 0.0], v, np.pi * r / 2)
    assert np.allclose(end.u, [np.pi / 4, np.pi / 2], atol=1e-10)


def test_rotated_unit_sphere_meridian():
    spec = ImmersionSpec.from_strings("rot", 2, ["cos(u1)*cos(u2)", "sin(u1)", "cos(u1)*sin(u2)"])
    end = geodesic_shoot(spec, [0.0, 0.0], [1.0, 0.0], 1.2)
    assert np.allclose(end.u, [1.2, 0.0], atol=1e-12)


def test_cylinder_ruling_geodesic():
    end = geodesic_shoot(fixtures.cylinder(), [0.7, -0.3], [0.0, 1.0], 0.5)
    assert np.allclose(end.u, [0.7, 0.2], atol=1e-14)


def test_unit_speed_preserved():
    spec, u = fixtures.monkey_saddle(), np.array([0.3, 0.2])
    end = geodesic_shoot(spec, u, [1.0, 0.5], 0.3)
    assert metric_norm(spec, end.u, end.du) == pytest.approx(1.0, abs=1e-9)


def test_batched_shoot_matches_single():
    spec = fixtures.monkey_saddle()
    starts = np.array([[0.3, 0.2], [0.1, -0.1]])
    dirs = np.array([[1.0, 0.0], [0.3, 0.7]])
    lengths = np.array([0.1, 0.05])
    batch = geodesic_shoot(spec, starts, dirs, lengths)
    for k in range(2):
        single = geodesic_shoot(spec, starts[k], dirs[k], lengths[k])
        assert np.allclose(batch.u[k], single.u, atol=1e-12)


def test_unit_normal_is_orthogonal():
    spec, u = fixtures.monkey_saddle(), [0.3, 0.2]
    nrm = unit_normal(spec, u)
    J = immersion_jet(spec, u).jacobian
    assert np.allclose(nrm @ J, 0, atol=1e-14)
    assert np.linalg.norm(nrm) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("spec, u, expected", [
    (fixtures.sphere(2.0), [0.4, 1.1], 0.25),
    (fixtures.cylinder(1.0), [0.7, -0.3], 0.5),
    (fixtures.monkey_saddle(), [0.3, 0.2], MONKEY_C),
])
def test_limit_matches_casorati_curvature(spec, u, expected):
    est = casorati_limit(spec, u)
    assert abs(est.extrapolated - expected) <= 0.02 * expected
    assert est.dpsi.shape == (3, 256)


def test_limit_plane_is_zero():
    est = casorati_limit(fixtures.plane(), [0.3, -0.7])
    assert est.extrapolated == 0.0
    assert not est.dpsi.any()


def test_limit_rejects_ascending_radii():
    with pytest.raises(ValueError):
        casorati_limit(fixtures.sphere(), [0.4, 1.1], radii=(0.01, 0.02, 0.04))


def test_profile_csv():
    est = casorati_limit(fixtures.sphere(2.0), [0.4, 1.1], samples_per_circle=8)
    buf = io.StringIO(newline="")
    write_profile_csv(est, buf)
    lines = buf.getvalue().split("\r\n")
    assert lines[0] == "radius,theta,dpsi,r_Gamma"
    assert len(lines) == 1 + 3 * 8 + 1 and lines[-1] == ""
    radius, _, dpsi, _ = map(float, lines[1].split(","))
    # normals of a sphere of radius 2 turn by s/2
    assert dpsi == pytest.approx(radius / 2, rel=1e-9)


@pytest.mark.parametrize("spec, u, H, K, C", [
    (fixtures.sphere(2.0), [0.4, 1.1], 0.5, 0.25, 0.25),
    (fixtures.cylinder(1.0), [0.7, -0.3], 0.5, 0.0, 0.5),
    (fixtures.plane(), [0.1, 0.1], 0.0, 0.0, 0.0),
    (fixtures.monkey_saddle(), [0.3, 0.2], MONKEY_H, MONKEY_K, MONKEY_C),
])
def test_surface_invariants(spec, u, H, K, C):
    h, k, c = surface_invariants(point_geometry(spec, u))
    assert abs(h) == pytest.approx(abs(H), abs=1e-12)
    assert k == pytest.approx(K, abs=1e-12)
    assert c == pytest.approx(C, abs=1e-12)
    assert c == pytest.approx(2 * h * h - k, abs=1e-12)


@pytest.mark.parametrize("name", ["sphere", "cylinder", "monkey_saddle", "polar_plane"])
def test_invariants_against_weingarten_in_coordinates(all_fixtures, name):
    spec, u = all_fixtures[name]
    jet = immersion_jet(spec, u)
    nrm = unit_normal(spec, u)
    g = jet.jacobian.T @ jet.jacobian
    b = np.einsum("N,Nij->ij", nrm, jet.hessians)
    W = np.linalg.solve(g, b)
    H, K, C = surface_invariants(point_geometry(spec, u))
    assert abs(H) == pytest.approx(abs(np.trace(W) / 2), abs=1e-10)
    assert K == pytest.approx(np.linalg.det(W), abs=1e-10)
    assert C == pytest.approx(np.trace(W @ W) / 2, abs=1e-10)


def test_invariants_require_surface():
    with pytest.raises(DimensionError):
        surface_invariants(point_geometry(fixtures.torus(), [0.1, 0.2]))


@pytest.mark.parametrize("name", ["sphere", "monkey_saddle", "cylinder"])
def test_geodesic_circle_ratio(all_fixtures, name):
    spec, u = all_fixtures[name]
    _, K, _ = surface_invariants(point_geometry(spec, u))
    rho = 0.05
    ratio = geodesic_circle_ratio(spec, u, rho)
    assert abs(ratio - 1) <= abs(K) * rho**2 / 6 + 1e-3
