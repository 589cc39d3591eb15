"""Casorati's area-ratio curvature of surfaces in E^3, with Germain's H and Gauss's K.

For each radius r and K directions at p a geodesic is shot to q = delta(r);
the angle dpsi between the unit normals at p and q is then used as the
geodesic-polar radius of a point of the curve Gamma.  Areas are polar
areas 1/2 sum r_k^2 dtheta, whose metric corrections are O(r^2) and removed
by Richardson extrapolation in r^2.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import CasoratiError, DimensionError, DomainError, RankDeficient
from .geometry import ImmersionSpec, PointGeometry, immersion_jet, point_geometry

RADII = (0.05, 0.025, 0.0125)
STEP = 1e-3


def _require_surface(spec_or_pg):
    n, m = spec_or_pg.n, spec_or_pg.m
    if (n, m) != (2, 1):
        raise DimensionError(f"surface in E^3 required, got n={n}, m={m}")


def metric_and_derivatives(spec: ImmersionSpec, u):
    """g_ij and dg_ij/du_k (last axis k) from second-order jets; batched over u."""
    jet = immersion_jet(spec, u)
    J, H = jet.jacobian, jet.hessians
    g = np.einsum("...ai,...aj->...ij", J, J)
    # d_k g_ij = <f_ik, f_j> + <f_i, f_jk>
    dg = np.einsum("...aik,...aj->...ijk", H, J)
    dg = dg + np.swapaxes(dg, -3, -2)
    return g, dg


def christoffel(spec: ImmersionSpec, u) -> np.ndarray:
    """Christoffel symbols ``G[..., k, i, j]`` of the induced metric.

    Uses the Levi-Civita formula G^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij).
    """
    _require_surface(spec)
    g, dg = metric_and_derivatives(spec, u)
    det = np.linalg.det(g)
    scale = np.einsum("...ii->...", g) ** 2
    if np.any(~(np.abs(det) > 1e-20 * scale)):
        raise RankDeficient(np.linalg.svd(np.atleast_3d(g), compute_uv=False).ravel())
    ginv = np.linalg.inv(g)
    # first kind: [ij, l] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij); dg[..., a, b, c] = d_c g_ab
    d_i_gjl = np.einsum("...jli->...ijl", dg)
    d_j_gil = np.einsum("...ilj->...ijl", dg)
    d_l_gij = dg
    first = 0.5 * (d_i_gjl + d_j_gil - d_l_gij)
    G = np.einsum("...kl,...ijl->...kij", ginv, first)
    return 0.5 * (G + np.swapaxes(G, -1, -2))


@dataclass(frozen=True)
class GeodesicState:
    u: np.ndarray
    du: np.ndarray


def _rhs(spec, u, du):
    try:
        G = christoffel(spec, u)
    except (DomainError, RankDeficient) as exc:
        raise DomainError("geodesic", f"left the chart near u={np.asarray(u).tolist()}") from exc
    acc = -np.einsum("...kij,...i,...j->...k", G, du, du)
    return du, acc


def metric_norm(spec, u, du):
    g, _ = metric_and_derivatives(spec, u)
    return np.sqrt(np.einsum("...i,...ij,...j->...", du, g, du))


def geodesic_shoot(spec: ImmersionSpec, u0, v0, length, step=STEP) -> GeodesicState:
    """Integrate the geodesic equation with classical RK4 from ``u0`` along ``v0``.

    ``v0`` is rescaled to unit metric speed, so ``length`` is arclength.
    Batches are supported: ``u0`` and ``v0`` of shape ``(K, 2)`` with
    ``length`` scalar or of shape ``(K,)``; every geodesic takes the same
    number of steps, each with its own step size.
    """
    _require_surface(spec)
    u = np.array(u0, dtype=float)
    du = np.array(v0, dtype=float)
    du = du / metric_norm(spec, u, du)[..., None]
    length = np.asarray(length, dtype=float)
    nsteps = max(1, int(np.ceil(float(np.max(np.abs(length))) / step)))
    h = (length / nsteps)[..., None] if length.ndim else float(length) / nsteps
    for _ in range(nsteps):
        k1u, k1v = _rhs(spec, u, du)
        k2u, k2v = _rhs(spec, u + 0.5 * h * k1u, du + 0.5 * h * k1v)
        k3u, k3v = _rhs(spec, u + 0.5 * h * k2u, du + 0.5 * h * k2v)
        k4u, k4v = _rhs(spec, u + h * k3u, du + h * k3v)
        u = u + h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u)
        du = du + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
    return GeodesicState(u, du)


def unit_normal(spec: ImmersionSpec, u) -> np.ndarray:
    """f_1 x f_2 normalized; continuous across the chart, so orientation follows from p."""
    J = immersion_jet(spec, u).jacobian
    nrm = np.cross(J[..., :, 0], J[..., :, 1])
    return nrm / np.linalg.norm(nrm, axis=-1, keepdims=True)


@dataclass(frozen=True)
class LimitEstimate:
    radii: np.ndarray
    ratios: np.ndarray
    extrapolated: float
    theta: np.ndarray
    dpsi: np.ndarray  # (len(radii), K)
    gamma_points: np.ndarray  # (len(radii), K, 3)


def _richardson_r2(radii, values):
    """Constant term of the polynomial in r^2 through the samples."""
    r2 = np.asarray(radii) ** 2
    V = np.vander(r2, len(r2), increasing=True)
    return float(np.linalg.solve(V, values)[0])


def casorati_limit(spec: ImmersionSpec, u0, radii=RADII, samples_per_circle=256, step=STEP) -> LimitEstimate:
    """Extrapolated ratio A(Gamma)/A(gamma) of Casorati's construction at ``u0``."""
    _require_surface(spec)
    radii = np.asarray(radii, dtype=float)
    if len(radii) < 3 or np.any(np.diff(radii) >= 0):
        raise ValueError("need at least three radii in descending order")
    u0 = np.asarray(u0, dtype=float)
    pg = point_geometry(spec, u0)
    K = int(samples_per_circle)
    theta = 2 * np.pi * np.arange(K) / K
    frame_dirs = np.column_stack([np.cos(theta), np.sin(theta)])
    v0 = frame_dirs @ pg.frame_to_param.T
    start = np.repeat(u0[None, :], K, axis=0)
    n_p = unit_normal(spec, u0)
    ratios, dpsis, gammas = [], [], []
    for r in radii:
        q = geodesic_shoot(spec, start, v0, r, step)
        n_q = unit_normal(spec, q.u)
        cross = np.linalg.norm(np.cross(n_p[None, :], n_q), axis=-1)
        dpsi = np.arctan2(cross, n_q @ n_p)
        if np.any(dpsi > np.pi / 2):
            raise CasoratiError(f"normal turned by more than pi/2 at radius {r}")
        gamma = np.repeat(immersion_jet(spec, u0).value[None, :], K, axis=0)
        moving = dpsi > 0
        if np.any(moving):
            try:
                end = geodesic_shoot(spec, start[moving], v0[moving], dpsi[moving], step)
            except DomainError as exc:
                raise CasoratiError(f"curve Gamma leaves the chart at radius {r}") from exc
            gamma[moving] = immersion_jet(spec, end.u).value
        dtheta = 2 * np.pi / K
        area_Gamma = 0.5 * np.sum(dpsi**2) * dtheta
        area_gamma = 0.5 * K * r**2 * dtheta
        ratios.append(area_Gamma / area_gamma)
        dpsis.append(dpsi)
        gammas.append(gamma)
    ratios = np.array(ratios)
    return LimitEstimate(radii, ratios, _richardson_r2(radii, ratios), theta, np.array(dpsis), np.array(gammas))


def write_profile_csv(estimate: LimitEstimate, fileobj):
    """Write (radius, theta, dpsi, r_Gamma) rows for each sampled direction."""
    w = csv.writer(fileobj, lineterminator="\r\n")
    w.writerow(["radius", "theta", "dpsi", "r_Gamma"])
    for r, dpsi in zip(estimate.radii, estimate.dpsi):
        for th, d in zip(estimate.theta, dpsi):
            w.writerow([repr(float(r)), repr(float(th)), repr(float(d)), repr(float(d))])


def geodesic_circle_ratio(spec: ImmersionSpec, u0, radius, samples=256, step=STEP) -> float:
    """Circumference of the geodesic circle over 2 pi radius (polygonal length)."""
    u0 = np.asarray(u0, dtype=float)
    pg = point_geometry(spec, u0)
    theta = 2 * np.pi * np.arange(samples) / samples
    v0 = np.column_stack([np.cos(theta), np.sin(theta)]) @ pg.frame_to_param.T
    q = geodesic_shoot(spec, np.repeat(u0[None, :], samples, axis=0), v0, radius, step)
    pts = immersion_jet(spec, q.u).value
    length = np.sum(np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1))
    return float(length / (2 * np.pi * radius))


def surface_invariants(pg: PointGeometry) -> tuple[float, float, float]:
    """Germain's H = tr A / 2, Gauss's K = det A and Casorati's C = tr A^2 / 2."""
    _require_surface(pg)
    A = pg.h[0]
    H = 0.5 * float(np.trace(A))
    K = float(A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0])
    C = 0.5 * float(np.sum(A * A))
    return H, K, C
