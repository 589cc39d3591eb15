"""Tangential Casorati curvature from the turning rate of tangent and normal spaces.

The angle between two k-dimensional subspaces is taken as the chordal
aggregate sqrt(sum theta_i^2) of their principal angles.  Moving from p with
unit speed in direction v, the principal angles grow like s*sigma_i with
sum sigma_i^2 = v^T A^C v, so the squared slope at s = 0 recovers the
Casorati quadratic form; for hypersurfaces it is the usual single angle.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .geometry import ImmersionSpec, geometry_from_jet, immersion_jet, point_geometry

SIGMA = 1e-2
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def principal_angles(Q1, Q2) -> np.ndarray:
    """Principal angles (ascending) between the column spans of two orthonormal bases.

    Small angles come from the sines (singular values of the part of Q2
    orthogonal to Q1), large ones from the cosines, which keeps both ends
    accurate.
    """
    Q1 = np.asarray(Q1, dtype=float)
    Q2 = np.asarray(Q2, dtype=float)
    if Q1.ndim == 1:
        Q1 = Q1[:, None]
    if Q2.ndim == 1:
        Q2 = Q2[:, None]
    if Q1.shape != Q2.shape:
        raise DimensionError(f"subspaces of different shape {Q1.shape} vs {Q2.shape}")
    cos = np.clip(np.linalg.svd(Q1.T @ Q2, compute_uv=False), 0.0, 1.0)  # descending
    sin = np.clip(np.linalg.svd(Q2 - Q1 @ (Q1.T @ Q2), compute_uv=False)[::-1], 0.0, 1.0)  # ascending
    sin = np.concatenate([np.zeros(len(cos) - len(sin)), sin]) if len(sin) < len(cos) else sin[: len(cos)]
    return np.where(sin < cos, np.arcsin(sin), np.arccos(cos))


def subspace_angle(Q1, Q2) -> float:
    """Chordal angle sqrt(sum theta_i^2) between two subspaces of equal dimension."""
    theta = principal_angles(Q1, Q2)
    return float(np.sqrt(np.sum(theta**2)))


@dataclass(frozen=True)
class AngleCurve:
    arclengths: np.ndarray
    tangent_angles: np.ndarray
    normal_angles: np.ndarray
    tangent_slope2: float
    normal_slope2: float


def _slope_at_zero(s, phi):
    """Slope at 0 of the cubic a s + b s^2 + c s^3 through the three samples."""
    V = np.column_stack([s, s**2, s**3])
    return float(np.linalg.solve(V, phi)[0])


def angle_curve(spec: ImmersionSpec, u0, v, sigma=SIGMA) -> AngleCurve:
    """Tangent- and normal-space angles along the parameter ray pushed forward to direction ``v``.

    ``v`` is a unit vector in the orthonormal tangent frame at ``u0``.  The
    ray is sampled at parameter values sigma, sigma/2, sigma/4 and each
    sample is labelled by its ambient arclength from p (Gauss-Legendre
    quadrature of the speed).  The slope at 0 is extracted from the cubic
    through the three samples, i.e. Richardson extrapolation on uneven
    nodes, so the error is O(sigma^3).
    """
    u0 = np.asarray(u0, dtype=float)
    v = np.asarray(v, dtype=float)
    pg = point_geometry(spec, u0)
    v = v / np.linalg.norm(v)
    d = pg.frame_to_param @ v
    t = sigma * np.array([0.25, 0.5, 1.0])
    edges = np.concatenate([[0.0], t])
    # quadrature nodes on [edges[k], edges[k+1]]
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    tq = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    pts = np.concatenate([t, tq])
    jet = immersion_jet(spec, u0[None, :] + pts[:, None] * d[None, :])
    speed = np.linalg.norm(jet.jacobian[len(t):] @ d, axis=-1).reshape(len(t), -1)
    s = np.cumsum(half * (speed @ _GL_WEIGHTS))
    phi = np.empty(3)
    psi = np.empty(3)
    for k in range(3):
        q = geometry_from_jet(u0 + t[k] * d, jet[k])
        phi[k] = subspace_angle(pg.E, q.E)
        psi[k] = subspace_angle(pg.xi, q.xi)
    a_t = _slope_at_zero(s, phi)
    a_n = _slope_at_zero(s, psi)
    return AngleCurve(s, phi, psi, a_t * a_t, a_n * a_n)


def jordan_tangential_curvature(spec: ImmersionSpec, u0, v, sigma=SIGMA) -> float:
    """(d phi/ds)^2 at 0, phi the angle between T_pM and T_qM."""
    return angle_curve(spec, u0, v, sigma).tangent_slope2


def jordan_normal_curvature(spec: ImmersionSpec, u0, v, sigma=SIGMA) -> float:
    """(d psi/ds)^2 at 0, psi the angle between the normal spaces at p and q."""
    return angle_curve(spec, u0, v, sigma).normal_slope2


def direction_sweep(spec: ImmersionSpec, u0, count=360, sigma=SIGMA):
    """Jordan curvature over ``count`` equally spaced unit directions of a surface.

    Returns ``(directions, values)`` with directions as frame-coordinate rows.
    """
    pg = point_geometry(spec, u0)
    if pg.n != 2:
        raise DimensionError("direction sweep is implemented for n = 2")
    theta = 2 * np.pi * np.arange(count) / count
    dirs = np.column_stack([np.cos(theta), np.sin(theta)])
    vals = np.array([jordan_tangential_curvature(spec, u0, w, sigma) for w in dirs])
    return dirs, vals
