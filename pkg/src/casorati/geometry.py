"""Frames, metric and second fundamental form of a parametrized submanifold."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionError, RankDeficient
from .expr import Node, eval_jet2, parse_expression, render, variables
from .linalg import gram_schmidt, orthonormal_complement

PAIRINGS = ("none", "block", "interleaved")

# smallest/largest singular value of the jacobian below this is a degenerate point
RANK_RTOL = 1e-10


@dataclass(frozen=True)
class ImmersionSpec:
    """An immersion f: U in R^n -> R^N given by one expression per component."""

    name: str
    n: int
    components: tuple
    complex_pairing: str = "none"
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not self.N > self.n >= 1:
            raise DimensionError(f"need ambient dimension > n >= 1, got n={self.n}, N={self.N}")
        if self.complex_pairing not in PAIRINGS:
            raise ValueError(f"complex_pairing must be one of {PAIRINGS}")
        for comp in self.components:
            if any(i >= self.n for i in variables(comp)):
                raise DimensionError("component references a coordinate beyond n")

    @property
    def N(self) -> int:
        return len(self.components)

    @property
    def m(self) -> int:
        return self.N - self.n

    @classmethod
    def from_strings(cls, name, n, components: Sequence[str], params=None, complex_pairing="none"):
        params = dict(params or {})
        asts = [parse_expression(src, n, params) for src in components]
        return cls(name, n, tuple(asts), complex_pairing, params)

    def sources(self) -> list[str]:
        return [render(c) for c in self.components]


@dataclass(frozen=True)
class ImmersionJet:
    value: np.ndarray  # (..., N)
    jacobian: np.ndarray  # (..., N, n), columns are df/du_i
    hessians: np.ndarray  # (..., N, n, n)

    def __getitem__(self, k):
        return ImmersionJet(self.value[k], self.jacobian[k], self.hessians[k])


def immersion_jet(spec: ImmersionSpec, u) -> ImmersionJet:
    """Value, Jacobian and component Hessians of ``spec`` at ``u`` (or a batch of points)."""
    u = np.asarray(u, dtype=float)
    jets = [eval_jet2(c, u) for c in spec.components]
    value = np.stack([j.value for j in jets], axis=-1)
    jac = np.stack([j.gradient for j in jets], axis=-2)
    hess = np.stack([j.hessian for j in jets], axis=-3)
    return ImmersionJet(value, jac, hess)


@dataclass(frozen=True)
class PointGeometry:
    """Extrinsic first- and second-order data at one point.

    ``E`` holds the orthonormal tangent frame (Gram-Schmidt of the Jacobian
    columns), ``xi`` the orthonormal normal frame, ``h[a, i, j]`` the
    second fundamental form coefficient ``<h(E_i, E_j), xi_a>``.  The shape
    operator ``A[a]`` has the same matrix as ``h[a]`` in the orthonormal
    frame.  ``frame_to_param`` maps frame coordinates to parameter
    displacements, and ``ambient_second[:, i, j]`` is the full ambient
    second derivative along ``E_i, E_j``.
    """

    u: np.ndarray
    p: np.ndarray
    E: np.ndarray
    xi: np.ndarray
    g: np.ndarray
    h: np.ndarray
    frame_to_param: np.ndarray
    ambient_second: np.ndarray
    jacobian: np.ndarray

    @property
    def n(self) -> int:
        return self.E.shape[1]

    @property
    def m(self) -> int:
        return self.xi.shape[1]

    @property
    def N(self) -> int:
        return self.E.shape[0]

    @property
    def A(self) -> np.ndarray:
        return self.h

    def second_form(self, X, Y) -> np.ndarray:
        """h(X, Y) as xi-coefficients, for X, Y in frame coordinates."""
        return np.einsum("aij,i,j->a", self.h, X, Y)

    def shape_operator(self, zeta) -> np.ndarray:
        """Matrix of A_zeta for a normal vector with xi-coefficients ``zeta``."""
        return np.einsum("a,aij->ij", np.asarray(zeta, dtype=float), self.h)


def check_rank(jacobian):
    sv = np.linalg.svd(jacobian, compute_uv=False)
    if sv[0] == 0 or sv[-1] < RANK_RTOL * sv[0]:
        raise RankDeficient(sv)
    return sv


def geometry_from_jet(u, jet: ImmersionJet) -> PointGeometry:
    J = np.asarray(jet.jacobian)
    check_rank(J)
    E, R = gram_schmidt(J)
    Rinv = np.linalg.solve(R, np.eye(R.shape[0]))
    xi = orthonormal_complement(E)
    second = np.einsum("Nkl,ki,lj->Nij", jet.hessians, Rinv, Rinv)
    h = np.einsum("Na,Nij->aij", xi, second)
    h = 0.5 * (h + np.swapaxes(h, 1, 2))
    return PointGeometry(
        u=np.asarray(u, dtype=float),
        p=np.asarray(jet.value),
        E=E,
        xi=xi,
        g=J.T @ J,
        h=h,
        frame_to_param=Rinv,
        ambient_second=second,
        jacobian=J,
    )


def point_geometry(spec: ImmersionSpec, u) -> PointGeometry:
    """Frames, metric and second fundamental form of ``spec`` at ``u``.

    Raises
    ------
    RankDeficient
        When the smallest singular value of the Jacobian is below 1e-10
        times the largest.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (spec.n,):
        raise DimensionError(f"point must have {spec.n} coordinates")
    return geometry_from_jet(u, immersion_jet(spec, u))


def with_normal_frame(pg: PointGeometry, xi) -> PointGeometry:
    """Re-express ``pg`` in another orthonormal basis of the normal space."""
    xi = np.asarray(xi, dtype=float)
    h = np.einsum("Na,Nij->aij", xi, pg.ambient_second)
    h = 0.5 * (h + np.swapaxes(h, 1, 2))
    return replace(pg, xi=xi, h=h)


def with_tangent_rotation(pg: PointGeometry, Q) -> PointGeometry:
    """Rotate the tangent frame by the orthogonal n x n matrix ``Q`` (E -> E Q)."""
    Q = np.asarray(Q, dtype=float)
    return replace(
        pg,
        E=pg.E @ Q,
        h=np.einsum("aij,ik,jl->akl", pg.h, Q, Q),
        frame_to_param=pg.frame_to_param @ Q,
        ambient_second=np.einsum("Nij,ik,jl->Nkl", pg.ambient_second, Q, Q),
    )


def projected_jet(jet: ImmersionJet, B) -> ImmersionJet:
    """Jet of ``B^T f`` for an ambient matrix ``B`` with orthonormal columns."""
    B = np.asarray(B)
    return ImmersionJet(
        B.T @ jet.value,
        B.T @ jet.jacobian,
        np.einsum("Nk,Nij->kij", B, jet.hessians),
    )
