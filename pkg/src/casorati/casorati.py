"""Casorati operator, normal operator, principal directions and curvatures."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotUnit
from .geometry import ImmersionSpec, PointGeometry, geometry_from_jet, immersion_jet, projected_jet
from .linalg import eigenspace_blocks, jacobi_eigh

M1_TOL = 1e-9
BLOCK_RTOL = 1e-8


@dataclass(frozen=True)
class Eigenpairs:
    values: np.ndarray  # descending
    vectors: np.ndarray  # columns

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        for k in range(len(self.values)):
            yield float(self.values[k]), self.vectors[:, k]

    def blocks(self, rtol=BLOCK_RTOL):
        return eigenspace_blocks(self.values, self.vectors, rtol)


def _sq_norm(h) -> float:
    return float(np.sum(np.asarray(h) ** 2))


def casorati_operator(pg: PointGeometry) -> np.ndarray:
    """Sum over the normal frame of A_a^2, in the orthonormal tangent frame."""
    AC = np.einsum("aij,ajk->ik", pg.h, pg.h)
    return 0.5 * (AC + AC.T)


def trencevski_operator(pg: PointGeometry) -> np.ndarray:
    """Matrix tr(A_a A_b) on the normal space (no 1/n factor)."""
    a = np.einsum("aij,bji->ab", pg.h, pg.h)
    return 0.5 * (a + a.T)


def principal_tangential(AC) -> Eigenpairs:
    values, vectors = jacobi_eigh(AC)
    return Eigenpairs(values, vectors)


def principal_normal(a_matrix, tol=M1_TOL) -> tuple[Eigenpairs, int]:
    """Eigenpairs of the normal operator and the dimension of the first normal space.

    An eigenvalue counts towards ``m1`` when it exceeds
    ``tol * max(largest eigenvalue, 1)``.
    """
    values, vectors = jacobi_eigh(a_matrix)
    if len(values) == 0:
        return Eigenpairs(values, vectors), 0
    threshold = tol * max(float(values[0]), 1.0)
    m1 = int(np.sum(values > threshold))
    return Eigenpairs(values, vectors), m1


def casorati_curvature(pg: PointGeometry) -> float:
    """C = |h|^2 / n."""
    return _sq_norm(pg.h) / pg.n


def normal_casorati_curvature(pg: PointGeometry, xi) -> tuple[float, float]:
    """Return ``(tr A_xi^2, tr A_xi^2 / n)`` for a unit normal with xi-coefficients ``xi``."""
    xi = np.asarray(xi, dtype=float)
    norm = np.linalg.norm(xi)
    if abs(norm - 1.0) > 1e-8:
        raise NotUnit(f"normal direction has norm {norm}")
    raw = _sq_norm(pg.shape_operator(xi))
    return raw, raw / pg.n


def apply_normal_operator(pg: PointGeometry, zeta) -> np.ndarray:
    """a(zeta) = (1/n)|zeta| sum_a tr(A_zeta A_a) xi_a, in xi-coefficients."""
    zeta = np.asarray(zeta, dtype=float)
    Az = pg.shape_operator(zeta)
    traces = np.einsum("ij,aji->a", Az, pg.h)
    return np.linalg.norm(zeta) * traces / pg.n


def mean_curvature_vector(pg: PointGeometry) -> np.ndarray:
    return np.trace(pg.h, axis1=1, axis2=2) / pg.n


def projection_hypersurface_check(spec: ImmersionSpec, u, xi) -> float:
    """Compare C of the projection onto span(T_pM, xi) with tr(A_xi^2)/n.

    The immersion is composed with the orthogonal projection of the ambient
    space onto the (n+1)-dimensional span of the tangent space at ``u`` and
    the normal direction with coefficients ``xi``; its Casorati curvature
    as a hypersurface is computed from scratch.  Returns the absolute
    difference.
    """
    u = np.asarray(u, dtype=float)
    jet = immersion_jet(spec, u)
    pg = geometry_from_jet(u, jet)
    _, mean = normal_casorati_curvature(pg, xi)
    if pg.m == 1:
        # the projection is an isometry of the whole ambient space
        return abs(casorati_curvature(pg) - mean)
    normal = pg.xi @ np.asarray(xi, dtype=float)
    B = np.column_stack([pg.E, normal / np.linalg.norm(normal)])
    hyp = geometry_from_jet(u, projected_jet(jet, B))
    return abs(casorati_curvature(hyp) - mean)


def h_rank_matrix(pg: PointGeometry) -> np.ndarray:
    """m x n(n+1)/2 matrix of the independent coefficients h^a_ij, i <= j."""
    iu = np.triu_indices(pg.n)
    return pg.h[:, iu[0], iu[1]]


def h_rank(pg: PointGeometry, tol=M1_TOL) -> int:
    """Rank of h as a map into the normal space, from singular values."""
    M = h_rank_matrix(pg)
    if M.size == 0:
        return 0
    sv = np.linalg.svd(M, compute_uv=False)
    # singular values scale like square roots of the normal-operator eigenvalues
    threshold = np.sqrt(tol) * max(float(sv[0]), 1.0)
    return int(np.sum(sv > threshold))


@dataclass(frozen=True)
class CurvatureReport:
    n: int
    m: int
    AC: np.ndarray
    a_matrix: np.ndarray
    tangential: Eigenpairs
    normal: Eigenpairs
    C: float
    m1: int
    chen_residual: float
    mean_curvature: np.ndarray

    @property
    def cT(self) -> np.ndarray:
        return self.tangential.values

    @property
    def c_perp_raw(self) -> np.ndarray:
        return self.normal.values

    @property
    def c_perp_mean(self) -> np.ndarray:
        return self.normal.values / self.n

    @property
    def N1_basis(self) -> np.ndarray:
        """First principal normal directions, as xi-coefficient columns."""
        return self.normal.vectors[:, : self.m1]


def curvature_report(pg: PointGeometry, tol=M1_TOL) -> CurvatureReport:
    AC = casorati_operator(pg)
    a = trencevski_operator(pg)
    normal, m1 = principal_normal(a, tol)
    H = mean_curvature_vector(pg)
    return CurvatureReport(
        n=pg.n,
        m=pg.m,
        AC=AC,
        a_matrix=a,
        tangential=principal_tangential(AC),
        normal=normal,
        C=casorati_curvature(pg),
        m1=m1,
        chen_residual=float(np.linalg.norm(apply_normal_operator(pg, H))),
        mean_curvature=H,
    )
