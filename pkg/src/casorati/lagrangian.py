"""Lagrangian submanifolds of C^n: complex structure, adapted frames, pairing checks.

Coordinates of C^n = E^{2n} are ordered ``(x1..xn, y1..yn)`` ("block") with
``J(x, y) = (-y, x)``.  Files may instead declare the interleaved ordering
``(x1, y1, x2, y2, ...)``, which is handled by conjugating with the
corresponding permutation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .casorati import CurvatureReport, casorati_operator, curvature_report, trencevski_operator
from .errors import DimensionError, NotLagrangian
from .expr import Const, Node, Var, differentiate, parse_expression, Add, Mul, Pow, Neg
from .geometry import ImmersionSpec, PointGeometry, point_geometry, with_normal_frame
from .linalg import gram_schmidt

LAGRANGIAN_TOL = 1e-8


@dataclass(frozen=True)
class ComplexStructure:
    N: int
    J: np.ndarray

    @property
    def n(self) -> int:
        return self.N // 2


def complex_structure(n: int, pairing: str = "block") -> ComplexStructure:
    I = np.eye(n)
    Z = np.zeros((n, n))
    J = np.block([[Z, -I], [I, Z]])
    if pairing == "interleaved":
        # interleaved slot 2k holds x_k, slot 2k+1 holds y_k
        perm = np.empty(2 * n, dtype=int)
        perm[0::2] = np.arange(n)
        perm[1::2] = np.arange(n, 2 * n)
        P = np.eye(2 * n)[perm]
        J = P @ J @ P.T
    elif pairing != "block":
        raise DimensionError(f"no complex structure for pairing {pairing!r}")
    return ComplexStructure(2 * n, J)


def structure_for(spec: ImmersionSpec) -> ComplexStructure:
    if spec.N != 2 * spec.n:
        raise DimensionError(f"Lagrangian checks need ambient dimension 2n, got n={spec.n}, N={spec.N}")
    if spec.complex_pairing == "none":
        raise DimensionError("immersion declares no complex pairing")
    return complex_structure(spec.n, spec.complex_pairing)


def omega_residual(pg: PointGeometry, cs: ComplexStructure) -> float:
    """max |<J E_i, E_j>| over the orthonormal tangent frame."""
    W = (cs.J @ pg.E).T @ pg.E
    return float(np.max(np.abs(W)))


def lagrangian_residual(spec: ImmersionSpec, u) -> float:
    """Size of the symplectic form restricted to the tangent space at ``u``."""
    cs = structure_for(spec)
    return omega_residual(point_geometry(spec, u), cs)


def adapted_frame(pg: PointGeometry, cs: ComplexStructure, strict=True, tol=LAGRANGIAN_TOL) -> PointGeometry:
    """Replace the normal frame by ``xi_i = J E_i``.

    With ``strict=False`` a non-Lagrangian point is accepted: ``J E_i`` is
    projected onto the normal space and re-orthonormalized, which is what
    negative-control experiments need.
    """
    res = omega_residual(pg, cs)
    if strict and res > tol:
        raise NotLagrangian(res)
    xi = cs.J @ pg.E
    if not strict:
        xi = pg.xi @ (pg.xi.T @ xi)
        xi, _ = gram_schmidt(xi)
    return with_normal_frame(pg, xi)


def cubic_symmetry_residual(pg: PointGeometry) -> float:
    """Largest spread among h^k_ij, h^j_ik, h^i_jk over all index triples."""
    h = pg.h
    if h.shape[0] != h.shape[1]:
        raise DimensionError("cubic symmetry needs as many normals as tangents")
    stacked = np.stack([h, np.transpose(h, (2, 1, 0)), np.transpose(h, (2, 0, 1))])
    return float(np.max(stacked.max(axis=0) - stacked.min(axis=0)))


def tangent_to_normal(pg: PointGeometry, cs: ComplexStructure) -> np.ndarray:
    """Matrix of J from tangent-frame to normal-frame coefficients."""
    return pg.xi.T @ cs.J @ pg.E


def cubic_form_residual(pg: PointGeometry, cs: ComplexStructure, X, Y, Z) -> float:
    """Spread of <h(X,Y),JZ>, <h(X,Z),JY>, <h(Y,Z),JX> for frame-coordinate vectors."""

    def term(a, b, c):
        hab = pg.xi @ pg.second_form(a, b)
        return float(hab @ (cs.J @ (pg.E @ c)))

    vals = [term(X, Y, Z), term(X, Z, Y), term(Y, Z, X)]
    return max(vals) - min(vals)


def bundle_isomorphism_residual(pg: PointGeometry, cs: ComplexStructure) -> float:
    """max_i |proj_normal(J E_i) - J E_i|."""
    JE = cs.J @ pg.E
    proj = pg.xi @ (pg.xi.T @ JE)
    return float(np.max(np.linalg.norm(proj - JE, axis=0)))


def operator_identity_residual(pg_adapted: PointGeometry) -> float:
    """max |A^C - a| entrywise, both in the adapted frame."""
    return float(np.max(np.abs(casorati_operator(pg_adapted) - trencevski_operator(pg_adapted))))


@dataclass(frozen=True)
class PairResidual:
    c_tangential: float
    c_normal: float
    residual: float
    dimension: int


@dataclass(frozen=True)
class PairingResult:
    pairs: list
    reverse_pairs: list
    spectrum_residual: float
    ok: bool

    @property
    def max_residual(self) -> float:
        res = [p.residual for p in self.pairs + self.reverse_pairs]
        return max(res + [self.spectrum_residual])


def _spectrum_residual(x, y):
    x, y = np.sort(x)[::-1], np.sort(y)[::-1]
    if len(x) != len(y):
        return np.inf
    return float(np.max(np.abs(x - y), initial=0.0))


def pairing_check(report: CurvatureReport, cs: ComplexStructure, pg_adapted: PointGeometry, tol=1e-9) -> PairingResult:
    """Check that J carries the eigenspaces of A^C onto eigenspaces of a, with equal eigenvalues.

    Both directions are checked: each eigenspace of A^C mapped by J must be
    invariant under ``a`` with the same eigenvalue, and each eigenspace of
    ``a`` pulled back by J must be invariant under A^C.
    """
    Jc = tangent_to_normal(pg_adapted, cs)
    pairs = []
    for c, basis in report.tangential.blocks():
        img = Jc @ basis
        res = np.linalg.norm(report.a_matrix @ img - c * img)
        c_perp = float(np.trace(img.T @ report.a_matrix @ img)) / img.shape[1]
        pairs.append(PairResidual(c, c_perp, float(res), basis.shape[1]))
    reverse = []
    for c, basis in report.normal.blocks():
        pre = Jc.T @ basis
        res = np.linalg.norm(report.AC @ pre - c * pre)
        c_tan = float(np.trace(pre.T @ report.AC @ pre)) / pre.shape[1]
        reverse.append(PairResidual(c_tan, c, float(res), basis.shape[1]))
    spec_res = _spectrum_residual(report.cT, report.c_perp_raw)
    ok = all(p.residual <= tol for p in pairs + reverse) and spec_res <= tol * max(1.0, float(np.max(report.cT, initial=0)))
    return PairingResult(pairs, reverse, spec_res, ok)


@dataclass(frozen=True)
class PairedFrameResult:
    applicable: bool
    ok: bool
    m1: int
    cT: np.ndarray
    c_perp: np.ndarray
    tangent_frame: np.ndarray | None = None
    normal_frame: np.ndarray | None = None
    residual: float = 0.0


def paired_frame_check(report: CurvatureReport, cs: ComplexStructure, pg_adapted: PointGeometry, tol=1e-9) -> PairedFrameResult:
    """Build the frame {F_i, J F_i} when the first normal space is maximal and check c^T_i = c^perp_i."""
    n = report.n
    cT, cp = report.cT, report.c_perp_raw
    if report.m1 < n:
        return PairedFrameResult(False, True, report.m1, cT, cp)
    F = pg_adapted.E @ report.tangential.vectors
    eta = cs.J @ F
    frame = np.column_stack([F, eta])
    orth = np.max(np.abs(frame.T @ frame - np.eye(2 * n)))
    normal_tangency = np.max(np.abs(pg_adapted.E.T @ eta))
    coeff = pg_adapted.xi.T @ eta
    eig = np.max(np.abs(report.a_matrix @ coeff - coeff * cT[None, :]))
    spec_res = _spectrum_residual(cT, cp)
    residual = float(max(orth, normal_tangency, eig, spec_res))
    return PairedFrameResult(True, residual <= tol * max(1.0, float(cT[0])), report.m1, cT, cp, F, eta, residual)


@dataclass(frozen=True)
class LagrangianReport:
    lagrangian_residual: float
    cubic_residual: float
    pairing: PairingResult | None
    paired_frame: PairedFrameResult | None
    adapted_frame_valid: bool
    operator_identity_residual: float
    bundle_residual: float
    report: CurvatureReport | None = field(default=None, repr=False)


def lagrangian_report(spec: ImmersionSpec, u, tol=1e-9) -> LagrangianReport:
    cs = structure_for(spec)
    pg = point_geometry(spec, u)
    res = omega_residual(pg, cs)
    if res > LAGRANGIAN_TOL:
        return LagrangianReport(res, np.inf, None, None, False, np.inf, bundle_isomorphism_residual(pg, cs))
    pga = adapted_frame(pg, cs)
    orth = np.max(np.abs(np.column_stack([pga.E, pga.xi]).T @ np.column_stack([pga.E, pga.xi]) - np.eye(cs.N)))
    report = curvature_report(pga)
    return LagrangianReport(
        lagrangian_residual=res,
        cubic_residual=cubic_symmetry_residual(pga),
        pairing=pairing_check(report, cs, pga, tol),
        paired_frame=paired_frame_check(report, cs, pga, tol),
        adapted_frame_valid=bool(orth <= LAGRANGIAN_TOL),
        operator_identity_residual=operator_identity_residual(pga),
        bundle_residual=bundle_isomorphism_residual(pg, cs),
        report=report,
    )


# ------------------------------------------------------------- generators


def gradient_graph_immersion(phi: Node, n: int, name="gradient_graph", params=None) -> ImmersionSpec:
    """The graph u -> (u, grad phi(u)) in C^n, block ordering; Lagrangian for every phi."""
    comps = [Var(i) for i in range(n)] + [differentiate(phi, i) for i in range(n)]
    return ImmersionSpec(name, n, tuple(comps), "block", dict(params or {}))


def gradient_graph_from_string(src: str, n: int, name="gradient_graph", params=None) -> ImmersionSpec:
    return gradient_graph_immersion(parse_expression(src, n, params), n, name, params)


def random_polynomial(rng: np.random.Generator, n: int, degree: int = 4, scale: float = 1.0) -> Node:
    """Random polynomial potential with monomials of degree 2..degree.

    Coefficients are uniform in ``[-scale, scale]``; the constant and linear
    parts are omitted since they do not change the graph's geometry.
    """
    terms = None
    for d in range(2, degree + 1):
        for _ in range(n):
            expo = rng.multinomial(d, np.ones(n) / n)
            coeff = float(np.round(rng.uniform(-scale, scale), 6))
            mono = Const(abs(coeff))
            for i, k in enumerate(expo):
                if k == 0:
                    continue
                factor = Var(i) if k == 1 else Pow(Var(i), Const(float(k)))
                mono = Mul(mono, factor)
            if coeff < 0:
                mono = Neg(mono)
            terms = mono if terms is None else Add(terms, mono)
    return terms


def non_gradient_perturbation(spec: ImmersionSpec, eps: float) -> ImmersionSpec:
    """Add eps*(u2 + u2^2, -u1, 0, ...) to the y-components of a block-ordered graph.

    The added field has nonzero curl, so the symplectic form no longer
    vanishes on the graph, and a non-symmetric second derivative, so the
    cubic symmetry of the second fundamental form is broken as well.
    """
    n = spec.n
    if spec.N != 2 * n or n < 2:
        raise DimensionError("perturbation needs a block-ordered graph in C^n, n >= 2")
    e = Const(eps)
    comps = list(spec.components)
    u1, u2 = Var(0), Var(1)
    comps[n] = Add(comps[n], Mul(e, Add(u2, Pow(u2, Const(2.0)))))
    comps[n + 1] = Add(comps[n + 1], Neg(Mul(e, u1)))
    return ImmersionSpec(spec.name + "_perturbed", n, tuple(comps), spec.complex_pairing, dict(spec.params))
