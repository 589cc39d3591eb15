"""Command line interface.

Exit codes: 0 success, 1 a check failed (or too many grid rows failed),
2 unreadable file or expression, 3 degenerate or out-of-domain point,
4 a requested check does not apply to the immersion's dimensions.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import casorati as cas
from . import jordan, lagrangian, limitdef
from .errors import DimensionError, DomainError, ParseError, RankDeficient
from .geometry import check_rank, immersion_jet, point_geometry
from .immfile import SCHEMA, FileFormatError, ImmersionFile

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_RANK, EXIT_INAPPLICABLE = 0, 1, 2, 3, 4

ANALYTIC_TOL = 1e-9
FD_TOL = 1e-3
LIMIT_TOL = 0.02

DEFAULT_TOLERANCES = {
    "identities": ANALYTIC_TOL,
    "projection": 1e-8,
    "jordan": FD_TOL,
    "limit": LIMIT_TOL,
    "lagrangian": ANALYTIC_TOL,
    "cubic": ANALYTIC_TOL,
    "theorem1": ANALYTIC_TOL,
    "theorem2": ANALYTIC_TOL,
    "operator": ANALYTIC_TOL,
}
CHECKS = tuple(DEFAULT_TOLERANCES)


class Inapplicable(Exception):
    pass


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("CASORATI_THREADS", "")))
    except ValueError:
        return min(4, os.cpu_count() or 1)


def _floats(text: str) -> np.ndarray:
    return np.array([float(x) for x in text.replace(" ", "").split(",") if x], dtype=float)


def _default_point(imm: ImmersionFile) -> np.ndarray:
    sample = imm.sample or {}
    if "point" in sample:
        return np.asarray(sample["point"], dtype=float)
    if "box" in sample:
        return np.array([0.5 * (lo + hi) for lo, hi in sample["box"]], dtype=float)
    return np.zeros(imm.n)


def _point(args, imm) -> np.ndarray:
    u = _floats(args.point) if getattr(args, "point", None) else _default_point(imm)
    if u.shape != (imm.n,):
        raise DimensionError(f"point needs {imm.n} coordinates, got {len(u)}")
    return u


# ------------------------------------------------------------------ report


def _round_list(a):
    return [[float(x) for x in row] for row in np.atleast_2d(a)] if np.ndim(a) == 2 else [float(x) for x in a]


def report_dict(imm: ImmersionFile, u) -> dict:
    spec = imm.to_spec()
    pg = point_geometry(spec, u)
    rep = cas.curvature_report(pg)
    return {
        "schema": SCHEMA,
        "name": imm.name,
        "point": [float(x) for x in u],
        "n": pg.n,
        "m": pg.m,
        "C": rep.C,
        "cT": _round_list(rep.cT),
        "cPerp_raw": _round_list(rep.c_perp_raw),
        "cPerp_mean": _round_list(rep.c_perp_mean),
        "m1": rep.m1,
        "principal_tangential_frame": _round_list((pg.E @ rep.tangential.vectors).T),
        "principal_normal_frame": _round_list((pg.xi @ rep.normal.vectors).T),
        "AC": _round_list(rep.AC),
        "a_matrix": _round_list(rep.a_matrix),
        "mean_curvature_vector": _round_list(pg.xi @ rep.mean_curvature),
        "chen_residual": rep.chen_residual,
        "tolerances": {"m1": cas.M1_TOL, "eigen_block_rtol": cas.BLOCK_RTOL},
    }


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def report_text(d: dict) -> str:
    lines = [
        f"{d['name']} at u = {d['point']}  (n={d['n']}, m={d['m']})",
        f"Casorati curvature C      {d['C']:.12g}",
        "tangential c^T            " + " ".join(f"{x:.12g}" for x in d["cT"]),
        "normal c^perp (raw)       " + " ".join(f"{x:.12g}" for x in d["cPerp_raw"]),
        "normal c^perp (mean, /n)  " + " ".join(f"{x:.12g}" for x in d["cPerp_mean"]),
        f"dim N1 (m1)               {d['m1']}",
        f"Chen residual |a(H)|      {d['chen_residual']:.3e}",
    ]
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------ checks


def _check_applicable(name: str, spec) -> None:
    if name == "limit" and (spec.n, spec.m) != (2, 1):
        raise Inapplicable(f"limit needs a surface in E^3 (n=2, m=1), got n={spec.n}, m={spec.m}")
    if name in ("lagrangian", "cubic", "theorem1", "theorem2", "operator"):
        if spec.N != 2 * spec.n:
            raise Inapplicable(f"{name} needs ambient dimension 2n, got N={spec.N}, n={spec.n}")
        if spec.complex_pairing == "none":
            raise Inapplicable(f"{name} needs complex_pairing block or interleaved")


def run_check(name: str, spec, u, tol: float, rng=None) -> tuple[str, float]:
    """Return ``(status, residual)`` for one check at one point."""
    rng = rng if rng is not None else np.random.default_rng(0)
    if name == "identities":
        pg = point_geometry(spec, u)
        rep = cas.curvature_report(pg)
        scale = max(1.0, rep.C)
        res = max(
            abs(rep.C - np.trace(rep.AC) / pg.n),
            abs(rep.C - np.sum(rep.cT) / pg.n),
            abs(np.trace(rep.AC) - np.trace(rep.a_matrix)),
        ) / scale
        if rep.m1 != cas.h_rank(pg):
            res = np.inf
        return ("pass" if res <= tol else "fail"), float(res)
    if name == "projection":
        res = 0.0
        for _ in range(10):
            xi = rng.normal(size=spec.m)
            xi /= np.linalg.norm(xi)
            res = max(res, cas.projection_hypersurface_check(spec, u, xi))
        return ("pass" if res <= tol else "fail"), float(res)
    if name == "jordan":
        pg = point_geometry(spec, u)
        AC = cas.casorati_operator(pg)
        res = 0.0
        for _ in range(8):
            v = rng.normal(size=spec.n)
            v /= np.linalg.norm(v)
            curve = jordan.angle_curve(spec, u, v)
            exact = float(v @ AC @ v)
            res = max(res, abs(curve.tangent_slope2 - exact) / max(1.0, exact))
            res = max(res, abs(curve.tangent_slope2 - curve.normal_slope2) / max(1.0, exact))
        return ("pass" if res <= tol else "fail"), float(res)
    if name == "limit":
        est = limitdef.casorati_limit(spec, u)
        exact = limitdef.surface_invariants(point_geometry(spec, u))[2]
        res = abs(est.extrapolated - exact) / exact if exact > 1e-12 else abs(est.extrapolated)
        return ("pass" if res <= tol else "fail"), float(res)
    lrep = lagrangian.lagrangian_report(spec, u, tol)
    if name == "lagrangian":
        res = lrep.lagrangian_residual
    elif lrep.pairing is None:
        return "fail", float("inf")
    elif name == "cubic":
        res = lrep.cubic_residual
    elif name == "theorem1":
        res = lrep.pairing.max_residual
    elif name == "theorem2":
        if not lrep.paired_frame.applicable:
            return "not-applicable", 0.0
        res = lrep.paired_frame.residual
    elif name == "operator":
        res = lrep.operator_identity_residual
    else:
        raise ValueError(f"unknown check {name}")
    return ("pass" if res <= tol else "fail"), float(res)


@dataclass
class CheckRow:
    check: str
    point: list
    status: str
    residual: float
    tolerance: float


def _parse_tols(items) -> dict:
    tols = dict(DEFAULT_TOLERANCES)
    for item in items or []:
        for part in item.split(","):
            if not part:
                continue
            key, _, value = part.partition("=")
            if key not in tols:
                raise ValueError(f"unknown check {key!r} in --tol")
            tols[key] = float(value)
    return tols


def _grid_points(imm: ImmersionFile, box_arg, resolution_arg):
    sample = imm.sample or {}
    if box_arg:
        box = [tuple(float(x) for x in part.split(":")) for part in box_arg.split(",")]
    elif "box" in sample:
        box = [tuple(b) for b in sample["box"]]
    else:
        raise ValueError("no --box given and the file has no sample box")
    if len(box) != imm.n:
        raise DimensionError(f"box needs {imm.n} intervals")
    res = resolution_arg if resolution_arg else str(sample.get("resolution", 10))
    counts = [int(x) for x in str(res).split(",")]
    if len(counts) == 1:
        counts = counts * imm.n
    axes = [np.linspace(lo, hi, k) for (lo, hi), k in zip(box, counts)]
    return [np.array(p) for p in itertools.product(*axes)]


# --------------------------------------------------------------- commands


def cmd_validate(args, out) -> int:
    imm = ImmersionFile.load(args.file)
    spec = imm.to_spec()
    u = _point(args, imm)
    jet = immersion_jet(spec, u)
    sv = check_rank(jet.jacobian)
    out.write(f"OK, n={spec.n}, m={spec.m}, rank {len(sv)}\n")
    return EXIT_OK


def cmd_report(args, out) -> int:
    imm = ImmersionFile.load(args.file)
    d = report_dict(imm, _point(args, imm))
    out.write(canonical_json(d) if args.format == "json" else report_text(d))
    return EXIT_OK


def cmd_verify(args, out) -> int:
    imm = ImmersionFile.load(args.file)
    spec = imm.to_spec()
    tols = _parse_tols(args.tol)
    if args.checks:
        names = [c.strip() for c in args.checks.split(",") if c.strip()]
        for c in names:
            if c not in CHECKS:
                raise ValueError(f"unknown check {c!r}; choose from {', '.join(CHECKS)}")
            _check_applicable(c, spec)
    else:
        names = []
        for c in CHECKS:
            try:
                _check_applicable(c, spec)
            except Inapplicable:
                continue
            names.append(c)
    points = _grid_points(imm, args.box, args.resolution) if args.grid else [_point(args, imm)]

    def work(job):
        name, u = job
        try:
            status, res = run_check(name, spec, u, tols[name])
        except (RankDeficient, DomainError) as exc:
            status, res = f"error: {exc}", float("nan")
        return CheckRow(name, [float(x) for x in u], status, res, tols[name])

    jobs = [(name, u) for u in points for name in names]
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        rows = list(pool.map(work, jobs))
    failed = any(r.status not in ("pass", "not-applicable") for r in rows)
    if args.json:
        out.write(canonical_json({
            "schema": SCHEMA,
            "name": imm.name,
            "checks": [r.__dict__ for r in rows],
            "tolerances": tols,
            "exit_code": EXIT_FAIL if failed else EXIT_OK,
        }))
    else:
        out.write(f"{'check':<12} {'point':<28} {'status':<15} {'residual':>11} {'tolerance':>10}\n")
        for r in rows:
            pt = ",".join(f"{x:.4g}" for x in r.point)
            out.write(f"{r.check:<12} {pt:<28} {r.status:<15} {r.residual:>11.3e} {r.tolerance:>10.1e}\n")
        out.write("FAIL\n" if failed else "PASS\n")
    if args.profile_out and "limit" in names:
        est = limitdef.casorati_limit(spec, points[0])
        with open(args.profile_out, "w", newline="", encoding="utf-8") as fh:
            limitdef.write_profile_csv(est, fh)
    return EXIT_FAIL if failed else EXIT_OK


def grid_rows(imm: ImmersionFile, points, threads=1):
    spec = imm.to_spec()

    def row(u):
        base = [repr(float(x)) for x in u]
        try:
            rep = cas.curvature_report(point_geometry(spec, u))
        except (RankDeficient, DomainError) as exc:
            return base + [""] * (2 + spec.n + spec.m) + [str(exc)], False
        vals = [rep.C, *rep.cT, *rep.c_perp_raw]
        return base + [repr(float(x)) for x in vals] + [str(rep.m1), ""], True

    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(row, points))


def grid_header(n, m):
    return [f"u{i + 1}" for i in range(n)] + ["C"] + [f"cT_{i + 1}" for i in range(n)] + \
        [f"cPerp_{a + 1}" for a in range(m)] + ["m1", "error"]


def cmd_grid(args, out) -> int:
    imm = ImmersionFile.load(args.file)
    points = _grid_points(imm, args.box, args.resolution)
    rows = grid_rows(imm, points, _threads())
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(grid_header(imm.n, imm.ambient_dim - imm.n))
    for r, _ in rows:
        w.writerow(r)
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            fh.write(buf.getvalue())
    else:
        out.write(buf.getvalue())
    ok = sum(1 for _, good in rows if good)
    return EXIT_OK if ok >= 0.9 * len(rows) else EXIT_FAIL


def cmd_generate(args, out) -> int:
    params = {}
    for item in args.param or []:
        key, _, value = item.partition("=")
        params[key] = float(value)
    spec = lagrangian.gradient_graph_from_string(args.potential, args.n, args.name, params)
    sample = {}
    if args.point:
        sample["point"] = [float(x) for x in _floats(args.point)]
    imm = ImmersionFile.from_spec(spec, sample)
    if args.out:
        imm.save(args.out)
    else:
        out.write(imm.dumps())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="casorati", description="Casorati curvatures of parametrized submanifolds")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="parse an immersion file and check its rank")
    v.add_argument("file")
    v.add_argument("--point")
    v.set_defaults(func=cmd_validate)

    r = sub.add_parser("report", help="curvature report at a point")
    r.add_argument("file")
    r.add_argument("--point")
    r.add_argument("--format", choices=("json", "text"), default="json")
    r.set_defaults(func=cmd_report)

    ve = sub.add_parser("verify", help="run numerical verification checks")
    ve.add_argument("file")
    ve.add_argument("--point")
    ve.add_argument("--grid", action="store_true", help="check every point of the sample grid")
    ve.add_argument("--box")
    ve.add_argument("--resolution")
    ve.add_argument("--checks", help="comma separated: " + ",".join(CHECKS))
    ve.add_argument("--tol", action="append", help="override, e.g. limit=0.05,jordan=1e-2")
    ve.add_argument("--json", action="store_true", help="emit the summary as JSON")
    ve.add_argument("--profile-out", help="CSV of the limit construction's (theta, dpsi) profile")
    ve.set_defaults(func=cmd_verify)

    g = sub.add_parser("grid", help="sample curvature fields on a box")
    g.add_argument("file")
    g.add_argument("--box", help="lo:hi per coordinate, comma separated")
    g.add_argument("--resolution", help="points per axis (one value or one per axis)")
    g.add_argument("--out")
    g.set_defaults(func=cmd_grid)

    ge = sub.add_parser("generate", help="write the gradient graph of a potential as an immersion file")
    ge.add_argument("--potential", required=True)
    ge.add_argument("--n", type=int, required=True)
    ge.add_argument("--name", default="gradient_graph")
    ge.add_argument("--param", action="append", help="name=value")
    ge.add_argument("--point")
    ge.add_argument("--out", "-o")
    ge.set_defaults(func=cmd_generate)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except (ParseError, FileFormatError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    except (RankDeficient, DomainError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_RANK
    except Inapplicable as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INAPPLICABLE
    except (DimensionError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
