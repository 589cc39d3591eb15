"""Independent oracles shared by the test modules."""
import math

import numpy as np

from casorati.errors import DomainError
from casorati.expr import BinOp, Call, Const, Neg, Param, Var, eval_jet2

_FN = {
    "sin": math.sin, "cos": math.cos, "tan": math.tan, "exp": math.exp, "log": math.log,
    "sqrt": math.sqrt, "sinh": math.sinh, "cosh": math.cosh, "atan": math.atan,
}


def plain_eval(node, u):
    """Scalar evaluation with the math module only; shares no code with the jet evaluator."""
    if isinstance(node, (Const, Param)):
        return node.value
    if isinstance(node, Var):
        return float(u[node.index])
    if isinstance(node, Neg):
        return -plain_eval(node.arg, u)
    if isinstance(node, Call):
        return _FN[node.fn](plain_eval(node.arg, u))
    a, b = plain_eval(node.left, u), plain_eval(node.right, u)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        return a / b
    return a**b


def fd_gradient_hessian(f, u, h=1e-4):
    """Central finite differences of a scalar function."""
    u = np.asarray(u, dtype=float)
    n = len(u)
    E = np.eye(n) * h
    grad = np.array([(f(u + E[i]) - f(u - E[i])) / (2 * h) for i in range(n)])
    hess = np.zeros((n, n))
    f0 = f(u)
    for i in range(n):
        hess[i, i] = (f(u + E[i]) - 2 * f0 + f(u - E[i])) / h**2
        for j in range(i + 1, n):
            hess[i, j] = hess[j, i] = (
                f(u + E[i] + E[j]) - f(u + E[i] - E[j]) - f(u - E[i] + E[j]) + f(u - E[i] - E[j])
            ) / (4 * h * h)
    return grad, hess


_FUNCS = ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "atan")


def random_ast(rng, n, depth):
    """Random expression tree over u1..un of depth at most ``depth``."""
    if depth <= 1 or rng.random() < 0.25:
        if rng.random() < 0.6:
            return Var(int(rng.integers(n)))
        return Const(float(np.round(rng.uniform(0.1, 3.0), 3)))
    kind = rng.random()
    if kind < 0.1:
        return Neg(random_ast(rng, n, depth - 1))
    if kind < 0.35:
        return Call(_FUNCS[rng.integers(len(_FUNCS))], random_ast(rng, n, depth - 1))
    if kind < 0.45:
        expo = [Const(2.0), Const(3.0), Neg(Const(1.0)), Const(0.5), random_ast(rng, n, depth - 1)]
        return BinOp("^", random_ast(rng, n, depth - 1), expo[rng.integers(len(expo))])
    op = "+-*/"[rng.integers(4)]
    return BinOp(op, random_ast(rng, n, depth - 1), random_ast(rng, n, depth - 1))


def well_conditioned_sample(rng, n, depth, bound=1e2):
    """Draw (ast, point, fd_grad, fd_hess) where the oracle itself is trustworthy.

    Rejects draws that leave a function's domain anywhere on the stencil or
    whose value or finite-difference derivatives exceed ``bound`` (close to
    a singularity the stencil's truncation error is not controlled).
    """
    while True:
        ast = random_ast(rng, n, depth)
        u = rng.uniform(-1, 1, size=n)

        def f(x):
            return plain_eval(ast, x)

        try:
            with np.errstate(all="raise"):
                val = f(u)
                grad, hess = fd_gradient_hessian(f, u)
        except (ValueError, ZeroDivisionError, OverflowError, FloatingPointError, TypeError):
            continue
        if isinstance(val, complex) or np.iscomplexobj(grad) or not np.isfinite(val):
            continue
        try:
            eval_jet2(ast, u)
        except DomainError:
            # x^y with a coordinate-dependent exponent needs x > 0, even where the power is real
            continue
        if abs(val) > bound or np.max(np.abs(grad), initial=0) > bound or np.max(np.abs(hess), initial=0) > bound:
            continue
        # truncation error of the h-stencil is about a third of its gap to the 2h-stencil
        try:
            with np.errstate(all="raise"):
                grad2, hess2 = fd_gradient_hessian(f, u, h=2e-4)
        except (ValueError, ZeroDivisionError, OverflowError, FloatingPointError, TypeError):
            continue
        if max(fd_jet_check_arrays(grad2, hess2, grad, hess)) / 3 > 1e-6:
            continue
        return ast, u, grad, hess


def fd_jet_check_arrays(grad, hess, grad_ref, hess_ref):
    scale_g = max(1.0, float(np.max(np.abs(grad_ref))))
    scale_h = max(1.0, float(np.max(np.abs(hess_ref))))
    return (float(np.max(np.abs(grad - grad_ref))) / scale_g, float(np.max(np.abs(hess - hess_ref))) / scale_h)


def fd_jet_check(jet, grad, hess):
    """Relative error of a jet against finite differences, scaled by max(1, |oracle|)."""
    return fd_jet_check_arrays(jet.gradient, jet.hessian, grad, hess)


def random_orthogonal(rng, k):
    Q, R = np.linalg.qr(rng.normal(size=(k, k)))
    return Q * np.sign(np.diag(R))


def random_unit(rng, k):
    v = rng.normal(size=k)
    return v / np.linalg.norm(v)

