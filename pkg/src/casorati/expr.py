"""Immersion expression language.

Grammar (whitespace insignificant)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := number | ident | ident '(' expr ')' | '(' expr ')'

``^`` is right associative and binds tighter than unary minus, so ``-u1^2``
is ``-(u1^2)``.  Identifiers are the coordinates ``u1..un``, declared
parameters, the constants ``pi`` and ``e``, and the functions in
:data:`FUNCTIONS`.

Expressions are evaluated as second-order jets (value, gradient, Hessian)
by forward propagation through the tree, so derivatives are exact up to
rounding.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from .errors import DomainError, ParseError, UnknownIdentifier

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "atan")
CONSTANTS = {"pi": math.pi, "e": math.e}

# denominators below this magnitude are treated as a domain error
TINY = 1e-300


# ---------------------------------------------------------------- AST nodes


@dataclass(frozen=True)
class Const:
    value: float
    symbol: str | None = None


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Param:
    name: str
    value: float


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Node"


Node = Union[Const, Var, Param, Neg, BinOp, Call]


def Add(a, b):
    return BinOp("+", a, b)


def Sub(a, b):
    return BinOp("-", a, b)


def Mul(a, b):
    return BinOp("*", a, b)


def Div(a, b):
    return BinOp("/", a, b)


def Pow(a, b):
    return BinOp("^", a, b)


# ------------------------------------------------------------------ parsing

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)
_VAR = re.compile(r"u([1-9][0-9]*)\Z")


def tokenize(src: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(src):
        while pos < len(src) and src[pos].isspace():
            pos += 1
        if pos == len(src):
            break
        m = _TOKEN.match(src, pos)
        if m is None or m.end() == pos:
            raise ParseError(pos, "a number, identifier or operator", src)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src, n, params):
        self.src = src
        self.n = n
        self.params = dict(params or {})
        self.tokens = tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        kind, value, pos = self.take()
        if value != text or kind == "end":
            raise ParseError(pos, repr(text), self.src)

    def parse(self):
        node = self.expr()
        kind, _, pos = self.peek()
        if kind != "end":
            raise ParseError(pos, "an operator or end of input", self.src)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, value, pos = self.take()
        if kind == "num":
            return Const(float(value))
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "ident":
            if value in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(value, arg)
            if self.peek()[:2] == ("op", "("):
                raise UnknownIdentifier(value, pos, self.src)
            m = _VAR.match(value)
            if m is not None:
                index = int(m.group(1)) - 1
                if index >= self.n:
                    raise UnknownIdentifier(value, pos, self.src)
                return Var(index)
            if value in self.params:
                return Param(value, float(self.params[value]))
            if value in CONSTANTS:
                return Const(CONSTANTS[value], value)
            raise UnknownIdentifier(value, pos, self.src)
        raise ParseError(pos, "a number, identifier or '('", self.src)


def parse_expression(src: str, n: int, params: Mapping[str, float] | None = None) -> Node:
    """Parse ``src`` into an AST over the coordinates ``u1..un``.

    Raises
    ------
    ParseError
        On malformed input; carries ``position`` and ``expected``.
    UnknownIdentifier
        For names that are not coordinates ``u1..un``, declared parameters,
        ``pi``/``e`` or known functions.
    """
    if not src or not src.strip():
        raise ParseError(0, "a nonempty expression", src)
    return _Parser(src, n, params).parse()


# ---------------------------------------------------------------- rendering

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5
_BIN_PREC = {"+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL, "/": _PREC_MUL, "^": _PREC_POW}


def _prec(node):
    if isinstance(node, BinOp):
        return _BIN_PREC[node.op]
    if isinstance(node, Neg):
        return _PREC_NEG
    return _PREC_ATOM


def _fmt_number(x):
    x = float(x)
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def render(node: Node) -> str:
    """Render an AST back to source text with minimal parentheses.

    ``parse_expression(render(ast)) == ast`` for every tree the parser can
    produce (constants are nonnegative there).
    """
    if isinstance(node, Const):
        if node.symbol is not None:
            return node.symbol
        if node.value < 0:
            return f"(-{_fmt_number(-node.value)})"
        return _fmt_number(node.value)
    if isinstance(node, Var):
        return f"u{node.index + 1}"
    if isinstance(node, Param):
        return node.name
    if isinstance(node, Call):
        return f"{node.fn}({render(node.arg)})"
    if isinstance(node, Neg):
        inner = render(node.arg)
        if _prec(node.arg) < _PREC_NEG:
            inner = f"({inner})"
        return f"-{inner}"
    p = _BIN_PREC[node.op]
    left, right = render(node.left), render(node.right)
    if node.op == "^":
        if _prec(node.left) <= _PREC_POW:
            left = f"({left})"
        if _prec(node.right) < _PREC_NEG:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(node.left) < p:
        left = f"({left})"
    # the parser is left associative, so equal precedence on the right needs parens
    if _prec(node.right) <= p and not isinstance(node.right, Neg):
        right = f"({right})"
    return f"{left} {node.op} {right}"


def variables(node: Node) -> set[int]:
    if isinstance(node, Var):
        return {node.index}
    if isinstance(node, (Neg, Call)):
        return variables(node.arg)
    if isinstance(node, BinOp):
        return variables(node.left) | variables(node.right)
    return set()


# --------------------------------------------------------------------- jets


@dataclass(frozen=True)
class Jet2:
    """Second-order jet of a scalar function.

    ``value`` has the batch shape (``()`` for a single point), ``gradient``
    appends ``(n,)`` and ``hessian`` appends ``(n, n)``.
    """

    value: np.ndarray
    gradient: np.ndarray
    hessian: np.ndarray


def _outer(a, b):
    return a[..., :, None] * b[..., None, :]


def _sym_outer(a, b):
    # a_i b_j + b_i a_j; the two summands swap under transposition, so this is exactly symmetric
    return _outer(a, b) + _outer(b, a)


def _chain(x: Jet2, f0, f1, f2) -> Jet2:
    g = x.gradient
    return Jet2(
        f0,
        f1[..., None] * g,
        f1[..., None, None] * x.hessian + f2[..., None, None] * _outer(g, g),
    )


def _add(a: Jet2, b: Jet2, sign=1.0) -> Jet2:
    return Jet2(a.value + sign * b.value, a.gradient + sign * b.gradient, a.hessian + sign * b.hessian)


def _mul(a: Jet2, b: Jet2) -> Jet2:
    av, bv = a.value[..., None], b.value[..., None]
    return Jet2(
        a.value * b.value,
        av * b.gradient + bv * a.gradient,
        av[..., None] * b.hessian + bv[..., None] * a.hessian + _sym_outer(a.gradient, b.gradient),
    )


def _reciprocal(x: Jet2) -> Jet2:
    v = x.value
    if np.any(np.abs(v) < TINY):
        raise DomainError("/", float(np.min(np.abs(v))))
    inv = 1.0 / v
    return _chain(x, inv, -inv * inv, 2.0 * inv * inv * inv)


def _int_power(x: Jet2, k: int) -> Jet2:
    v = x.value
    if k == 0:
        return _constant_like(x, 1.0)
    if k < 0:
        return _int_power(_reciprocal(x), -k)
    if k == 1:
        return x
    f0 = v**k
    f1 = k * v ** (k - 1)
    f2 = k * (k - 1) * v ** (k - 2) if k >= 2 else np.zeros_like(v)
    return _chain(x, f0, f1, f2)


def _positive(name, v):
    if np.any(~(v > 0)):
        raise DomainError(name, float(np.min(v)))


def _call(fn: str, x: Jet2) -> Jet2:
    v = x.value
    if fn == "sin":
        s, c = np.sin(v), np.cos(v)
        return _chain(x, s, c, -s)
    if fn == "cos":
        s, c = np.sin(v), np.cos(v)
        return _chain(x, c, -s, -c)
    if fn == "tan":
        c = np.cos(v)
        if np.any(np.abs(c) < TINY):
            raise DomainError("tan", float(v.flat[np.argmin(np.abs(c))]))
        t = np.tan(v)
        d = 1.0 + t * t
        return _chain(x, t, d, 2.0 * t * d)
    if fn == "exp":
        ev = np.exp(v)
        return _chain(x, ev, ev, ev)
    if fn == "log":
        _positive("log", v)
        inv = 1.0 / v
        return _chain(x, np.log(v), inv, -inv * inv)
    if fn == "sqrt":
        _positive("sqrt", v)
        s = np.sqrt(v)
        return _chain(x, s, 0.5 / s, -0.25 / (s * v))
    if fn == "sinh":
        sh, ch = np.sinh(v), np.cosh(v)
        return _chain(x, sh, ch, sh)
    if fn == "cosh":
        sh, ch = np.sinh(v), np.cosh(v)
        return _chain(x, ch, sh, ch)
    if fn == "atan":
        d = 1.0 / (1.0 + v * v)
        return _chain(x, np.arctan(v), d, -2.0 * v * d * d)
    raise ValueError(f"unknown function {fn}")


def _constant_like(x: Jet2, c: float) -> Jet2:
    return Jet2(np.full_like(x.value, c), np.zeros_like(x.gradient), np.zeros_like(x.hessian))


def _constant_value(node: Node) -> float | None:
    """Value of a coordinate-free subtree, else None."""
    if variables(node):
        return None
    return float(_eval(node, _Ctx(np.zeros(0), (), 0)).value)


class _Ctx:
    def __init__(self, u, batch, n):
        self.u = u
        self.batch = batch
        self.n = n

    def const(self, c):
        return Jet2(
            np.full(self.batch, float(c)),
            np.zeros(self.batch + (self.n,)),
            np.zeros(self.batch + (self.n, self.n)),
        )


def _eval(node: Node, ctx: _Ctx) -> Jet2:
    if isinstance(node, Const):
        return ctx.const(node.value)
    if isinstance(node, Param):
        return ctx.const(node.value)
    if isinstance(node, Var):
        if node.index >= ctx.n:
            raise IndexError(f"u{node.index + 1} used with only {ctx.n} coordinates")
        grad = np.zeros(ctx.batch + (ctx.n,))
        grad[..., node.index] = 1.0
        return Jet2(np.array(ctx.u[..., node.index], dtype=float), grad, np.zeros(ctx.batch + (ctx.n, ctx.n)))
    if isinstance(node, Neg):
        a = _eval(node.arg, ctx)
        return Jet2(-a.value, -a.gradient, -a.hessian)
    if isinstance(node, Call):
        return _call(node.fn, _eval(node.arg, ctx))
    op = node.op
    if op == "^":
        base = _eval(node.left, ctx)
        c = _constant_value(node.right)
        if c is not None and float(c).is_integer() and abs(c) <= 1024:
            return _int_power(base, int(c))
        if c is not None:
            _positive("^", base.value)
            v = base.value
            return _chain(base, v**c, c * v ** (c - 1.0), c * (c - 1.0) * v ** (c - 2.0))
        _positive("^", base.value)
        expo = _eval(node.right, ctx)
        logb = _call("log", base)
        return _call("exp", _mul(expo, logb))
    a = _eval(node.left, ctx)
    b = _eval(node.right, ctx)
    if op == "+":
        return _add(a, b)
    if op == "-":
        return _add(a, b, -1.0)
    if op == "*":
        return _mul(a, b)
    if op == "/":
        return _mul(a, _reciprocal(b))
    raise ValueError(f"unknown operator {op}")


def eval_jet2(ast: Node, u) -> Jet2:
    """Evaluate ``ast`` and its first two derivatives at ``u``.

    ``u`` is a point of shape ``(n,)`` or a batch of points of shape
    ``(..., n)``; all batch entries are evaluated in one pass.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim == 0:
        u = u[None]
    n = u.shape[-1]
    with np.errstate(all="ignore"):
        jet = _eval(ast, _Ctx(u, u.shape[:-1], n))
    hess = jet.hessian
    # exact symmetry: (H + H^T)/2 is elementwise commutative
    hess = 0.5 * (hess + np.swapaxes(hess, -1, -2))
    return Jet2(np.asarray(jet.value, dtype=float), jet.gradient, hess)


def evaluate(ast: Node, u) -> np.ndarray:
    return eval_jet2(ast, u).value


# ------------------------------------------------------ symbolic derivative

_ZERO = Const(0.0)
_ONE = Const(1.0)


def _is_const(node, value=None):
    return isinstance(node, Const) and node.symbol is None and (value is None or node.value == value)


def _num(x: float) -> Node:
    x = float(x)
    return Const(x) if x >= 0 else Neg(Const(-x))


def _neg(a):
    if _is_const(a, 0.0):
        return _ZERO
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def _plus(a, b):
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    if _is_const(a) and _is_const(b):
        return _num(a.value + b.value)
    if isinstance(b, Neg):
        return _minus(a, b.arg)
    return Add(a, b)


def _minus(a, b):
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return _neg(b)
    if _is_const(a) and _is_const(b):
        return _num(a.value - b.value)
    if isinstance(b, Neg):
        return _plus(a, b.arg)
    return Sub(a, b)


def _times(a, b):
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return _ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    if isinstance(a, Neg):
        return _neg(_times(a.arg, b))
    if isinstance(b, Neg):
        return _neg(_times(a, b.arg))
    if _is_const(a) and _is_const(b):
        return _num(a.value * b.value)
    if _is_const(b):
        a, b = b, a
    return Mul(a, b)


def _over(a, b):
    if _is_const(a, 0.0):
        return _ZERO
    if _is_const(b, 1.0):
        return a
    if isinstance(a, Neg):
        return _neg(_over(a.arg, b))
    return Div(a, b)


def _power(a, k: float):
    if k == 0:
        return _ONE
    if k == 1:
        return a
    return Pow(a, _num(k))


def differentiate(node: Node, i: int) -> Node:
    """Symbolic partial derivative with respect to ``u{i+1}``.

    Light constant folding keeps the result readable; no further
    simplification is attempted.
    """
    if isinstance(node, (Const, Param)):
        return _ZERO
    if isinstance(node, Var):
        return _ONE if node.index == i else _ZERO
    if isinstance(node, Neg):
        return _neg(differentiate(node.arg, i))
    if isinstance(node, Call):
        x = node.arg
        dx = differentiate(x, i)
        if _is_const(dx, 0.0):
            return _ZERO
        fn = node.fn
        if fn == "sin":
            outer = Call("cos", x)
        elif fn == "cos":
            outer = _neg(Call("sin", x))
        elif fn == "tan":
            outer = _over(_ONE, _power(Call("cos", x), 2))
        elif fn == "exp":
            outer = node
        elif fn == "log":
            return _over(dx, x)
        elif fn == "sqrt":
            return _over(dx, _times(Const(2.0), node))
        elif fn == "sinh":
            outer = Call("cosh", x)
        elif fn == "cosh":
            outer = Call("sinh", x)
        elif fn == "atan":
            return _over(dx, _plus(_ONE, _power(x, 2)))
        else:
            raise ValueError(f"unknown function {fn}")
        return _times(outer, dx)
    a, b = node.left, node.right
    da, db = differentiate(a, i), differentiate(b, i)
    if node.op == "+":
        return _plus(da, db)
    if node.op == "-":
        return _minus(da, db)
    if node.op == "*":
        return _plus(_times(da, b), _times(a, db))
    if node.op == "/":
        if _is_const(db, 0.0):
            return _over(da, b)
        return _over(_minus(_times(da, b), _times(a, db)), _power(b, 2))
    # power
    c = _constant_value(b)
    if c is not None:
        return _times(_times(_num(c), _power(a, c - 1.0)), da)
    # d(a^b) = a^b (b' log a + b a'/a)
    return _times(node, _plus(_times(db, Call("log", a)), _over(_times(b, da), a)))
