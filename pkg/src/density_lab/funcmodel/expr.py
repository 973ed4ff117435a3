"""Expression trees, the infix parser and the :class:`ScalarField` wrapper."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import dual

MAX_DERIVATIVE_ORDER = 6

FUNCTIONS: dict[str, Callable] = {
    "exp": dual.exp,
    "log": dual.log,
    "sqrt": dual.sqrt,
    "sin": dual.sin,
    "cos": dual.cos,
    "sinh": dual.sinh,
    "cosh": dual.cosh,
    "abs": dual.absolute,
    "floor": dual.floor,
}
NONSMOOTH = frozenset({"abs", "floor"})
CONSTANTS = {"pi": math.pi, "i": 1j}


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class DerivativeError(ValueError):
    pass


@dataclass(frozen=True)
class Const:
    value: complex | float


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    name: str
    arg: object


_BINARY = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": lambda a, b: a / b,
    "^": dual.power,
}


def evaluate(node, env: Sequence):
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return env[node.index]
    if isinstance(node, Neg):
        return -evaluate(node.arg, env)
    if isinstance(node, BinOp):
        return _BINARY[node.op](evaluate(node.left, env), evaluate(node.right, env))
    if isinstance(node, Call):
        return FUNCTIONS[node.name](evaluate(node.arg, env))
    raise TypeError(f"not an expression node: {node!r}")


def walk(node):
    yield node
    if isinstance(node, Neg):
        yield from walk(node.arg)
    elif isinstance(node, BinOp):
        yield from walk(node.left)
        yield from walk(node.right)
    elif isinstance(node, Call):
        yield from walk(node.arg)


def substitute(node, replacements: Sequence):
    if isinstance(node, Var):
        return replacements[node.index]
    if isinstance(node, Neg):
        return Neg(substitute(node.arg, replacements))
    if isinstance(node, BinOp):
        return BinOp(node.op, substitute(node.left, replacements), substitute(node.right, replacements))
    if isinstance(node, Call):
        return Call(node.name, substitute(node.arg, replacements))
    return node


# printing ------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _fmt_number(v) -> str:
    if isinstance(v, complex):
        if v.imag == 0:
            v = v.real
        else:
            return f"({_fmt_number(v.real)}+{_fmt_number(v.imag)}*i)"
    v = float(v)
    if v < 0 or math.copysign(1.0, v) < 0:
        return f"(-{_fmt_number(-v)})"
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def to_text(node, var_names: Sequence[str] = ("x1", "x2")) -> str:
    return _show(node, 0, var_names)


def _show(node, parent: int, names) -> str:
    if isinstance(node, Const):
        s, prec = _fmt_number(node.value), 5
    elif isinstance(node, Var):
        s, prec = names[node.index], 5
    elif isinstance(node, Call):
        s, prec = f"{node.name}({_show(node.arg, 0, names)})", 5
    elif isinstance(node, Neg):
        s, prec = "-" + _show(node.arg, 3, names), 3
    else:
        prec = _PREC[node.op]
        if node.op == "^":
            # right-associative: the base binds tighter than the exponent
            s = f"{_show(node.left, prec + 1, names)}^{_show(node.right, prec, names)}"
        else:
            s = f"{_show(node.left, prec, names)}{node.op}{_show(node.right, prec + 1, names)}"
    return f"({s})" if prec < parent else s


# parsing -------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>\*\*|[-+*/^()]))"
)


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos:].lstrip()[0]!r}", pos + len(text[pos:]) - len(text[pos:].lstrip()))
        start = m.start(m.lastgroup)
        kind = m.lastgroup
        value = m.group(kind)
        if value == "**":
            value = "^"
        tokens.append((kind, value, start))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, v, pos = self.take()
        if v != value:
            raise ParseError(f"expected {value!r}, found {v if v is not None else 'end of input'!r}", pos)

    def parse(self):
        node = self.expr()
        kind, v, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {v!r}", pos)
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
        if self.peek()[1] == "-":
            self.take()
            return Neg(self.unary())
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.primary()
        if self.peek()[1] == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def primary(self):
        kind, v, pos = self.take()
        if kind == "num":
            return Const(float(v))
        if kind == "name":
            if self.peek()[1] == "(":
                if v not in FUNCTIONS:
                    raise ParseError(f"unknown function {v!r}", pos)
                self.take()
                arg = self.expr()
                self.expect(")")
                return Call(v, arg)
            if v in ("x", "x1"):
                return Var(0)
            if v == "x2":
                return Var(1)
            if v in CONSTANTS:
                return Const(CONSTANTS[v])
            raise ParseError(f"unknown identifier {v!r}", pos)
        if v == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ParseError(f"unexpected {'end of input' if kind == 'end' else repr(v)}", pos)


def parse(text: str):
    return _Parser(text).parse()


# fields --------------------------------------------------------------------

def _as_node(value):
    if isinstance(value, ScalarField):
        return value.expr
    if isinstance(value, (int, float, complex, np.number)):
        return Const(value)
    raise TypeError(f"cannot combine ScalarField with {type(value).__name__}")


class ScalarField:
    """An evaluable function of ``x`` in R^n given by an expression tree.

    Points are passed as arrays of shape ``(m,)`` when ``n == 1`` and
    ``(m, n)`` otherwise; evaluation returns an array of shape ``(m,)``.
    """

    def __init__(self, expr, n: int | None = None, name: str | None = None, markers=frozenset()):
        self.expr = expr
        used = [node.index for node in walk(expr) if isinstance(node, Var)]
        self.n = n if n is not None else max(used, default=0) + 1
        if used and max(used) >= self.n:
            raise ValueError(f"expression uses x{max(used) + 1} but dimension is {self.n}")
        self.name = name
        self.markers = frozenset(markers)

    @classmethod
    def parse(cls, text: str, n: int | None = None, name: str | None = None) -> "ScalarField":
        return cls(parse(text), n=n, name=name)

    @classmethod
    def constant(cls, value, n: int = 1) -> "ScalarField":
        return cls(Const(value), n=n)

    @classmethod
    def coordinate(cls, index: int = 0, n: int = 1) -> "ScalarField":
        return cls(Var(index), n=n)

    @property
    def smooth(self) -> bool:
        return not any(isinstance(node, Call) and node.name in NONSMOOTH for node in walk(self.expr))

    @property
    def is_complex(self) -> bool:
        return any(isinstance(node, Const) and isinstance(node.value, complex) for node in walk(self.expr))

    @property
    def text(self) -> str:
        return to_text(self.expr, ("x", "x2") if self.n == 1 else ("x1", "x2"))

    def __repr__(self):
        label = f"{self.name}: " if self.name else ""
        return f"ScalarField({label}{self.text})"

    def _coords(self, x):
        x = np.asarray(x, dtype=float)
        if self.n == 1:
            if x.ndim == 2 and x.shape[1] == 1:
                x = x[:, 0]
            return [x], x.shape
        if x.shape[-1] != self.n:
            raise ValueError(f"expected points with {self.n} coordinates, got shape {x.shape}")
        return [x[..., j] for j in range(self.n)], x.shape[:-1]

    def __call__(self, x):
        coords, shape = self._coords(x)
        with np.errstate(all="ignore"):
            val = evaluate(self.expr, coords)
        return np.broadcast_to(np.asarray(val), shape).copy()

    def derivative(self, alpha, max_order: int = MAX_DERIVATIVE_ORDER) -> Callable:
        """Evaluator of ``D^alpha`` of this field by nested forward-mode duals."""
        if isinstance(alpha, (int, np.integer)):
            alpha = (int(alpha),)
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != self.n:
            raise DerivativeError(f"multi-index {alpha} does not match dimension {self.n}")
        if any(a < 0 for a in alpha):
            raise DerivativeError(f"negative multi-index {alpha}")
        if sum(alpha) and not self.smooth:
            raise DerivativeError("derivatives of a measurable-only field are not available")
        if sum(alpha) == 0:
            return self
        return differentiate(lambda env: evaluate(self.expr, env), alpha, self._coords, max_order)

    def compose(self, components: Sequence["ScalarField"]) -> "ScalarField":
        """``self(components(x))``, i.e. substitute each variable by a field."""
        if len(components) != self.n:
            raise ValueError(f"need {self.n} components, got {len(components)}")
        dims = {c.n for c in components}
        if len(dims) != 1:
            raise ValueError("components must share one dimension")
        return ScalarField(substitute(self.expr, [c.expr for c in components]), n=dims.pop())

    def shift(self, s) -> "ScalarField":
        s = np.atleast_1d(np.asarray(s, dtype=float))
        comps = [ScalarField(BinOp("-", Var(j), Const(float(s[j]))), n=self.n) for j in range(self.n)]
        return self.compose(comps)

    def _binary(self, op, other, reflected=False):
        left, right = self.expr, _as_node(other)
        if reflected:
            left, right = right, left
        n = self.n if not isinstance(other, ScalarField) else max(self.n, other.n)
        return ScalarField(BinOp(op, left, right), n=n)

    def __add__(self, other):
        return self._binary("+", other)

    def __radd__(self, other):
        return self._binary("+", other, True)

    def __sub__(self, other):
        return self._binary("-", other)

    def __rsub__(self, other):
        return self._binary("-", other, True)

    def __mul__(self, other):
        return self._binary("*", other)

    def __rmul__(self, other):
        return self._binary("*", other, True)

    def __truediv__(self, other):
        return self._binary("/", other)

    def __rtruediv__(self, other):
        return self._binary("/", other, True)

    def __pow__(self, other):
        return self._binary("^", other)

    def __neg__(self):
        return ScalarField(Neg(self.expr), n=self.n)


def differentiate(func: Callable, alpha, coords: Callable, max_order: int = MAX_DERIVATIVE_ORDER) -> Callable:
    """Evaluator of ``D^alpha func`` where ``func`` maps coordinate arrays to values.

    ``coords`` splits a point array into coordinate arrays and the output shape.
    ``func`` must be built from the dual-aware primitives so that nested seeds
    propagate through it.
    """
    alpha = tuple(int(a) for a in alpha)
    order = sum(alpha)
    if any(a < 0 for a in alpha):
        raise DerivativeError(f"negative multi-index {alpha}")
    if order > max_order:
        raise DerivativeError(f"derivative order {order} exceeds maximum {max_order}")
    levels = [j for j, a in enumerate(alpha) for _ in range(a)]

    def evaluator(x):
        cs, shape = coords(x)
        env = [dual.seed(c, j, levels) for j, c in enumerate(cs)]
        with np.errstate(all="ignore"):
            val = dual.extract(func(env), order)
        return np.broadcast_to(np.asarray(val), shape).copy()

    return evaluator


def point_coords(n: int) -> Callable:
    """Coordinate splitter for point arrays of dimension ``n``."""
    return ScalarField(Const(0.0), n=n)._coords


class Combination:
    """Finite linear combination ``sum_i c_i g_i`` of differentiable functions.

    Each ``g_i`` needs ``__call__`` and ``derivative(alpha)``; ScalarFields and
    fitted expansions both qualify.
    """

    def __init__(self, terms, n: int = 1):
        self.terms = [(c, g) for c, g in terms]
        self.n = n

    @property
    def smooth(self) -> bool:
        return all(getattr(g, "smooth", True) for _, g in self.terms)

    def __call__(self, x):
        out = 0.0
        for c, g in self.terms:
            out = out + c * np.asarray(g(x))
        return out

    def derivative(self, alpha, max_order: int = MAX_DERIVATIVE_ORDER):
        if isinstance(alpha, (int, np.integer)):
            alpha = (int(alpha),)
        parts = [(c, g.derivative(alpha, max_order)) for c, g in self.terms]

        def evaluator(x):
            out = 0.0
            for c, d in parts:
                out = out + c * np.asarray(d(x))
            return out

        return evaluator


def apply_function(name: str, field: ScalarField) -> ScalarField:
    if name not in FUNCTIONS:
        raise ValueError(f"unknown function {name!r}")
    return ScalarField(Call(name, field.expr), n=field.n)


def parse_expression(text: str, n: int | None = None) -> ScalarField:
    return ScalarField.parse(text, n=n)
