"""Tagged dual numbers for nested forward-mode differentiation.

A mixed partial ``D^alpha f`` of total order ``L`` is obtained by seeding
``L`` perturbation levels, one per differentiation, each carrying its own
tag so that perturbations of different levels never get confused.
"""

import numpy as np


class Dual:
    """``a + b*eps_tag`` where ``a`` and ``b`` may themselves be duals of lower tag."""

    __slots__ = ("tag", "a", "b")
    # keep numpy from broadcasting duals into object arrays
    __array_ufunc__ = None

    def __init__(self, tag, a, b):
        self.tag = tag
        self.a = a
        self.b = b

    def __repr__(self):
        return f"Dual(tag={self.tag}, a={self.a!r}, b={self.b!r})"

    def __neg__(self):
        return Dual(self.tag, -self.a, -self.b)

    def __pos__(self):
        return self

    def __add__(self, other):
        t = _top(self, other)
        sa, sb = _split(self, t)
        oa, ob = _split(other, t)
        return Dual(t, sa + oa, sb + ob)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        t = _top(self, other)
        sa, sb = _split(self, t)
        oa, ob = _split(other, t)
        return Dual(t, sa * oa, sa * ob + sb * oa)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * reciprocal(other)

    def __rtruediv__(self, other):
        return other * reciprocal(self)

    def __pow__(self, other):
        return power(self, other)

    def __rpow__(self, other):
        return power(other, self)


def _top(x, y):
    tx = x.tag if isinstance(x, Dual) else 0
    ty = y.tag if isinstance(y, Dual) else 0
    return max(tx, ty)


def _split(x, tag):
    if isinstance(x, Dual) and x.tag == tag:
        return x.a, x.b
    return x, 0.0


def _lift(fn, dfn):
    def apply(x):
        if isinstance(x, Dual):
            return Dual(x.tag, apply(x.a), dfn(x.a) * x.b)
        return fn(x)

    return apply


def reciprocal(x):
    if isinstance(x, Dual):
        inv = reciprocal(x.a)
        return Dual(x.tag, inv, -(inv * inv) * x.b)
    return 1.0 / x


exp = _lift(np.exp, lambda a: exp(a))
log = _lift(np.log, lambda a: reciprocal(a))
sqrt = _lift(np.sqrt, lambda a: 0.5 * reciprocal(sqrt(a)))
sin = _lift(np.sin, lambda a: cos(a))
cos = _lift(np.cos, lambda a: -sin(a))
sinh = _lift(np.sinh, lambda a: cosh(a))
cosh = _lift(np.cosh, lambda a: sinh(a))


class NotDifferentiable(ValueError):
    pass


def _no_derivative(name, fn):
    def apply(x):
        if isinstance(x, Dual):
            raise NotDifferentiable(f"{name} has no derivative")
        return fn(x)

    return apply


absolute = _no_derivative("abs", np.abs)
floor = _no_derivative("floor", np.floor)


def power(x, y):
    if isinstance(y, Dual):
        return exp(y * log(x))
    if isinstance(x, Dual):
        if np.ndim(y) == 0 and y == 0:
            return 1.0
        return Dual(x.tag, power(x.a, y), y * power(x.a, y - 1) * x.b)
    return np.power(x, y)


def seed(values, index, levels):
    """Wrap coordinate ``index`` so that level ``l`` perturbs variable ``levels[l-1]``."""
    v = values
    for tag, var in enumerate(levels, start=1):
        v = Dual(tag, v, 1.0 if var == index else 0.0)
    return v


def extract(result, order):
    """Pull the top-order mixed perturbation coefficient out of a nested dual."""
    r = result
    for tag in range(order, 0, -1):
        if isinstance(r, Dual) and r.tag == tag:
            r = r.b
        else:
            return 0.0
    while isinstance(r, Dual):
        r = r.a
    return r
