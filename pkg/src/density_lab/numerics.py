"""Quadrature rules, integration and L_p norms on open subsets of R^n (n = 1, 2)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import special

Bounds = tuple[float, float]

KINDS = ("gauss-legendre-composite", "gauss-hermite", "gauss-laguerre", "tanh-sinh")

_HALF_PI = 0.5 * math.pi
# smallest distance to a finite endpoint that double-exponential rules sample
_EDGE = 1e-250


class QuadratureError(ValueError):
    pass


class NonFiniteError(ArithmeticError):
    def __init__(self, location, value):
        super().__init__(f"non-finite integrand value {value} at node {location}")
        self.location = location
        self.value = value


@dataclass(frozen=True)
class Domain:
    """Open box ``U`` with an increasing exhaustion ``U_1 ⊂ U_2 ⊂ ...``.

    ``bounds`` holds one ``(lo, hi)`` pair per axis; endpoints may be infinite.
    ``exhaustion`` holds boxes in the same format; empty means ``U_k = U``.
    """

    bounds: tuple[Bounds, ...]
    exhaustion: tuple[tuple[Bounds, ...], ...] = ()

    def __post_init__(self):
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        object.__setattr__(self, "bounds", bounds)
        if self.n not in (1, 2):
            raise ValueError(f"only dimensions 1 and 2 are supported, got {self.n}")
        for lo, hi in bounds:
            if not lo < hi:
                raise ValueError(f"empty axis ({lo}, {hi})")
        ex = tuple(tuple((float(lo), float(hi)) for lo, hi in box) for box in self.exhaustion)
        object.__setattr__(self, "exhaustion", ex)
        for box in ex:
            if len(box) != self.n:
                raise ValueError("exhaustion box has the wrong dimension")
            for (lo, hi), (a, b) in zip(box, bounds):
                if lo < a or hi > b or not lo < hi:
                    raise ValueError(f"exhaustion box {box} is not inside U = {bounds}")
        for inner, outer in zip(ex, ex[1:]):
            if any(lo < a or hi > b for (lo, hi), (a, b) in zip(inner, outer)):
                raise ValueError(f"exhaustion is not nested: {inner} ⊄ {outer}")

    @classmethod
    def interval(cls, lo=-math.inf, hi=math.inf, exhaustion: Sequence[Bounds] = ()) -> "Domain":
        return cls(((lo, hi),), tuple((b,) for b in exhaustion))

    @property
    def n(self) -> int:
        return len(self.bounds)

    @property
    def bounded(self) -> bool:
        return all(math.isfinite(lo) and math.isfinite(hi) for lo, hi in self.bounds)

    @property
    def k_max(self) -> int:
        return max(1, len(self.exhaustion))

    def box(self, k: int) -> tuple[Bounds, ...]:
        """The box ``U_k`` (1-based); ``U`` itself when no exhaustion is declared."""
        if not self.exhaustion:
            return self.bounds
        if not 1 <= k <= len(self.exhaustion):
            raise IndexError(f"exhaustion index {k} outside 1..{len(self.exhaustion)}")
        return self.exhaustion[k - 1]

    def restrict(self, k: int) -> "Domain":
        return Domain(self.box(k))

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        pts = x[:, None] if self.n == 1 else x
        ok = np.ones(pts.shape[0], dtype=bool)
        for j, (lo, hi) in enumerate(self.bounds):
            ok &= (pts[:, j] > lo) & (pts[:, j] < hi)
        return ok

    def compact_exhaustion(self) -> bool:
        """Each closure of ``U_k`` is compact and lies in ``U`` (and in ``U_{k+1}``)."""
        if not self.exhaustion:
            return False
        for box in self.exhaustion:
            for (lo, hi), (a, b) in zip(box, self.bounds):
                if not (math.isfinite(lo) and math.isfinite(hi)) or lo <= a or hi >= b:
                    return False
        for inner, outer in zip(self.exhaustion, self.exhaustion[1:]):
            if any(lo <= a or hi >= b for (lo, hi), (a, b) in zip(inner, outer)):
                return False
        return True

    def covers_samples(self, samples) -> bool:
        """Every sample point of ``U`` lies in the last exhaustion box."""
        last = Domain(self.box(self.k_max))
        inside = self.contains(samples)
        return bool(np.all(last.contains(np.asarray(samples)[inside])))


@dataclass(frozen=True)
class MeasureSpec:
    """Lebesgue measure times an optional density, plus finitely many atoms."""

    density: object = None
    atoms: tuple[tuple[object, float], ...] = ()

    def __post_init__(self):
        atoms = tuple((np.atleast_1d(np.asarray(loc, dtype=float)), float(m)) for loc, m in self.atoms)
        for loc, mass in atoms:
            if not mass > 0:
                raise ValueError(f"atom mass must be positive, got {mass}")
        object.__setattr__(self, "atoms", atoms)

    def weight(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        m = x.shape[0]
        if self.density is None:
            return np.ones(m)
        w = np.asarray(self.density(x), dtype=float)
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            k = int(np.argmax(~np.isfinite(w) | (w < 0)))
            raise ValueError(f"measure density is negative or non-finite at {x[k]}")
        return w

    def check_atoms(self, domain: Domain):
        for loc, _ in self.atoms:
            pt = loc if domain.n > 1 else loc[:1]
            if not domain.contains(pt[None, :] if domain.n > 1 else pt)[0]:
                raise ValueError(f"atom at {loc} is not inside the open set U")


LEBESGUE = MeasureSpec()


@dataclass(frozen=True)
class TailModel:
    """Truncation radius ``R`` for unbounded axes and the cap on the fitted decay rate."""

    radius: float = 60.0
    growth_cap: float = 50.0


@dataclass(frozen=True)
class QuadratureRule:
    kind: str
    order: int
    nodes: np.ndarray
    weights: np.ndarray
    exactness_degree: int | None
    natural_weight: str
    domain: Domain
    tail: TailModel | None
    panels: int = 1
    # which ends of each axis were cut at the tail radius / approach a finite endpoint
    cut_ends: tuple[tuple[bool, bool], ...] = ()
    open_ends: tuple[tuple[bool, bool], ...] = ()
    # position of each node in the 1-D rule along each axis (for endpoint probing)
    axis_index: np.ndarray | None = field(default=None, repr=False)
    axis_sizes: tuple[int, ...] = ()

    def __post_init__(self):
        if np.any(self.weights <= 0):
            raise QuadratureError("quadrature weights must be positive")

    @property
    def size(self) -> int:
        return len(self.weights)

    def companion(self) -> "QuadratureRule":
        """A coarser rule of the same kind, used for the error estimate."""
        return build_quadrature(self.domain, self.kind, max(1, self.order // 2), self.tail, panels=self.panels)

    def refined(self) -> "QuadratureRule":
        return build_quadrature(self.domain, self.kind, 2 * self.order, self.tail, panels=self.panels)

    def tail_points(self) -> list[tuple[np.ndarray, np.ndarray, float]]:
        """Sample points at ``R`` and ``2R`` on each cut end: (pt_R, pt_2R, R)."""
        out = []
        if self.tail is None:
            return out
        R = self.tail.radius
        for j, (cut_lo, cut_hi) in enumerate(self.cut_ends):
            a, b = self.domain.bounds[j]
            for cut, sign, base in ((cut_lo, -1.0, b), (cut_hi, 1.0, a)):
                if not cut:
                    continue
                origin = 0.0 if not math.isfinite(base) else base
                p1 = np.zeros(self.domain.n)
                p2 = np.zeros(self.domain.n)
                # other coordinates at 0 (or the box centre when 0 is outside)
                for i, (lo, hi) in enumerate(self.domain.bounds):
                    c = 0.0 if lo < 0 < hi else _inner_point(lo, hi)
                    p1[i] = p2[i] = c
                p1[j] = origin + sign * R
                p2[j] = origin + sign * 2 * R
                out.append((p1, p2, R))
        return out


def _inner_point(lo, hi):
    if math.isfinite(lo) and math.isfinite(hi):
        return 0.5 * (lo + hi)
    if math.isfinite(lo):
        return lo + 1.0
    if math.isfinite(hi):
        return hi - 1.0
    return 0.0


# 1-D rules ------------------------------------------------------------------

def _gauss_legendre(a, b, order, panels):
    x, w = special.roots_legendre(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _tanh_sinh_finite(a, b, h):
    half = 0.5 * (b - a)
    # stop once the distance to the endpoint drops below _EDGE * half
    u_max = 0.5 * math.log(2.0 / _EDGE)
    t_max = math.asinh(u_max / _HALF_PI)
    t = np.arange(-math.floor(t_max / h), math.floor(t_max / h) + 1) * h
    u = _HALF_PI * np.sinh(t)
    # distance from the nearer endpoint, computed without cancellation
    d = 2.0 * half / (1.0 + np.exp(2.0 * np.abs(u)))
    nodes = np.where(u < 0, a + d, b - d)
    weights = h * half * _HALF_PI * np.cosh(t) / np.cosh(u) ** 2
    keep = (nodes > a) & (nodes < b) & (weights > 0)
    return nodes[keep], weights[keep]


def _exp_sinh(a, R, h, direction=1.0):
    """``a + direction * exp(pi/2 sinh t)``, from distance ``_EDGE`` up to ``R``."""
    t_lo = math.asinh(math.log(_EDGE) / _HALF_PI)
    t_hi = math.asinh(math.log(R) / _HALF_PI)
    t = np.arange(math.ceil(t_lo / h), math.floor(t_hi / h) + 1) * h
    d = np.exp(_HALF_PI * np.sinh(t))
    nodes = a + direction * d
    weights = h * _HALF_PI * np.cosh(t) * d
    keep = (nodes != a) & (weights > 0)
    order = np.argsort(nodes[keep])
    return nodes[keep][order], weights[keep][order]


def _sinh_sinh(R, h):
    t_max = math.asinh(math.asinh(R) / _HALF_PI)
    t = np.arange(-math.floor(t_max / h), math.floor(t_max / h) + 1) * h
    u = _HALF_PI * np.sinh(t)
    return np.sinh(u), h * _HALF_PI * np.cosh(t) * np.cosh(u)


def _axis_rule(lo, hi, kind, order, tail: TailModel, panels):
    """1-D nodes/weights plus (exactness, natural weight, cut ends, open ends)."""
    lo_inf, hi_inf = not math.isfinite(lo), not math.isfinite(hi)
    R = tail.radius
    if kind == "gauss-hermite":
        if not (lo_inf and hi_inf):
            raise QuadratureError("gauss-hermite needs a whole-line axis")
        x, w = special.roots_hermite(order)
        return x, np.exp(np.log(w) + x * x), 2 * order - 1, "exp(-x^2)", (False, False), (False, False)
    if kind == "gauss-laguerre":
        if lo_inf == hi_inf:
            raise QuadratureError("gauss-laguerre needs a half-line axis")
        x, w = special.roots_laguerre(order)
        weights = np.exp(np.log(w) + x)
        if hi_inf:
            return lo + x, weights, 2 * order - 1, "exp(-x)", (False, False), (False, False)
        return (hi - x)[::-1], weights[::-1], 2 * order - 1, "exp(x)", (False, False), (False, False)
    if kind == "gauss-legendre-composite":
        a = lo if not lo_inf else (hi - 2 * R if not hi_inf else -R)
        b = hi if not hi_inf else (lo + 2 * R if not lo_inf else R)
        x, w = _gauss_legendre(a, b, order, panels)
        return x, w, 2 * order - 1, "1", (lo_inf, hi_inf), (False, False)
    if kind == "tanh-sinh":
        h = 1.0 / order
        if not lo_inf and not hi_inf:
            x, w = _tanh_sinh_finite(lo, hi, h)
            return x, w, None, "1", (False, False), (True, True)
        if lo_inf and hi_inf:
            x, w = _sinh_sinh(R, h)
            return x, w, None, "1", (True, True), (False, False)
        if hi_inf:
            x, w = _exp_sinh(lo, R, h, 1.0)
            return x, w, None, "1", (False, True), (True, False)
        x, w = _exp_sinh(hi, R, h, -1.0)
        return x, w, None, "1", (True, False), (False, True)
    raise QuadratureError(f"unknown quadrature kind {kind!r}; expected one of {KINDS}")


def build_quadrature(domain: Domain, kind: str, order: int, tail: TailModel | None = None, panels: int = 1) -> QuadratureRule:
    """Build a (tensor-product) rule of the given kind on ``domain``.

    For ``tanh-sinh`` the order is the number of nodes per unit of the
    transformed variable (step ``1/order``); for the Gauss kinds it is the
    number of nodes per panel.
    """
    if int(order) != order or order < 1:
        raise QuadratureError(f"order must be a positive integer, got {order}")
    order = int(order)
    tail = tail or TailModel()
    axes = [_axis_rule(lo, hi, kind, order, tail, panels) for lo, hi in domain.bounds]
    exact = axes[0][2]
    natural = axes[0][3]
    cut = tuple(ax[4] for ax in axes)
    opened = tuple(ax[5] for ax in axes)
    if domain.n == 1:
        nodes, weights = axes[0][0], axes[0][1]
        index = np.arange(len(nodes))[:, None]
    else:
        grids = np.meshgrid(*[ax[0] for ax in axes], indexing="ij")
        wgrids = np.meshgrid(*[ax[1] for ax in axes], indexing="ij")
        nodes = np.stack([g.ravel() for g in grids], axis=-1)
        weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
        igrids = np.meshgrid(*[np.arange(len(ax[0])) for ax in axes], indexing="ij")
        index = np.stack([g.ravel() for g in igrids], axis=-1)
    uses_tail = any(c for pair in cut for c in pair)
    return QuadratureRule(
        kind=kind,
        order=order,
        nodes=nodes,
        weights=weights,
        exactness_degree=exact,
        natural_weight=natural,
        domain=domain,
        tail=tail if uses_tail else None,
        panels=panels,
        cut_ends=cut,
        open_ends=opened,
        axis_index=index,
        axis_sizes=tuple(len(ax[0]) for ax in axes),
    )


def default_rule(domain: Domain, accuracy: float = 1.0, radius: float | None = None) -> QuadratureRule:
    """Double-exponential rule suited to the L_2 pipelines on ``domain``."""
    whole = any(not math.isfinite(lo) and not math.isfinite(hi) for lo, hi in domain.bounds)
    half = any(math.isfinite(lo) != math.isfinite(hi) for lo, hi in domain.bounds)
    if whole:
        order, R = 100, 1e6
    elif half:
        order, R = 200, 1e4
    else:
        order, R = 64, 60.0
    if domain.n == 2:
        order = max(12, order // 5)
    return build_quadrature(domain, "tanh-sinh", max(1, int(order * accuracy)), TailModel(radius or R))


# integration ---------------------------------------------------------------

@dataclass(frozen=True)
class IntegralResult:
    value: complex | float
    error_estimate: float
    tail_bound: float = 0.0
    diverged: bool = False


def _values(f, x):
    if callable(f):
        return np.asarray(f(x))
    return np.asarray(f)


def _raw_sum(f, rule: QuadratureRule, measure: MeasureSpec):
    vals = _values(f, rule.nodes)
    w = rule.weights * measure.weight(rule.nodes)
    bad = ~np.isfinite(vals) & (w > 0)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise NonFiniteError(rule.nodes[k], vals[k])
    terms = np.where(w > 0, vals, 0.0) * w
    return terms, vals


def _tail_bound(f, rule: QuadratureRule, measure: MeasureSpec) -> float:
    total = 0.0
    for p1, p2, R in rule.tail_points():
        pts = np.stack([p1, p2]) if rule.domain.n > 1 else np.array([p1[0], p2[0]])
        g = np.abs(_values(f, pts)) * measure.weight(pts)
        g1, g2 = float(g[0]), float(g[1])
        if not (math.isfinite(g1) and math.isfinite(g2)):
            return math.inf
        if g1 == 0.0:
            continue
        if g2 >= g1:
            return math.inf
        rate = min(math.log(g1 / max(g2, 1e-300)) / R, rule.tail.growth_cap)
        total += g1 / rate
    return total


def _endpoint_diverges(terms, rule: QuadratureRule) -> bool:
    """Double-exponential terms near a finite endpoint must die off for a finite integral."""
    if rule.kind != "tanh-sinh" or rule.domain.n != 1:
        return False
    mags = np.abs(terms)
    total = mags.sum()
    if total == 0 or not np.isfinite(total):
        return not np.isfinite(total)
    k = max(3, int(0.02 * len(mags)))
    lo_open, hi_open = rule.open_ends[0]
    ends = []
    if lo_open:
        ends.append(mags[:k])
    if hi_open:
        ends.append(mags[-k:])
    return any(e.sum() > 1e-6 * total for e in ends)


def integrate(f, rule: QuadratureRule, measure: MeasureSpec = LEBESGUE) -> IntegralResult:
    """Integrate ``f`` (callable or node values) against ``measure``.

    The error estimate combines the difference to a coarser companion rule,
    the exponential tail bound beyond the truncation radius and a rounding floor.
    """
    terms, vals = _raw_sum(f, rule, measure)
    value = terms.sum()
    atom_part = 0.0
    for loc, mass in measure.atoms:
        pt = loc[None, :] if rule.domain.n > 1 else loc[:1]
        atom_part = atom_part + mass * _values(f, pt)[0]
    value = value + atom_part
    if _endpoint_diverges(terms, rule):
        return IntegralResult(value, math.inf, 0.0, True)
    comp = rule.companion()
    if comp.order != rule.order:
        cterms, _ = _raw_sum(f, comp, measure)
        diff = abs(cterms.sum() + atom_part - value)
    else:
        diff = 0.0
    tail = _tail_bound(f, rule, measure)
    floor = 64 * np.finfo(float).eps * float(np.abs(terms).sum() + abs(atom_part))
    return IntegralResult(value, float(diff + tail + floor), tail, False)


def _polish_max(g: Callable, a: np.ndarray, b: np.ndarray, iters: int = 60) -> np.ndarray:
    """Golden-section search for local maxima of ``g`` on the brackets ``[a_i, b_i]``.

    ``g`` is vectorised, so all brackets are polished together.
    """
    invphi = (math.sqrt(5) - 1) / 2
    a, b = np.array(a, dtype=float), np.array(b, dtype=float)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    gc, gd = g(c), g(d)
    for _ in range(iters):
        left = gc >= gd
        # keep [a, d] where g(c) wins, [c, b] otherwise
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new_c = np.where(left, b - invphi * (b - a), d)
        new_d = np.where(left, c, a + invphi * (b - a))
        new_gc = np.where(left, np.nan, gd)
        new_gd = np.where(left, gc, np.nan)
        c, d = new_c, new_d
        need_c, need_d = np.isnan(new_gc), np.isnan(new_gd)
        probe = np.where(need_c, c, d)
        val = g(probe)
        gc = np.where(need_c, val, new_gc)
        gd = np.where(need_d, val, new_gd)
    x = 0.5 * (a + b)
    return g(x)


def sup_norm(f, rule_or_nodes, measure: MeasureSpec = LEBESGUE, bounds: Bounds | None = None, polish: int = 3) -> float:
    """Maximum of ``|f|`` on a node grid with golden-section polish of the best nodes (1-D)."""
    if isinstance(rule_or_nodes, QuadratureRule):
        nodes = rule_or_nodes.nodes
        bounds = bounds or (rule_or_nodes.domain.bounds[0] if rule_or_nodes.domain.n == 1 else None)
    else:
        nodes = np.asarray(rule_or_nodes, dtype=float)
    vals = np.abs(_values(f, nodes))
    if measure.density is not None:
        vals = np.where(measure.weight(nodes) > 0, vals, 0.0)
    if not np.all(np.isfinite(vals)):
        return math.inf
    best = float(vals.max()) if vals.size else 0.0
    if nodes.ndim != 1 or polish == 0 or not callable(f) or vals.size < 2:
        return best
    order = np.argsort(nodes)
    xs, vs = nodes[order], vals[order]
    lo_b, hi_b = bounds if bounds is not None else (xs[0], xs[-1])

    def g(t):
        v = np.abs(_values(f, t))
        return np.where(np.isfinite(v), v, 0.0)

    lefts, rights = [], []
    for k in np.argsort(vs)[::-1][:polish]:
        left = xs[k - 1] if k > 0 else (lo_b if math.isfinite(lo_b) else xs[k])
        right = xs[k + 1] if k + 1 < len(xs) else (hi_b if math.isfinite(hi_b) else xs[k])
        # stay inside the open set
        span = right - left
        left, right = left + 1e-15 * abs(span), right - 1e-15 * abs(span)
        if right > left:
            lefts.append(left)
            rights.append(right)
    if lefts:
        best = max(best, float(np.max(_polish_max(g, np.array(lefts), np.array(rights)))))
    return best


def lp_norm(f, p: float, rule: QuadratureRule, measure: MeasureSpec = LEBESGUE) -> float:
    """``(∫|f|^p dμ)^(1/p)``; ``p = inf`` gives the polished grid supremum.

    Returns ``inf`` when the integral is detected to diverge at a finite endpoint.
    """
    if p == math.inf:
        return sup_norm(f, rule, measure)
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")

    def power(x):
        return np.abs(_values(f, x)) ** p

    res = integrate(power, rule, measure)
    if res.diverged:
        return math.inf
    return float(np.real(res.value)) ** (1.0 / p)


def conjugate_exponent(p: float) -> float:
    if p == 1:
        return math.inf
    if p == math.inf:
        return 1.0
    return p / (p - 1.0)
