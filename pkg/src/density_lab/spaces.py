"""Concrete function spaces with seminorms ``p_{k,alpha,N}(f) = ||chi_k nabla_N^alpha f||_p``.

Three models are provided: ``Lp`` (inclusion maps, ``U_k = U``), ``Cm``
(plain derivatives, sup over a compact exhaustion) and ``Schwartz``
(``(1+|x|)^N D^alpha f`` on the whole space, truncated to finite caps).
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .numerics import (
    LEBESGUE,
    Domain,
    MeasureSpec,
    QuadratureRule,
    build_quadrature,
    default_rule,
    lp_norm,
    sup_norm,
)

KINDS = ("Lp", "Cm", "Schwartz")

SCHWARTZ_HALF_WIDTH = 40.0
SUP_GRID_1D = 4001
SUP_GRID_2D = 201


class SpaceError(ValueError):
    pass


def multi_indices(n: int, max_order: int):
    """All multi-indices of length ``n`` with ``|alpha| <= max_order``, graded."""
    out = []
    for total in range(max_order + 1):
        for combo in itertools.product(range(total + 1), repeat=n):
            if sum(combo) == total:
                out.append(tuple(combo))
    return out


@dataclass(frozen=True)
class SeminormModel:
    """Index family of the seminorms and the Leibniz coefficients of ``nabla``."""

    kind: str
    n: int
    k_values: tuple[int, ...]
    alphas: tuple[tuple[int, ...], ...]
    n_values: tuple[int, ...]

    @staticmethod
    def leibniz_coefficients(alpha) -> dict:
        """``c_{beta,gamma;alpha}`` with ``beta + gamma = alpha`` (products of binomials)."""
        out = {}
        for beta in itertools.product(*(range(a + 1) for a in alpha)):
            gamma = tuple(a - b for a, b in zip(alpha, beta))
            out[(beta, gamma)] = math.prod(comb(a, b) for a, b in zip(alpha, beta))
        return out

    def indices(self):
        rows = [(k, a, N) for k in self.k_values for a in self.alphas for N in self.n_values]
        return sorted(rows, key=lambda r: (r[0], sum(r[1]), r[2], r[1]))


@dataclass(frozen=True)
class SpaceSpec:
    kind: str
    domain: Domain
    measure: MeasureSpec
    p: float
    m: int
    k_max: int
    n_max: int
    alpha_max: int
    model: SeminormModel
    rules: tuple[QuadratureRule, ...] = field(repr=False)
    m_infinite: bool = False

    @property
    def n(self) -> int:
        return self.domain.n

    @property
    def derivative_cap(self) -> int:
        return min(self.m, self.alpha_max)

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "bounds": [list(b) for b in self.domain.bounds],
            "exhaustion": [[list(b) for b in box] for box in self.domain.exhaustion],
            "p": "inf" if self.p == math.inf else self.p,
            "m": "inf" if self.m_infinite else self.m,
            "caps": {"k_max": self.k_max, "N_max": self.n_max, "alpha_max": self.alpha_max},
        }


def _default_exhaustion(domain: Domain, k_max: int):
    boxes = []
    for k in range(1, k_max + 1):
        box = []
        for a, b in domain.bounds:
            fa, fb = math.isfinite(a), math.isfinite(b)
            if fa and fb:
                d = (b - a) / (2 * (k + 1))
                box.append((a + d, b - d))
            elif fa:
                box.append((a + 1.0 / (k + 1), a + 4.0 * k))
            elif fb:
                box.append((b - 4.0 * k, b - 1.0 / (k + 1)))
            else:
                box.append((-4.0 * k, 4.0 * k))
        boxes.append(tuple(box))
    return tuple(boxes)


def _as_domain(value, n=1) -> Domain:
    if isinstance(value, Domain):
        return value
    if value is None:
        return Domain(((-math.inf, math.inf),) * n)
    value = list(value)
    if len(value) == 2 and not isinstance(value[0], (list, tuple)):
        return Domain((tuple(value),))
    return Domain(tuple(tuple(b) for b in value))


def make_space(kind: str, params: dict | None = None) -> SpaceSpec:
    """Validated space of the given kind.

    Recognised params: ``domain`` (Domain or list of bounds), ``exhaustion``,
    ``measure``, ``p``, ``m`` (int or ``"inf"``), ``k_max``, ``N_max``,
    ``alpha_max``, ``rule`` (a QuadratureRule used for the L_p norms).
    """
    params = dict(params or {})
    if kind not in KINDS:
        raise SpaceError(f"unknown space kind {kind!r}; expected one of {KINDS}")
    n = int(params.get("n", 1))
    domain = _as_domain(params.get("domain"), n)
    measure = params.get("measure") or LEBESGUE
    measure.check_atoms(domain)
    p = params.get("p")
    p = math.inf if p in ("inf", math.inf) else p
    m_raw = params.get("m", 0)
    alpha_max = int(params.get("alpha_max", 3))
    m_inf = m_raw in ("inf", math.inf)
    m = alpha_max if m_inf else int(m_raw)
    n_max = int(params.get("N_max", 0))
    exhaustion = params.get("exhaustion")

    if kind == "Lp":
        p = 2.0 if p is None else float(p)
        if not p >= 1:
            raise SpaceError(f"Lp needs p >= 1, got {p}")
        if m_inf or m != 0:
            raise SpaceError("Lp spaces have m = 0")
        if exhaustion:
            raise SpaceError("Lp spaces use U_k = U")
        k_max, n_max, alpha_max = 1, 0, 0
        dom = domain
        rules = (params.get("rule") or default_rule(dom),)
    elif kind == "Cm":
        p = math.inf if p is None else p
        if p != math.inf:
            raise SpaceError(f"Cm spaces need p = inf, got p = {p}")
        if measure is not LEBESGUE and measure.density is not None:
            raise SpaceError("Cm spaces use Lebesgue measure")
        k_max = int(params.get("k_max", len(exhaustion) if exhaustion else 3))
        if exhaustion:
            boxes = tuple(_as_domain(box).bounds for box in exhaustion)
        else:
            boxes = _default_exhaustion(domain, k_max)
        dom = Domain(domain.bounds, boxes)
        if not dom.compact_exhaustion():
            raise SpaceError("Cm exhaustion must consist of boxes with compact closures nested strictly inside U")
        k_max = len(boxes)
        n_max = 0
        rules = tuple(_sup_rule(Domain(dom.box(k))) for k in range(1, k_max + 1))
    else:
        if any(math.isfinite(lo) or math.isfinite(hi) for lo, hi in domain.bounds):
            raise SpaceError("Schwartz space lives on the whole of R^n")
        p = math.inf if p is None else float(p)
        if exhaustion:
            raise SpaceError("Schwartz spaces use U_k = R^n")
        if not m_inf and "m" in params and int(m_raw) < alpha_max:
            alpha_max = int(m_raw)
        m = alpha_max
        m_inf = True
        k_max = 1
        n_max = int(params.get("N_max", 2))
        dom = domain
        if p == math.inf:
            rules = (_sup_rule(Domain(((-SCHWARTZ_HALF_WIDTH, SCHWARTZ_HALF_WIDTH),) * domain.n)),)
        else:
            rules = (params.get("rule") or default_rule(dom),)
    cap = min(m, alpha_max)
    model = SeminormModel(
        kind=kind,
        n=dom.n,
        k_values=tuple(range(1, k_max + 1)),
        alphas=tuple(multi_indices(dom.n, cap)),
        n_values=tuple(range(n_max + 1)),
    )
    return SpaceSpec(kind, dom, measure, p, m, k_max, n_max, alpha_max, model, rules, m_inf)


def _sup_rule(box: Domain) -> QuadratureRule:
    """Closed-box grid used for suprema, stored as a composite rule on the box."""
    if box.n == 1:
        return build_quadrature(box, "gauss-legendre-composite", 8, panels=(SUP_GRID_1D // 8))
    return build_quadrature(box, "gauss-legendre-composite", 8, panels=SUP_GRID_2D // 8)


def _sup_nodes(space: SpaceSpec, k: int) -> np.ndarray:
    """Sup grid on the closure of ``U_k`` (whole-space grid for Schwartz)."""
    if space.kind == "Schwartz":
        L = SCHWARTZ_HALF_WIDTH
        s = np.linspace(-math.asinh(L), math.asinh(L), SUP_GRID_1D if space.n == 1 else SUP_GRID_2D)
        axis = np.sinh(s)
    else:
        box = space.domain.box(k)
        if space.n == 1:
            return np.linspace(box[0][0], box[0][1], SUP_GRID_1D)
        axes = [np.linspace(lo, hi, SUP_GRID_2D) for lo, hi in box]
        g = np.meshgrid(*axes, indexing="ij")
        return np.stack([c.ravel() for c in g], axis=-1)
    if space.n == 1:
        return axis
    g = np.meshgrid(axis, axis, indexing="ij")
    return np.stack([c.ravel() for c in g], axis=-1)


def nabla(space: SpaceSpec, f, alpha, N: int):
    """Evaluator of ``nabla_N^alpha f`` for the space's model."""
    alpha = tuple(alpha) if not isinstance(alpha, int) else (alpha,)
    order = sum(alpha)
    if order == 0:
        base = f
    else:
        if not getattr(f, "smooth", True):
            raise SpaceError("derivative requested of a measurable-only field")
        if not hasattr(f, "derivative"):
            raise SpaceError("derivatives are not available for this function")
        base = f.derivative(alpha)
    if space.kind != "Schwartz" or N == 0:
        return base

    def weighted(x):
        x = np.asarray(x, dtype=float)
        r = np.abs(x) if x.ndim == 1 else np.linalg.norm(x, axis=-1)
        return (1.0 + r) ** N * np.asarray(base(x))

    return weighted


def _check_index(space: SpaceSpec, k, alpha, N):
    if not 1 <= k <= space.k_max:
        raise SpaceError(f"k = {k} outside 1..{space.k_max}")
    if len(alpha) != space.n:
        raise SpaceError(f"multi-index {alpha} has the wrong length")
    if sum(alpha) > space.derivative_cap:
        raise SpaceError(f"|alpha| = {sum(alpha)} exceeds min(m, alpha_max) = {space.derivative_cap}")
    if not 0 <= N <= space.n_max and space.kind == "Schwartz":
        raise SpaceError(f"N = {N} outside 0..{space.n_max}")


def seminorm(space: SpaceSpec, f, k: int = 1, alpha=None, N: int = 0) -> float:
    """``p_{k,alpha,N}(f)``; complex-valued ``f`` is measured through its modulus."""
    if alpha is None:
        alpha = (0,) * space.n
    elif isinstance(alpha, (int, np.integer)):
        alpha = (int(alpha),)
    alpha = tuple(alpha)
    _check_index(space, k, alpha, N)
    g = nabla(space, f, alpha, N)
    if space.kind == "Lp":
        return lp_norm(g, space.p, space.rules[0], space.measure)
    if space.p == math.inf:
        nodes = _sup_nodes(space, k)
        if space.kind == "Cm":
            bounds = space.domain.box(k)[0] if space.n == 1 else None
            # closure of U_k: polish may touch the endpoints
            return sup_norm(g, nodes, bounds=bounds)
        return sup_norm(g, nodes)
    return lp_norm(g, space.p, space.rules[0], space.measure)


@dataclass(frozen=True)
class SeminormRow:
    k: int
    alpha: tuple[int, ...]
    N: int
    value: float


def seminorm_panel(space: SpaceSpec, f) -> list[SeminormRow]:
    """All distinct seminorms within caps, sorted by ``(k, |alpha|, N)``."""
    rows = []
    for k, alpha, N in space.model.indices():
        rows.append(SeminormRow(k, alpha, N, seminorm(space, f, k, alpha, N)))
    return rows


def capped_distance(space: SpaceSpec, f, g=None) -> float:
    """``max`` over the capped family of ``p(f - g)``; ``g`` defaults to 0."""
    from .funcmodel.expr import Combination

    h = f if g is None else Combination([(1.0, f), (-1.0, g)], n=space.n)
    return max(row.value for row in seminorm_panel(space, h))


def write_panel_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "alpha", "N", "value"])
        for r in rows:
            w.writerow([r.k, "".join(str(a) for a in r.alpha) if len(r.alpha) > 1 else r.alpha[0], r.N, repr(float(r.value))])


def leibniz_residual(space: SpaceSpec, g, f, alpha, N: int, x) -> float:
    """Max ``|nabla(gf) - sum c (D^beta g)(nabla^gamma f)|`` at the points ``x``."""
    from .funcmodel.expr import ScalarField

    if isinstance(g, ScalarField) and isinstance(f, ScalarField):
        gf = g * f
    else:
        raise SpaceError("Leibniz check needs ScalarFields")
    lhs = nabla(space, gf, alpha, N)(x)
    rhs = 0.0
    for (beta, gamma), c in SeminormModel.leibniz_coefficients(alpha).items():
        dg = g.derivative(beta)(x) if sum(beta) else g(x)
        rhs = rhs + c * dg * nabla(space, f, gamma, N)(x)
    scale = np.maximum(1.0, np.abs(lhs))
    return float(np.max(np.abs(lhs - rhs) / scale))
