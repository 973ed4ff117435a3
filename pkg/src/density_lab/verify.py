"""Numerical checks of the analytic identities behind the density theorems.

``H_T(lambda) = <T, exp(-i(lambda, Phi)) f0>`` is evaluated by quadrature and
its derivatives at ``lambda = 0`` are compared with the moments
``<T, (-i)^|alpha| Phi^alpha f0>``; the weak integral of ``f(lambda) H_1(lambda)``
is compared with ``(F(f) o Phi) f0``; growth of seminorms of ``H_1(lambda)`` is
fitted; and monomial / exponential / pullback closures are compared.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from math import comb
from typing import Sequence

import numpy as np

from .approx.decay import best_error, classify
from .approx.solvers import RANK_CUTOFF
from .approx.witness import DualFunctional, _pairing
from .families import exponential_family, monomial_family, pullback_family
from .funcmodel.expr import BinOp, Call, Const, ScalarField
from .funcmodel.phi import ComplexFrequency, MapPhi, StripError, as_frequency, make_phi
from .numerics import LEBESGUE, Domain, MeasureSpec, QuadratureRule, build_quadrature, lp_norm
from .spaces import SpaceSpec, capped_distance, seminorm

FD_STEP = 1e-2
FD_LEVELS = 3
COMPLEX_STEP = 1e-20
CLOSURE_FLOOR = math.sqrt(RANK_CUTOFF)


@dataclass
class CheckRecord:
    check_name: str
    parameters: dict
    lhs: object
    rhs: object
    residual: float
    passed: bool
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "check_name": self.check_name,
            "parameters": self.parameters,
            "lhs": _jsonable(self.lhs),
            "rhs": _jsonable(self.rhs),
            "residual": float(self.residual),
            "pass": bool(self.passed),
            **({"extra": _jsonable(self.extra)} if self.extra else {}),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(u) for k, u in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(u) for u in v]
    if isinstance(v, (complex, np.complexfloating)):
        return float(v.real) if v.imag == 0 else [float(v.real), float(v.imag)]
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    return v


class FourierConvention:
    """``F(f)(xi) = int f(lambda) exp(-i (lambda, xi)) dlambda`` with no ``2 pi`` factor."""

    sign = -1
    prefactor = 1.0

    @staticmethod
    def gaussian_transform(xi, n: int = 1) -> np.ndarray:
        """Closed form ``F(exp(-|lambda|^2/2))(xi) = (2 pi)^(n/2) exp(-|xi|^2/2)``."""
        xi = np.asarray(xi, dtype=float)
        r2 = xi**2 if n == 1 else np.sum(xi**2, axis=-1)
        return (2 * math.pi) ** (n / 2) * np.exp(-0.5 * r2)

    @staticmethod
    def transform(f, xi, rule: QuadratureRule) -> np.ndarray:
        """``F(f)`` at the points ``xi`` by the quadrature rule in ``lambda``."""
        lam, w = rule.nodes, rule.weights
        fv = np.asarray(f(lam)) * w
        xi = np.asarray(xi, dtype=float)
        if rule.domain.n == 1:
            return np.exp(-1j * np.outer(xi, lam)) @ fv
        return np.exp(-1j * (xi @ lam.T)) @ fv

    @classmethod
    def check(cls, rule: QuadratureRule | None = None, tol: float = 1e-10) -> CheckRecord:
        rule = rule or build_quadrature(Domain(((-math.inf, math.inf),)), "gauss-hermite", 80)
        xi = np.linspace(-5, 5, 101)
        lhs = cls.transform(lambda t: np.exp(-0.5 * t**2), xi, rule)
        rhs = cls.gaussian_transform(xi)
        res = float(np.max(np.abs(lhs - rhs)))
        return CheckRecord("fourier_convention", {"order": rule.order}, float(np.max(np.abs(lhs))),
                           float(np.max(rhs)), res, res < tol)


def _exp_member(phi: MapPhi, f0: ScalarField, lam: ComplexFrequency) -> ScalarField:
    """``exp(-i (lambda, Phi)) f0`` as a differentiable field."""
    return exponential_family(phi, f0, [-lam]).members[0]


def _trig_member(phi: MapPhi, f0: ScalarField, lam, kind: str) -> ScalarField:
    """``cos((lambda, Phi)) f0`` or ``sin((lambda, Phi)) f0`` for complex ``lambda``."""
    arg = None
    for lj, comp in zip(lam, phi.components):
        if lj == 0:
            continue
        c = complex(lj)
        term = BinOp("*", Const(c.real if c.imag == 0 else c), comp.expr)
        arg = term if arg is None else BinOp("+", arg, term)
    if arg is None:
        arg = Const(0.0)
    return ScalarField(BinOp("*", Call(kind, arg), f0.expr), n=f0.n)


@dataclass
class HolomorphicProbe:
    """``lambda -> <T, exp(-i(lambda, Phi)) f0>`` on the strip ``||Im lambda|| < eps``."""

    T: DualFunctional
    phi: MapPhi
    f0: ScalarField
    eps: float = math.inf
    rule: QuadratureRule | None = None
    measure: MeasureSpec = LEBESGUE
    cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not isinstance(self.phi, MapPhi):
            self.phi = make_phi(self.phi)
        if self.rule is None and self.T.kind == "integrate" and not self.T.support:
            self.rule = build_quadrature(Domain(((-math.inf, math.inf),) * self.phi.n), "tanh-sinh", 200)

    def __call__(self, lam) -> complex:
        lam = as_frequency(lam, self.eps)
        if not lam.in_strip():
            raise StripError(f"frequency {lam.value} is outside the strip")
        key = lam.value
        if key not in self.cache:
            self.cache[key] = complex(_pairing(self.T, _exp_member(self.phi, self.f0, lam), self.rule, self.measure)[0])
        return self.cache[key]

    def trig_parts(self, lam) -> tuple[complex, complex]:
        """``(<T, cos((lambda,Phi)) f0>, <T, sin((lambda,Phi)) f0>)``, each real on real ``lambda``."""
        lam = tuple(complex(v) for v in np.atleast_1d(lam))
        if float(np.linalg.norm([v.imag for v in lam])) >= self.eps:
            raise StripError(f"frequency {lam} is outside the strip")
        c = _pairing(self.T, _trig_member(self.phi, self.f0, lam, "cos"), self.rule, self.measure)[0]
        s = _pairing(self.T, _trig_member(self.phi, self.f0, lam, "sin"), self.rule, self.measure)[0]
        return complex(c), complex(s)

    def conjugate_symmetry(self, lam) -> float:
        """``|H(-conj lambda) - conj H(lambda)|``, which vanishes for real ``g``, ``Phi`` and ``f0``.

        For parity-even data (even ``g`` and ``f0``, odd ``Phi``) ``H`` is also
        even, so ``H(conj lambda) = conj H(lambda)`` holds as well.
        """
        lam = as_frequency(lam, self.eps)
        mirrored = ComplexFrequency(tuple(-v.conjugate() for v in lam.value), self.eps)
        return abs(self(mirrored) - np.conj(self(lam)))


def h_map(probe: HolomorphicProbe, lam, rule: QuadratureRule | None = None) -> complex:
    """``H_T(lambda) = <T, exp(-i(lambda, Phi)) f0>``."""
    if rule is not None and rule is not probe.rule:
        probe = HolomorphicProbe(probe.T, probe.phi, probe.f0, probe.eps, rule, probe.measure)
    return probe(lam)


def _central_weights(k: int) -> list[tuple[float, float]]:
    """Offsets (in units of h) and weights of the central difference for ``d^k/dt^k``."""
    return [((k / 2.0 - j), (-1) ** j * comb(k, j)) for j in range(k + 1)]


def _fd_derivative(probe: HolomorphicProbe, alpha, h: float) -> complex:
    n = len(alpha)
    stencils = [_central_weights(a) for a in alpha]
    total = 0j
    for combo in itertools.product(*stencils):
        lam = tuple(off * h for off, _ in combo)
        wgt = np.prod([c for _, c in combo])
        total += wgt * probe(lam if n > 1 else lam[0])
    return total / h ** sum(alpha)


def richardson(probe: HolomorphicProbe, alpha, h: float = FD_STEP, levels: int = FD_LEVELS) -> complex:
    """Richardson-extrapolated central differences of ``H_T`` at ``lambda = 0``.

    The central stencil of ``d^k`` at half-integer or integer offsets has an
    error expansion in ``h^2``; step halving eliminates one term per level.
    """
    table = [_fd_derivative(probe, alpha, h / 2**j) for j in range(levels)]
    for m in range(1, levels):
        table = [(4**m * table[j + 1] - table[j]) / (4**m - 1) for j in range(len(table) - 1)]
    return table[0]


def complex_step(probe: HolomorphicProbe, direction: int = 0, h: float = COMPLEX_STEP) -> complex:
    """First derivative of ``H_T`` at 0 along axis ``direction`` by the complex-step method.

    ``H_T = C - i S`` with ``C, S`` the cosine and sine pairings, both real on
    the real axis for real data; ``C'(0) = Im C(ih)/h`` without cancellation.
    """
    n = probe.phi.n
    lam = [0j] * n
    lam[direction] = 1j * h
    c, s = probe.trig_parts(lam)
    return c.imag / h - 1j * (s.imag / h)


def moment_side(probe: HolomorphicProbe, alpha) -> complex:
    """``<T, (-i)^|alpha| Phi^alpha f0>``."""
    alpha = tuple(alpha)
    fam = monomial_family(probe.phi, probe.f0, sum(alpha))
    member = fam.members[fam.index.index(alpha)]
    val = _pairing(probe.T, member, probe.rule, probe.measure)[0]
    return (-1j) ** sum(alpha) * val


def check_prop210(probe: HolomorphicProbe, alpha, method: str = "richardson-fd", tol: float | None = None,
                  h: float = FD_STEP, levels: int = FD_LEVELS) -> CheckRecord:
    """Compare ``D^alpha (T o H_1)(0)`` with ``<T, (-i)^|alpha| Phi^alpha f0>``.

    The relative error is taken against ``max(|rhs|, |H_T(0)|)`` so that
    vanishing odd moments do not divide by zero.
    """
    alpha = (alpha,) if isinstance(alpha, (int, np.integer)) else tuple(alpha)
    if len(alpha) != probe.phi.n:
        raise ValueError(f"multi-index {alpha} does not match dimension {probe.phi.n}")
    order = sum(alpha)
    if method == "richardson-fd":
        if not 1 <= order <= 4:
            raise ValueError("richardson-fd supports 1 <= |alpha| <= 4")
        lhs = richardson(probe, alpha, h, levels)
        tol = 1e-5 if tol is None else tol
    elif method == "complex-step":
        if order != 1:
            raise ValueError("complex-step is valid for |alpha| = 1 only")
        lhs = complex_step(probe, alpha.index(1))
        tol = 1e-10 if tol is None else tol
    else:
        raise ValueError(f"unknown method {method!r}")
    rhs = moment_side(probe, alpha)
    scale = max(abs(rhs), abs(probe(tuple([0.0] * probe.phi.n) if probe.phi.n > 1 else 0.0)))
    rel = abs(lhs - rhs) / scale
    return CheckRecord("prop210", {"alpha": list(alpha), "method": method, "h": h, "levels": levels},
                       lhs, rhs, rel, rel < tol)


def _lambda_rule(order: int, n: int = 1) -> QuadratureRule:
    return build_quadrature(Domain(((-math.inf, math.inf),) * n), "gauss-hermite", order)


def _is_standard_gaussian(f: ScalarField) -> bool:
    probe = np.linspace(-3, 3, 13)
    if f.n == 1:
        return np.allclose(np.asarray(f(probe)), np.exp(-0.5 * probe**2), rtol=1e-15, atol=0)
    pts = np.stack([probe] * f.n, axis=-1)
    return np.allclose(np.asarray(f(pts)), np.exp(-0.5 * np.sum(pts**2, axis=-1)), rtol=1e-15, atol=0)


def _transform_oracle(f: ScalarField, xi: np.ndarray) -> np.ndarray:
    """``F(f)`` by a high-order double-exponential rule, independent of the Gauss-Hermite ``lambda`` rule."""
    rule = build_quadrature(Domain(((-math.inf, math.inf),)), "tanh-sinh", 400)
    return FourierConvention.transform(f, xi, rule)


def check_lemma212(f: ScalarField, phi, f0: ScalarField, rule_lambda: QuadratureRule | int = 64,
                   x_grid=None, tol: float = 1e-8) -> CheckRecord:
    """``int f(lambda) exp(-i(lambda,Phi(x))) f0(x) dlambda`` against ``F(f)(Phi(x)) f0(x)``."""
    phi = phi if isinstance(phi, MapPhi) else make_phi(phi)
    n = phi.n
    rule = _lambda_rule(rule_lambda, n) if isinstance(rule_lambda, int) else rule_lambda
    if x_grid is None:
        x_grid = np.linspace(-5, 5, 201)
    x = np.asarray(x_grid, dtype=float)
    y = np.asarray(phi(x), dtype=float)
    f0x = np.asarray(f0(x))
    lhs = FourierConvention.transform(f, y, rule) * f0x
    if _is_standard_gaussian(f):
        Ff = FourierConvention.gaussian_transform(y, n)
        source = "closed-form"
    elif n == 1:
        Ff = _transform_oracle(f, y)
        source = "adaptive-quadrature"
    else:
        raise ValueError("the independent transform oracle is one-dimensional")
    rhs = Ff * f0x
    resid = np.abs(lhs - rhs)
    res = float(np.max(resid)) if resid.size else 0.0
    return CheckRecord("lemma212", {"order": rule.order, "points": len(x), "rhs_source": source},
                       float(np.max(np.abs(lhs))), float(np.max(np.abs(rhs))), res, res < tol,
                       extra={"residual_grid": resid.tolist()})


def check_lemma28(probe: HolomorphicProbe, lam_grid, space: SpaceSpec, k: int = 1, alpha=None, N: int = 0,
                  slack: float = 1.0) -> CheckRecord:
    """Growth of ``p_{k,alpha,N}(H_1(lambda))`` along a real grid: fitted power of ``1+|lambda|``."""
    lam_grid = np.asarray(lam_grid, dtype=float)
    alpha = (0,) * space.n if alpha is None else ((alpha,) if isinstance(alpha, int) else tuple(alpha))
    vals = []
    for lam in lam_grid:
        lv = (lam,) + (0.0,) * (probe.phi.n - 1)
        member = _exp_member(probe.phi, probe.f0, ComplexFrequency(lv))
        vals.append(seminorm(space, member, k, alpha, N))
    vals = np.asarray(vals)
    t = np.log1p(np.abs(lam_grid))
    usable = lam_grid > 0
    if usable.sum() >= 2:
        exponent = float(np.polyfit(t[usable], np.log(vals[usable]), 1)[0])
    else:
        exponent = 0.0
    bound = N + sum(alpha) + slack
    return CheckRecord("lemma28", {"k": k, "alpha": list(alpha), "N": N, "space": space.kind},
                       exponent, bound, exponent - bound, exponent <= bound,
                       extra={"lambda": lam_grid.tolist(), "seminorm": vals.tolist()})


def check_group_law(probe: HolomorphicProbe, lam1, lam2, tol: float = 1e-10) -> CheckRecord:
    """``H(lambda1 + lambda2)`` against ``H`` for the tilted weight ``exp(-i(lambda2,Phi)) f0`` at ``lambda1``."""
    l1, l2 = as_frequency(lam1, probe.eps), as_frequency(lam2, probe.eps)
    lhs = probe(l1 + l2)
    tilted = _exp_member(probe.phi, probe.f0, l2)
    other = HolomorphicProbe(probe.T, probe.phi, tilted, probe.eps, probe.rule, probe.measure)
    rhs = other(l1)
    res = abs(lhs - rhs)
    return CheckRecord("group_law", {"lambda1": [[v.real, v.imag] for v in l1.value],
                                     "lambda2": [[v.real, v.imag] for v in l2.value]},
                       lhs, rhs, res, res < tol)


def default_frequency_grid(size: int, half_width: float = 4.0) -> list[float]:
    """``size`` equispaced real frequencies on ``[-half_width, half_width]``.

    Sizes of the form ``2^j + 1`` give nested grids.
    """
    if size == 1:
        return [0.0]
    return [float(v) for v in np.linspace(-half_width, half_width, size)]


def gaussian_dictionary(size: int, width: float = 4.0) -> list[ScalarField]:
    """Gaussian bumps ``exp(-(y-c)^2)`` with ``size`` centres on ``[-width, width]``."""
    centres = [0.0] if size == 1 else np.linspace(-width, width, size)
    return [ScalarField.parse(f"exp(-(x-({float(c)!r}))^2)", name=f"bump@{float(c):g}") for c in centres]


@dataclass
class ClosureComparison:
    sizes: list
    errors_monomial: list
    errors_exponential: list
    errors_pullback: list
    classification_monomial: str
    classification_exponential: str
    gap: float
    ratio: float
    consistent: bool
    mode: str

    def to_dict(self) -> dict:
        return {k: _jsonable(v) for k, v in self.__dict__.items()}


def _norm(target, space: SpaceSpec, rule=None) -> float:
    """``target``'s size in the space's verdict metric."""
    if space.kind == "Lp":
        return lp_norm(target, space.p, rule or space.rules[0], space.measure)
    return capped_distance(space, target)


def compare_closures(target, phi, f0: ScalarField, space: SpaceSpec, degree_sizes: Sequence[int],
                     frequency_grids: Sequence[Sequence] | None = None, rule=None,
                     include_pullback: bool = True) -> ClosureComparison:
    """Best-approximation errors of ``target`` from monomial, real-exponential and pullback
    families at matched member counts.

    Consistent means both sequences decay, or both plateau, with final errors
    within a factor 2 of each other. Final errors both below
    ``CLOSURE_FLOOR`` times the target's norm count as equal: that is the
    resolution of the rank-truncated solvers, so their ratio is noise.
    """
    phi = phi if isinstance(phi, MapPhi) else make_phi(phi)
    sizes = list(degree_sizes)
    if frequency_grids is None:
        frequency_grids = [default_frequency_grid(s) for s in sizes]
    if [len(g) for g in frequency_grids] != sizes:
        raise ValueError("frequency grids must match the member counts")
    em, ee, ep = [], [], []
    for s, grid in zip(sizes, frequency_grids):
        em.append(best_error(target, monomial_family(phi, f0, s - 1), space, rule).errors[-1])
        ee.append(best_error(target, exponential_family(phi, f0, grid), space, rule).errors[-1])
        if include_pullback and phi.n == 1:
            ep.append(best_error(target, pullback_family(gaussian_dictionary(s), phi, f0), space, rule).errors[-1])
    cm, ce = classify(sizes, em), classify(sizes, ee)
    a, b = em[-1], ee[-1]
    ratio = max(a, b) / max(min(a, b), 1e-300)
    if cm.classification == ce.classification == "decaying":
        consistent, mode = ratio <= 2.0 or max(a, b) <= CLOSURE_FLOOR * _norm(target, space, rule), "both-decay"
    elif cm.classification == ce.classification == "plateau":
        consistent, mode = ratio <= 2.0, "both-plateau"
    else:
        consistent, mode = False, "split"
    return ClosureComparison(sizes, em, ee, ep, cm.classification, ce.classification, abs(a - b), ratio,
                             consistent, mode)
