"""Continuous linear functionals and annihilator witnesses for density verdicts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from ..families import monomial_family
from ..funcmodel.expr import ScalarField
from ..funcmodel.phi import MapPhi, make_phi
from ..numerics import LEBESGUE, Domain, MeasureSpec, build_quadrature, conjugate_exponent, integrate, lp_norm
from ..spaces import SpaceSpec
from .decay import DecayTable, error_decay, targets_for

OUTCOMES = ("dense-consistent", "obstruction-found", "inconclusive")
ZERO_WINDOW = 10.0
ZERO_GRID = 20001
NONZERO_FLOOR = 1e-100
MIN_TOLERANCE = 1e-13


class DualError(ValueError):
    pass


@dataclass
class DualFunctional:
    """``integrate`` against ``g``, ``point`` evaluation of ``D^alpha`` at ``x0``, or a ``combination``."""

    kind: str
    g: ScalarField | None = None
    q: float | None = None
    x0: tuple | None = None
    alpha: tuple = (0,)
    terms: tuple = ()
    support: tuple | None = None

    def validate(self, space: SpaceSpec) -> None:
        if self.kind == "combination":
            for _, t in self.terms:
                t.validate(space)
            return
        if space.kind == "Lp":
            if self.kind != "integrate":
                raise DualError("on L_p only integration against an L_q function is continuous")
            q = conjugate_exponent(space.p)
            if self.q is not None and self.q != q:
                raise DualError(f"functional uses q = {self.q}, the space needs q = {q}")
            rule = _support_rule(self.support) if self.support else space.rules[0]
            if not math.isfinite(lp_norm(self.g, q, rule, space.measure)):
                raise DualError("g is not in L_q")
        elif self.kind == "point" and sum(self.alpha) > space.derivative_cap:
            raise DualError(f"point evaluation of order {sum(self.alpha)} exceeds m = {space.m}")

    def describe(self) -> dict:
        if self.kind == "integrate":
            return {"kind": "integrate", "g": self.g.text, "q": self.q, "support": self.support}
        if self.kind == "point":
            return {"kind": "point", "x0": list(self.x0), "alpha": list(self.alpha)}
        return {"kind": "combination", "terms": [[float(c), t.describe()] for c, t in self.terms]}


def _support_rule(support):
    dom = Domain(tuple(tuple(b) for b in support))
    return build_quadrature(dom, "gauss-legendre-composite", 20, panels=16)


def _pairing(T: DualFunctional, f, rule=None, measure: MeasureSpec = LEBESGUE):
    """Value and error estimate of ``<T, f>`` (bilinear, no conjugation)."""
    if T.kind == "combination":
        val, err = 0.0, 0.0
        for c, t in T.terms:
            v, e = _pairing(t, f, rule, measure)
            val, err = val + c * v, err + abs(c) * e
        return val, err
    if T.kind == "point":
        x0 = np.asarray(T.x0, dtype=float)
        pt = x0 if len(x0) == 1 else x0[None, :]
        d = f if sum(T.alpha) == 0 else f.derivative(T.alpha)
        return complex(np.asarray(d(pt)).ravel()[0]) if np.iscomplexobj(np.asarray(d(pt))) else float(np.asarray(d(pt)).ravel()[0]), 0.0
    if T.support:
        rule = _support_rule(T.support)
    if rule is None:
        raise DualError("integration functional needs a quadrature rule")
    res = integrate(lambda x: np.asarray(T.g(x)) * np.asarray(f(x)), rule, measure)
    return res.value, res.error_estimate


def apply_dual(T: DualFunctional, f, rule=None, measure: MeasureSpec = LEBESGUE):
    """``<T, f>``: integral of ``g f`` or the value ``D^alpha f(x0)``."""
    return _pairing(T, f, rule, measure)[0]


@dataclass
class DensityVerdict:
    outcome: str
    witness: DualFunctional | None = None
    decay: list = field(default_factory=list)
    pairings: list = field(default_factory=list)
    separating_target: str | None = None
    separating_value: float | None = None
    tolerance: float | None = None

    def to_dict(self) -> dict:
        return {
            "outcome": self.outcome,
            "witness": None if self.witness is None else self.witness.describe(),
            "decay": [d.to_dict() if isinstance(d, DecayTable) else d for d in self.decay],
            "max_pairing": max((abs(p) for p in self.pairings), default=None),
            "separating_target": self.separating_target,
            "separating_value": self.separating_value,
            "tolerance": self.tolerance,
        }


def _window(domain: Domain):
    lo, hi = domain.bounds[0]
    return max(lo, -ZERO_WINDOW), min(hi, ZERO_WINDOW)


def find_zero_interval(f0: ScalarField, domain: Domain):
    """An interval on which ``f0`` is exactly zero, bracketed by clearly non-zero values.

    The bracketing rules out zeros that are merely floating-point underflow.
    """
    a, b = _window(domain)
    x = np.linspace(a, b, ZERO_GRID)[1:-1]
    v = np.abs(np.asarray(f0(x)))
    zero = v == 0
    best = None
    i = 0
    while i < len(x):
        if not zero[i]:
            i += 1
            continue
        j = i
        while j + 1 < len(x) and zero[j + 1]:
            j += 1
        left_ok = i > 0 and v[i - 1] > NONZERO_FLOOR
        right_ok = j + 1 < len(x) and v[j + 1] > NONZERO_FLOOR
        if j > i and left_ok and right_ok and (best is None or x[j] - x[i] > best[1] - best[0]):
            best = (float(x[i]), float(x[j]))
        i = j + 1
    return best


def find_zero_point(f0: ScalarField, box):
    """A zero of ``f0`` in the closed box: an exact grid zero or a bracketed sign change."""
    lo, hi = box[0]
    x = np.linspace(lo, hi, 4001)
    v = np.asarray(f0(x))
    if np.iscomplexobj(v):
        v = np.abs(v)
    exact = np.flatnonzero(v == 0)
    if len(exact):
        k = exact[np.argmin(np.abs(x[exact] - 0.5 * (lo + hi)))]
        return float(x[k])
    s = np.sign(v)
    change = np.flatnonzero(s[:-1] * s[1:] < 0)
    if len(change):
        k = change[0]
        return float(brentq(lambda t: float(np.asarray(f0(np.array([t])))[0]), x[k], x[k + 1], xtol=1e-15))
    return None


def _smoothed_indicator(a: float, b: float) -> ScalarField:
    """``max(0, 1-u^2)^3`` with ``u`` mapping ``[a, b]`` onto ``[-1, 1]``."""
    c, h = 0.5 * (a + b), 0.5 * (b - a)
    u2 = f"((x-({c!r}))/{h!r})^2"
    return ScalarField.parse(f"((1-{u2}+abs(1-{u2}))/2)^3", name=f"bump[{a:g},{b:g}]")


def annihilator_witness(space: SpaceSpec, f0: ScalarField, phi, probe_degree: int = 12,
                        sizes=None, rule=None) -> DensityVerdict:
    """Search for a functional annihilating every ``Phi^beta f0``; otherwise gather decay evidence."""
    if probe_degree < 1:
        raise ValueError("probe_degree must be >= 1")
    phi = phi if isinstance(phi, MapPhi) else make_phi(phi)
    probes = monomial_family(phi, f0, probe_degree).members
    if space.n == 1:
        if space.kind == "Lp":
            interval = find_zero_interval(f0, space.domain)
            if interval is not None:
                g = _smoothed_indicator(*interval)
                T = DualFunctional("integrate", g=g, q=conjugate_exponent(space.p), support=(interval,))
                return _verify(T, probes, g, space, f"indicator-like bump on [{interval[0]:g}, {interval[1]:g}]")
        elif space.kind == "Cm":
            x0 = find_zero_point(f0, space.domain.box(space.k_max))
            if x0 is not None:
                T = DualFunctional("point", x0=(x0,), alpha=(0,))
                return _verify(T, probes, ScalarField.constant(1.0), space, "1")
    # no obstruction: decay evidence on independent targets
    if sizes is None:
        sizes = [4, 8, 16] if space.kind != "Lp" else [5, 10, 20]
    tables = []
    for t in targets_for(space):
        tables.append(error_decay(t, lambda D: monomial_family(phi, f0, D - 1), sizes, space, rule))
    outcome = "dense-consistent" if len(tables) >= 3 and all(t.classification == "decaying" for t in tables) else "inconclusive"
    return DensityVerdict(outcome, decay=tables)


def _verify(T: DualFunctional, probes, target: ScalarField, space: SpaceSpec, label: str) -> DensityVerdict:
    vals, errs = [], []
    for member in probes:
        v, e = _pairing(T, member, space.rules[0], space.measure)
        vals.append(v)
        errs.append(e)
    sep, sep_err = _pairing(T, target, space.rules[0], space.measure)
    tol = max(max(errs + [sep_err]), MIN_TOLERANCE)
    annihilates = max(abs(v) for v in vals) <= 10 * tol
    separates = abs(sep) > 10 * tol
    outcome = "obstruction-found" if annihilates and separates else "inconclusive"
    return DensityVerdict(outcome, T, pairings=vals, separating_target=label if target.text != "1" else "1",
                          separating_value=float(abs(sep)), tolerance=tol)
