"""Error-versus-size tables and their decaying/plateau classification."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..families import BasisFamily
from ..funcmodel.expr import ScalarField
from ..spaces import SCHWARTZ_HALF_WIDTH, SpaceSpec, capped_distance
from .solvers import ProjectionReport, project_l2, project_lp, project_sup

SCHWARTZ_FIT_GRID = 801

TARGETS = {
    "whole": ("1/(1+x^2)", "exp(-(x-1)^2)", "sin(3*x)*exp(-x^2/4)"),
    "half": ("x*exp(-x)", "exp(-2*x)", "exp(-x/2)/(1+x)"),
}


def targets_for(space: SpaceSpec) -> list[ScalarField]:
    """Library targets suited to the space's domain (half-line ones shifted to its endpoint)."""
    if space.n == 1:
        lo, hi = space.domain.bounds[0]
        if math.isfinite(lo) and not math.isfinite(hi):
            return [ScalarField.parse(t, name=t).shift(lo) if lo else ScalarField.parse(t, name=t) for t in TARGETS["half"]]
    return [ScalarField.parse(t, name=t) for t in TARGETS["whole"]]


@dataclass
class DecayTable:
    sizes: list
    errors: list
    fit_residuals: list
    slope: float
    intercept: float
    tail_slope: float
    classification: str
    reports: list = field(default_factory=list, repr=False)

    @property
    def rate(self) -> float:
        return -self.slope

    @property
    def plateau(self) -> float:
        return float(self.errors[-1])

    def to_dict(self) -> dict:
        return {
            "sizes": list(self.sizes),
            "errors": [float(e) for e in self.errors],
            "fit_residuals": [float(r) for r in self.fit_residuals],
            "slope": self.slope,
            "intercept": self.intercept,
            "tail_slope": self.tail_slope,
            "classification": self.classification,
        }

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["size", "error", "fit_residual"])
            for s, e, r in zip(self.sizes, self.errors, self.fit_residuals):
                w.writerow([s, repr(float(e)), repr(float(r))])


def classify(sizes: Sequence[float], errors: Sequence[float]) -> DecayTable:
    """Least-squares fit of ``log(error)`` against size and the decay verdict.

    The sequence counts as decaying when the last error is below half the
    first and the slope between the last two sizes is negative.
    """
    s = np.asarray(sizes, dtype=float)
    e = np.maximum(np.asarray(errors, dtype=float), 1e-300)
    le = np.log(e)
    if len(s) >= 2:
        slope, intercept = np.polyfit(s, le, 1)
        tail = (le[-1] - le[-2]) / (s[-1] - s[-2])
    else:
        slope, intercept, tail = 0.0, float(le[0]), 0.0
    resid = le - (slope * s + intercept)
    decaying = len(s) >= 2 and e[-1] < 0.5 * e[0] and tail < 0
    return DecayTable(list(sizes), [float(v) for v in errors], resid.tolist(), float(slope), float(intercept),
                      float(tail), "decaying" if decaying else "plateau")


def schwartz_row_weights(space: SpaceSpec):
    """``(alpha, (1+|x|)^N)`` blocks covering the capped Schwartz seminorms."""
    out = []
    for alpha in space.model.alphas:
        for N in space.model.n_values:
            out.append((alpha, (lambda x, N=N: (1.0 + np.abs(x)) ** N) if N else None))
    return out


def best_error(target, family: BasisFamily, space: SpaceSpec, rule=None, lawson_iter: int = 500) -> ProjectionReport:
    """Best approximation of ``target`` by ``family`` measured in the space's verdict metric."""
    if space.kind == "Lp":
        rule = rule or space.rules[0]
        if space.p == 2:
            return project_l2(target, family, rule, space.measure)
        return project_lp(target, family, space.p, rule, space.measure)
    if space.kind == "Cm":
        box = space.domain.box(space.k_max)
        return project_sup(target, family, box, space.m, space.alpha_max, max_iter=lawson_iter)
    # Schwartz: simultaneous weighted minimax fit, then the polished capped distance
    if space.p != math.inf:
        rep = project_l2(target, family, rule or space.rules[0], space.measure)
    else:
        box = ((-SCHWARTZ_HALF_WIDTH, SCHWARTZ_HALF_WIDTH),) * space.n
        nodes = None
        if space.n == 1:
            L = math.asinh(SCHWARTZ_HALF_WIDTH)
            nodes = np.sinh(np.linspace(-L, L, SCHWARTZ_FIT_GRID))
        rep = project_sup(target, family, box, row_weights=schwartz_row_weights(space), max_iter=lawson_iter,
                          nodes=nodes)
    dist = capped_distance(space, target, rep.fit)
    rep.extra["grid_error"] = rep.errors[-1]
    rep.errors = [dist]
    rep.norm = "capped-seminorm"
    return rep


def error_decay(target, family_builder: Callable[[int], BasisFamily], sizes: Sequence[int], space: SpaceSpec,
                rule=None) -> DecayTable:
    """Best-approximation error for each size, with the log-linear fit and verdict."""
    sizes = list(sizes)
    if sizes != sorted(sizes):
        raise ValueError("sizes must be ascending")
    reports = [best_error(target, family_builder(s), space, rule) for s in sizes]
    table = classify(sizes, [r.errors[-1] for r in reports])
    table.reports = reports
    return table
