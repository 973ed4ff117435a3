"""Gram matrices and best approximation in L_2, L_p (IRLS) and sup norms (Lawson)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..families import BasisFamily
from ..funcmodel.expr import MAX_DERIVATIVE_ORDER
from ..numerics import LEBESGUE, MeasureSpec, NonFiniteError, QuadratureRule, _endpoint_diverges
from ..recurrence import RecurrenceBasis
from ..spaces import multi_indices
from .linalg import SolverError, clean_design, discrete_measure, weighted_lstsq

RANK_CUTOFF = 1e-12
IRLS_DELTA = 1e-8
IRLS_TOL = 1e-8
IRLS_MAX_ITER = 200
LAWSON_MAX_ITER = 500
LAWSON_TOL = 1e-3
SUP_GRID = 2001
STALL_ITER = 50
STALL_GAIN = 1e-9


class GramError(ArithmeticError):
    def __init__(self, message, indices=None):
        super().__init__(message)
        self.indices = indices


@dataclass
class ProjectionReport:
    """Outcome of one or more best-approximation solves."""

    family_kind: str
    sizes: list
    errors: list
    norm: str
    coefficients: list = field(default_factory=list)
    basis: str = "members"
    effective_rank: int = 0
    condition: float = 1.0
    iterations: int = 0
    converged: bool = True
    extra: dict = field(default_factory=dict)
    fit: object = field(default=None, repr=False, compare=False)

    @property
    def error(self) -> float:
        return self.errors[-1]

    def to_dict(self) -> dict:
        def num(c):
            c = complex(c)
            return c.real if c.imag == 0 else [c.real, c.imag]

        return {
            "family_kind": self.family_kind,
            "sizes": list(self.sizes),
            "errors": [float(e) for e in self.errors],
            "norm": self.norm,
            "coefficients": [num(c) for c in self.coefficients],
            "basis": self.basis,
            "effective_rank": self.effective_rank,
            "condition": self.condition,
            "iterations": self.iterations,
            "converged": self.converged,
            "extra": self.extra,
        }


class Expansion:
    """The fitted function ``sum_j c_j b_j`` with derivatives."""

    def __init__(self, family: BasisFamily, coef, basis: RecurrenceBasis | None = None):
        self.family = family
        self.coef = np.asarray(coef)
        self.basis = basis
        self.n = family.n
        self.smooth = all(getattr(m, "smooth", True) for m in family.members)

    def design(self, x, alpha=None) -> np.ndarray:
        return design_matrix(self.family, x, alpha, self.basis)

    def __call__(self, x):
        return self.design(x) @ self.coef

    def derivative(self, alpha, max_order: int = MAX_DERIVATIVE_ORDER):
        alpha = (alpha,) if isinstance(alpha, (int, np.integer)) else tuple(alpha)
        return lambda x: self.design(x, alpha) @ self.coef


def design_matrix(family: BasisFamily, x, alpha=None, basis: RecurrenceBasis | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    order = 0 if alpha is None else sum(np.atleast_1d(alpha))
    if basis is not None:
        A = basis.evaluate(x) if order == 0 else basis.evaluate_all_orders(x, alpha)
    elif order == 0:
        A = family.values(x)
    else:
        A = family.derivative_values(x, alpha)
    return clean_design(A, x, family.f0)


def _target_values(target, x, alpha=None) -> np.ndarray:
    if alpha is not None and sum(np.atleast_1d(alpha)):
        vals = np.asarray(target.derivative(tuple(np.atleast_1d(alpha)))(x))
    else:
        vals = np.asarray(target(x))
    vals = np.broadcast_to(vals, np.asarray(x).shape[:1])
    if not np.all(np.isfinite(vals)):
        k = int(np.argmax(~np.isfinite(vals)))
        raise SolverError(f"target is not finite at {np.asarray(x)[k]}")
    return vals


def gram_matrix(family: BasisFamily, rule: QuadratureRule, measure: MeasureSpec = LEBESGUE) -> np.ndarray:
    """``G[i, j] = int member_i conj(member_j) dmu`` for the family members themselves."""
    x, w = discrete_measure(rule, measure)
    try:
        A = clean_design(family.values(x), x, family.f0)
    except NonFiniteError as exc:
        raise GramError(f"member values are not finite: {exc}") from exc
    rule_w = rule.weights * measure.weight(rule.nodes)
    with np.errstate(all="ignore"):
        diag_terms = np.abs(family.values(rule.nodes)) ** 2 * rule_w[:, None]
    for i in range(family.size):
        if _endpoint_diverges(np.nan_to_num(diag_terms[:, i], posinf=np.inf), rule):
            raise GramError(f"Gram entry ({i}, {i}) diverges", (i, i))
    G = (A.T * w) @ A.conj()
    bad = np.argwhere(~np.isfinite(G))
    if len(bad):
        i, j = bad[0]
        raise GramError(f"Gram entry ({i}, {j}) is not finite", (int(i), int(j)))
    return 0.5 * (G + G.conj().T) if np.iscomplexobj(G) else 0.5 * (G + G.T)


def _require_members_in_lp(family: BasisFamily, p: float, rule: QuadratureRule, measure: MeasureSpec) -> None:
    """Raise ``GramError`` when some member's ``|.|^p`` integral diverges at an open endpoint."""
    with np.errstate(all="ignore"):
        terms = np.abs(family.values(rule.nodes)) ** p * (rule.weights * measure.weight(rule.nodes))[:, None]
    for i in range(family.size):
        if _endpoint_diverges(np.nan_to_num(terms[:, i], nan=np.inf, posinf=np.inf), rule):
            raise GramError(f"member {i} is not in L_{p:g}: its integral diverges at an endpoint", (i, i))


def _basis_for(family: BasisFamily, x, w):
    try:
        return family.recurrence_basis(x, w)
    except (ValueError, ArithmeticError):
        return None


def project_l2(target, family: BasisFamily, rule: QuadratureRule, measure: MeasureSpec = LEBESGUE,
               rank_cutoff: float = RANK_CUTOFF) -> ProjectionReport:
    """Best L_2(mu) approximation of ``target`` from the span of ``family``.

    When a three-term recurrence spanning the same space is available it
    replaces the raw members; otherwise the raw members go through a
    column-scaled truncated SVD. The error is the norm of the discrete residual.
    Raises ``GramError`` when a member is not square-integrable.
    """
    _require_members_in_lp(family, 2.0, rule, measure)
    x, w = discrete_measure(rule, measure)
    t = _target_values(target, x)
    basis = _basis_for(family, x, w)
    A = design_matrix(family, x, None, basis)
    sol = weighted_lstsq(A, t, w, rank_cutoff)
    err = float(np.linalg.norm(sol.residual))
    tnorm2 = float(np.sum(w * np.abs(t) ** 2))
    fit_norm2 = float(np.sum(w * np.abs(A @ sol.coef) ** 2))
    return ProjectionReport(
        family.kind, [family.size], [err], "L2",
        coefficients=list(sol.coef), basis=basis.label if basis else "members",
        effective_rank=sol.rank, condition=sol.condition,
        extra={"target_norm_sq": tnorm2, "fit_norm_sq": fit_norm2},
        fit=Expansion(family, sol.coef, basis),
    )


def _lp_error(r, w, p):
    return float(np.sum(w * np.abs(r) ** p) ** (1.0 / p))


def project_lp(target, family: BasisFamily, p: float, rule: QuadratureRule, measure: MeasureSpec = LEBESGUE,
               delta: float = IRLS_DELTA, tol: float = IRLS_TOL, max_iter: int = IRLS_MAX_ITER,
               rank_cutoff: float = RANK_CUTOFF) -> ProjectionReport:
    """Discrete L_p best approximation by iteratively reweighted least squares.

    Weights are ``max(|r|, delta)^(p-2)``; for ``p > 2`` the update is damped
    by ``1/(p-1)``, which keeps the iteration contractive.
    """
    if not 1 <= p < math.inf:
        raise ValueError(f"project_lp needs 1 <= p < inf, got {p}")
    if p == 2:
        return project_l2(target, family, rule, measure, rank_cutoff)
    _require_members_in_lp(family, p, rule, measure)
    x, w = discrete_measure(rule, measure)
    t = _target_values(target, x)
    basis = _basis_for(family, x, w)
    A = design_matrix(family, x, None, basis)
    sol = weighted_lstsq(A, t, w, rank_cutoff)
    c = sol.coef
    r = t - A @ c
    best_err, best_c = _lp_error(r, w, p), c
    theta = 1.0 if p <= 2 else 1.0 / (p - 1.0)
    converged = best_err == 0.0
    it = 0
    while not converged and it < max_iter:
        it += 1
        v = np.maximum(np.abs(r), delta) ** (p - 2)
        step = weighted_lstsq(A, t, w * v, rank_cutoff).coef
        c_new = c + theta * (step - c)
        change = np.linalg.norm(c_new - c) / max(np.linalg.norm(c_new), 1e-300)
        c = c_new
        r = t - A @ c
        err = _lp_error(r, w, p)
        if err < best_err:
            best_err, best_c = err, c
        converged = change < tol
    return ProjectionReport(
        family.kind, [family.size], [best_err], f"L{p:g}",
        coefficients=list(best_c), basis=basis.label if basis else "members",
        effective_rank=sol.rank, condition=sol.condition, iterations=it, converged=bool(converged),
        fit=Expansion(family, best_c, basis),
    )


def _grid(box, n_points: int = SUP_GRID) -> np.ndarray:
    if len(box) == 1:
        lo, hi = box[0]
        return np.linspace(lo, hi, n_points if n_points % 2 else n_points + 1)
    m = int(round(n_points ** (1 / len(box))))
    axes = [np.linspace(lo, hi, m) for lo, hi in box]
    g = np.meshgrid(*axes, indexing="ij")
    return np.stack([c.ravel() for c in g], axis=-1)


def lawson(blocks, tol: float = LAWSON_TOL, max_iter: int = LAWSON_MAX_ITER, rank_cutoff: float = RANK_CUTOFF):
    """Lawson's algorithm for ``min_c max_blocks max_rows |t - A c|``.

    ``blocks`` is a list of ``(A, t)`` pairs sharing the coefficient vector.
    Returns ``(coef, per-block errors, iterations, converged)``.
    """
    A = np.concatenate([b[0] for b in blocks])
    t = np.concatenate([b[1] for b in blocks])
    sizes = [len(b[1]) for b in blocks]
    w = np.full(len(t), 1.0 / len(t))
    best = None
    converged = False
    it = 0
    last_gain = 0
    for it in range(1, max_iter + 1):
        sol = weighted_lstsq(A, t, w, rank_cutoff)
        r = np.abs(t - A @ sol.coef)
        upper = float(r.max())
        lower = float(np.sqrt(np.sum(w * r**2)))
        if best is None or upper < best[0] * (1 - STALL_GAIN):
            last_gain = it
        if best is None or upper < best[0]:
            best = (upper, sol.coef, r)
        if upper == 0 or (upper - lower) <= tol * upper:
            converged = True
            break
        if it - last_gain >= STALL_ITER:
            # the upper bound has stopped improving at all: rounding-limited
            break
        w = w * r
        s = w.sum()
        if s == 0:
            converged = True
            break
        w = w / s
    _, coef, r = best
    errs, start = [], 0
    for n in sizes:
        errs.append(float(r[start : start + n].max()))
        start += n
    return coef, errs, it, converged


def project_sup(target, family: BasisFamily, box, m: int = 0, alpha_max: int | None = None,
                max_iter: int = LAWSON_MAX_ITER, tol: float = LAWSON_TOL, n_points: int = SUP_GRID,
                row_weights=None, nodes=None) -> ProjectionReport:
    """Grid-minimax approximation on the closed box ``box`` (closure of ``U_k``).

    For ``m > 0`` all derivatives ``|alpha| <= min(m, alpha_max)`` are fitted
    simultaneously and the reported error is the largest per-derivative
    minimax error. ``row_weights`` optionally lists ``(alpha, weight_fn)``
    blocks instead (used for Schwartz-type seminorms).
    """
    box = tuple(tuple(b) for b in box)
    x = _grid(box, n_points) if nodes is None else np.asarray(nodes, dtype=float)
    n = len(box)
    cap = m if alpha_max is None else min(m, alpha_max)
    uniform = np.full(len(x), 1.0 / len(x))
    basis = _basis_for(family, x, uniform)
    specs = row_weights or [(alpha, None) for alpha in multi_indices(n, cap)]
    blocks, labels = [], []
    for alpha, wf in specs:
        alpha = tuple(alpha)
        A = design_matrix(family, x, alpha, basis)
        t = _target_values(target, x, alpha)
        if wf is not None:
            s = np.asarray(wf(x))
            A, t = A * s[:, None], t * s
        blocks.append((A, t))
        labels.append(alpha)
    coef, errs, it, converged = lawson(blocks, tol, max_iter)
    return ProjectionReport(
        family.kind, [family.size], [max(errs)], "sup" if cap == 0 else f"C{cap}",
        coefficients=list(coef), basis=basis.label if basis else "members",
        iterations=it, converged=converged,
        extra={"per_derivative": {str(a): e for a, e in zip(labels, errs)}},
        fit=Expansion(family, coef, basis),
    )
