"""Discretised least-squares kernels shared by the projection solvers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numerics import LEBESGUE, MeasureSpec, NonFiniteError, QuadratureRule


class SolverError(ArithmeticError):
    pass


def discrete_measure(rule: QuadratureRule, measure: MeasureSpec = LEBESGUE):
    """Nodes and weights of ``rule`` times ``measure`` (atoms appended)."""
    x = rule.nodes
    w = rule.weights * measure.weight(x)
    if measure.atoms:
        pts = [loc if rule.domain.n > 1 else loc[:1] for loc, _ in measure.atoms]
        extra = np.stack(pts) if rule.domain.n > 1 else np.concatenate(pts)
        x = np.concatenate([x, extra])
        w = np.concatenate([w, [m for _, m in measure.atoms]])
    keep = w > 0
    return x[keep], w[keep]


def clean_design(A: np.ndarray, x, f0=None) -> np.ndarray:
    """Zero the 0*inf entries where the weight underflows; reject other non-finite values."""
    bad = ~np.isfinite(A)
    if not bad.any():
        return A
    if f0 is not None:
        with np.errstate(all="ignore"):
            dead = np.asarray(f0(x)) == 0
        if dead.ndim == 0:
            dead = np.full(A.shape[0], bool(dead))
        A = np.where(bad & dead[:, None], 0.0, A)
        bad = ~np.isfinite(A)
        if not bad.any():
            return A
    i, j = np.argwhere(bad)[0]
    raise NonFiniteError(x[i], A[i, j])


@dataclass
class LstsqResult:
    coef: np.ndarray
    residual: np.ndarray  # sqrt(w) * (t - A c)
    rank: int
    condition: float
    eigenvalues: np.ndarray


def weighted_lstsq(A: np.ndarray, t: np.ndarray, w: np.ndarray, rank_cutoff: float = 1e-12) -> LstsqResult:
    """Minimise ``sum w |t - A c|^2`` through a truncated SVD.

    Columns are normalised first, so the relative cutoff acts on the Gram
    matrix of unit-norm members (Jacobi scaling) instead of on raw magnitudes.
    The kept eigenvalues of that Gram matrix satisfy ``lam >= cutoff * lam_max``.
    """
    sw = np.sqrt(w)
    As = A * sw[:, None]
    ts = t * sw
    scale = np.linalg.norm(As, axis=0)
    live = scale > 0
    if not live.any():
        raise SolverError("every family member vanishes on the quadrature nodes")
    B = As[:, live] / scale[live]
    U, s, Vh = np.linalg.svd(B, full_matrices=False)
    lam = s**2
    keep = lam >= rank_cutoff * lam[0]
    if not keep.any():
        raise SolverError("all Gram eigenvalues fall below the cutoff")
    proj = U[:, keep].conj().T @ ts
    cs = Vh[keep].conj().T @ (proj / s[keep])
    coef = np.zeros(A.shape[1], dtype=cs.dtype)
    coef[live] = cs / scale[live]
    resid = ts - B @ cs
    cond = float(lam[0] / lam[keep][-1])
    return LstsqResult(coef, resid, int(keep.sum()), cond, lam)
