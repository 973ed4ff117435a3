"""Orthonormal three-term recurrences used as well-conditioned span bases.

A basis ``g_k = q_k(Phi) f0`` is evaluated by running the recurrence

    b_{k+1} g_{k+1} = (Phi - a_k) g_k - b_k g_{k-1},    g_0 = c0 * f0

directly on ``f0``-weighted values, so nothing overflows where ``f0``
underflows, and derivatives come for free by feeding dual numbers through.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .funcmodel.expr import ScalarField, differentiate, evaluate


@dataclass(frozen=True)
class Recurrence:
    a: np.ndarray  # diagonal (length K)
    b: np.ndarray  # off-diagonal, b[k] couples g_{k-1} and g_k (b[0] unused)
    c0: float
    label: str = "stieltjes"

    @property
    def size(self) -> int:
        return len(self.a)


def hermite_recurrence(K: int) -> Recurrence:
    """Orthonormal Hermite polynomials for the weight ``exp(-x^2)``."""
    k = np.arange(K)
    return Recurrence(np.zeros(K), np.sqrt(k / 2.0), np.pi ** -0.25, "hermite")


def laguerre_recurrence(K: int, alpha: float) -> Recurrence:
    """Orthonormal generalized Laguerre polynomials for ``x^alpha exp(-x)``."""
    k = np.arange(K)
    a = 2 * k + alpha + 1
    b = np.sqrt(k * (k + alpha))
    c0 = float(np.exp(-0.5 * gammaln(alpha + 1)))
    return Recurrence(a, b, c0, f"laguerre({alpha:g})")


def stieltjes(y: np.ndarray, nu: np.ndarray, K: int, tol: float = 1e-13) -> Recurrence:
    """Discrete Stieltjes procedure for the measure ``sum nu_i delta_{y_i}``.

    Each new vector is re-orthogonalised against the previous ones, and the
    procedure stops early once the measure runs out of support.
    """
    y = np.asarray(y, dtype=float)
    nu = np.asarray(nu, dtype=float)
    keep = nu > 0
    y, nu = y[keep], nu[keep]
    mass = nu.sum()
    if mass <= 0:
        raise ValueError("measure has no mass")
    sw = np.sqrt(nu)
    P = np.zeros((K, len(y)))
    P[0] = sw / np.sqrt(mass)
    a = np.zeros(K)
    b = np.zeros(K)
    size = K
    for k in range(K):
        a[k] = np.sum(y * P[k] ** 2)
        if k + 1 == K:
            break
        q = (y - a[k]) * P[k] - (b[k] * P[k - 1] if k > 0 else 0.0)
        for j in range(k + 1):
            q -= (P[j] @ q) * P[j]
        nq = np.linalg.norm(q)
        if nq < tol * max(1.0, np.max(np.abs(y * P[k]))):
            size = k + 1
            break
        b[k + 1] = nq
        P[k + 1] = q / nq
    return Recurrence(a[:size], b[:size], 1.0 / float(np.sqrt(mass)))


def _run(rec: Recurrence, phi_val, f0_val, K: int):
    out = []
    g_prev = 0.0
    g = rec.c0 * f0_val
    out.append(g)
    for k in range(K - 1):
        g_next = ((phi_val - rec.a[k]) * g - (rec.b[k] * g_prev if k > 0 else 0.0)) / rec.b[k + 1]
        g_prev, g = g, g_next
        out.append(g)
    return out


class RecurrenceBasis:
    """Span basis ``{q_k(Phi) f0 : k < K}`` for a one-dimensional map."""

    def __init__(self, rec: Recurrence, phi_component: ScalarField, f0: ScalarField, K: int):
        if K > rec.size:
            raise ValueError(f"recurrence supports only {rec.size} terms, {K} requested")
        self.rec = rec
        self.phi = phi_component
        self.f0 = f0
        self.K = K
        self.label = rec.label

    @property
    def size(self) -> int:
        return self.K

    def evaluate(self, x, alpha=None) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if alpha is None or sum(np.atleast_1d(alpha)) == 0:
            with np.errstate(all="ignore"):
                cols = _run(self.rec, self.phi(x), self.f0(x), self.K)
            return np.stack([np.broadcast_to(c, x.shape[:1]) for c in cols], axis=-1)
        alpha = tuple(np.atleast_1d(alpha))
        cols = []
        for k in range(self.K):
            def func(env, k=k):
                return _run(self.rec, evaluate(self.phi.expr, env), evaluate(self.f0.expr, env), k + 1)[k]

            cols.append(differentiate(func, alpha, self.f0._coords)(x))
        return np.stack(cols, axis=-1)

    def evaluate_all_orders(self, x, alpha) -> np.ndarray:
        """Derivatives of every basis function in a single recurrence pass."""
        alpha = tuple(np.atleast_1d(alpha))
        from .funcmodel import dual

        coords, shape = self.f0._coords(x)
        levels = [j for j, a in enumerate(alpha) for _ in range(a)]
        env = [dual.seed(c, j, levels) for j, c in enumerate(coords)]
        with np.errstate(all="ignore"):
            cols = _run(self.rec, evaluate(self.phi.expr, env), evaluate(self.f0.expr, env), self.K)
        order = sum(alpha)
        return np.stack([np.broadcast_to(np.asarray(dual.extract(c, order)), shape) for c in cols], axis=-1)
