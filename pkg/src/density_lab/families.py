"""Basis families ``{Phi^beta f0}``, ``{e^{i(lambda,Phi)} f0}``, gap and translate
families, and numerical admissibility checks for the weight ``f0``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .funcmodel.expr import BinOp, Call, Const, ScalarField, Var
from .funcmodel.phi import ComplexFrequency, MapPhi, StripError, as_frequency, make_phi
from .numerics import LEBESGUE, Domain, MeasureSpec, default_rule, integrate
from .recurrence import RecurrenceBasis, hermite_recurrence, laguerre_recurrence, stieltjes
from .spaces import SpaceSpec, multi_indices

FAMILY_KINDS = ("monomial", "exponential", "pullback", "gap", "translate")
DEFAULT_EPS_GRID = (1.0, 0.75, 0.5, 0.45, 0.4, 0.3, 0.25, 0.2, 0.1, 0.05)
DEFAULT_DEGREE_PROBE = 12


class FamilyError(ValueError):
    pass


@dataclass
class BasisFamily:
    """An ordered list of member functions with per-member index metadata.

    ``index`` holds the degree multi-index (monomial), frequency
    (exponential), exponent (gap), shift (translate) or label (pullback).
    """

    kind: str
    members: list
    index: list
    phi: MapPhi | None = None
    f0: ScalarField | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise FamilyError(f"unknown family kind {self.kind!r}")
        if len(self.members) != len(self.index):
            raise FamilyError("members and index metadata differ in length")

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def n(self) -> int:
        return self.members[0].n if self.members else 1

    @property
    def is_complex(self) -> bool:
        return any(m.is_complex for m in self.members)

    def prefix(self, size: int) -> "BasisFamily":
        """The nested sub-family made of the first ``size`` members."""
        return BasisFamily(self.kind, self.members[:size], self.index[:size], self.phi, self.f0, dict(self.params))

    def values(self, x) -> np.ndarray:
        """Member values as an ``(m, size)`` matrix."""
        x = np.asarray(x, dtype=float)
        if self.kind == "gap":
            return _gap_values(x, [int(i) for i in self.index])
        if self.kind == "translate":
            return self._translated(self.f0, x)
        cols = [np.asarray(m(x)) for m in self.members]
        return np.stack(cols, axis=-1)

    def _translated(self, func, x) -> np.ndarray:
        """``func(x - s_j)`` for every shift in one vectorised evaluation."""
        shifts = np.asarray(self.index, dtype=float)
        if self.n == 1:
            pts = x[:, None] - shifts[None, :]
            return np.asarray(func(pts.ravel())).reshape(pts.shape)
        pts = x[:, None, :] - shifts[None, :, :]
        return np.asarray(func(pts.reshape(-1, self.n))).reshape(pts.shape[:2])

    def derivative_values(self, x, alpha) -> np.ndarray:
        alpha = (alpha,) if isinstance(alpha, (int, np.integer)) else tuple(alpha)
        if sum(alpha) == 0:
            return self.values(x)
        if self.kind == "translate":
            return self._translated(self.f0.derivative(alpha), np.asarray(x, dtype=float))
        return np.stack([np.asarray(m.derivative(alpha)(x)) for m in self.members], axis=-1)

    def recurrence_basis(self, nodes=None, weights=None, size: int | None = None) -> RecurrenceBasis | None:
        """A well-conditioned basis spanning the same space, if one is available.

        Gaussian and Laguerre weights with the identity map use the classical
        orthonormal recurrences; other one-dimensional monomial families get a
        discrete Stieltjes recurrence for ``|f0|^2`` on ``(nodes, weights)``.
        Returns ``None`` when no recurrence applies (non-monomial families,
        several variables, or too few nodes).
        """
        if self.kind != "monomial" or self.n != 1 or self.phi is None:
            return None
        K = self.size if size is None else size
        f0 = self.f0
        identity = self.phi.is_identity() or self.phi.components[0].text == "x"
        if identity and f0.name == "gaussian":
            return RecurrenceBasis(hermite_recurrence(K), self.phi.components[0], f0, K)
        if identity and f0.name and f0.name.startswith("laguerre") and hasattr(f0, "params"):
            return RecurrenceBasis(laguerre_recurrence(K, f0.params["alpha"]), self.phi.components[0], f0, K)
        if nodes is None:
            return None
        with np.errstate(all="ignore"):
            y = np.asarray(self.phi.components[0](nodes), dtype=float)
            nu = np.asarray(weights, dtype=float) * np.abs(np.asarray(f0(nodes))) ** 2
        ok = np.isfinite(y) & np.isfinite(nu)
        rec = stieltjes(y[ok], nu[ok], K)
        if rec.size < K:
            return None
        return RecurrenceBasis(rec, self.phi.components[0], f0, K)

    def describe(self) -> dict:
        def meta(v):
            if isinstance(v, ComplexFrequency):
                return [[z.real, z.imag] for z in v.value]
            if isinstance(v, (tuple, list, np.ndarray)):
                return [meta(u) for u in v]
            if isinstance(v, (complex, np.complexfloating)):
                return [v.real, v.imag]
            if isinstance(v, (np.integer,)):
                return int(v)
            if isinstance(v, (np.floating,)):
                return float(v)
            return v

        return {
            "kind": self.kind,
            "size": self.size,
            "index": [meta(i) for i in self.index],
            "phi": None if self.phi is None else [c.text for c in self.phi.components],
            "f0": None if self.f0 is None else self.f0.text,
            "params": self.params,
        }


def _gap_values(x, exponents) -> np.ndarray:
    """``x^n e^{-x}`` evaluated as ``exp(n log x - x)`` to avoid overflow."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        lx = np.log(x)
        cols = []
        for n in exponents:
            if n == 0:
                cols.append(np.exp(-x))
            else:
                cols.append(np.where(x > 0, np.exp(n * lx - x), 0.0))
    return np.stack(cols, axis=-1)


def _as_phi(phi) -> MapPhi:
    return phi if isinstance(phi, MapPhi) else make_phi(phi)


def graded_multi_indices(n: int, degree_cap: int):
    """All ``beta`` with ``|beta| <= D``, ordered by total degree then reverse-lex."""
    return multi_indices(n, degree_cap)


def _monomial_expr(phi: MapPhi, beta):
    expr = None
    for comp, b in zip(phi.components, beta):
        if b == 0:
            continue
        term = comp.expr if b == 1 else BinOp("^", comp.expr, Const(b))
        expr = term if expr is None else BinOp("*", expr, term)
    return expr


def monomial_family(phi, f0: ScalarField, degree_cap: int) -> BasisFamily:
    """Members ``Phi^beta f0`` for all ``|beta| <= D`` in graded order."""
    if degree_cap < 0:
        raise FamilyError(f"degree cap must be >= 0, got {degree_cap}")
    phi = _as_phi(phi)
    if phi.n != f0.n:
        raise FamilyError(f"map has {phi.n} components but f0 lives in dimension {f0.n}")
    members, index = [], []
    for beta in graded_multi_indices(phi.n, degree_cap):
        mono = _monomial_expr(phi, beta)
        expr = f0.expr if mono is None else BinOp("*", mono, f0.expr)
        members.append(ScalarField(expr, n=f0.n))
        index.append(tuple(beta))
    return BasisFamily("monomial", members, index, phi, f0, {"degree_cap": degree_cap})


def exponential_family(phi, f0: ScalarField, frequencies: Sequence, eps: float = math.inf) -> BasisFamily:
    """Members ``exp(i (lambda, Phi)) f0``, one per frequency, in the given order."""
    phi = _as_phi(phi)
    members, index = [], []
    for lam in frequencies:
        try:
            lam = as_frequency(lam, eps)
        except StripError as exc:
            raise FamilyError(str(exc)) from exc
        if len(lam.value) != phi.n:
            raise FamilyError(f"frequency {lam.value} does not match dimension {phi.n}")
        arg = None
        for lj, comp in zip(lam.value, phi.components):
            if lj == 0:
                continue
            c = 1j * lj
            c = c.real if c.imag == 0 else c
            term = BinOp("*", Const(c), comp.expr)
            arg = term if arg is None else BinOp("+", arg, term)
        expr = f0.expr if arg is None else BinOp("*", Call("exp", arg), f0.expr)
        members.append(ScalarField(expr, n=f0.n))
        index.append(lam)
    return BasisFamily("exponential", members, index, phi, f0, {"eps": eps})


def gap_family(N: int, l: int, index_cap: int) -> BasisFamily:
    """Members ``x^n e^{-x}`` for ``N <= n <= index_cap`` with ``l`` not dividing ``n``."""
    if l < 2:
        raise FamilyError(f"gap family needs l >= 2, got {l}")
    if N < 0:
        raise FamilyError(f"N must be >= 0, got {N}")
    if index_cap < N:
        raise FamilyError(f"index cap {index_cap} is below N = {N}")
    exps = [k for k in range(N, index_cap + 1) if k % l != 0]
    members = [ScalarField.parse(f"x^{k}*exp(-x)" if k else "exp(-x)") for k in exps]
    f0 = ScalarField.parse("exp(-x)", name="exp(-x)")
    return BasisFamily("gap", members, exps, make_phi("identity"), f0, {"N": N, "l": l, "index_cap": index_cap})


def translate_family(seed: ScalarField, shifts: Sequence) -> BasisFamily:
    """Members ``x -> seed(x - s)`` for each shift ``s``."""
    members, index = [], []
    for s in shifts:
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        if len(s_arr) != seed.n:
            raise FamilyError(f"shift {s} does not match dimension {seed.n}")
        members.append(seed.shift(s_arr))
        index.append(float(s_arr[0]) if seed.n == 1 else tuple(float(v) for v in s_arr))
    return BasisFamily("translate", members, index, None, seed, {"n_shifts": len(members)})


def pullback_family(f_list: Sequence[ScalarField], phi, f0: ScalarField) -> BasisFamily:
    """Members ``(f o Phi) f0``."""
    phi = _as_phi(phi)
    members, index = [], []
    for f in f_list:
        comp = f.compose(list(phi.components))
        members.append(ScalarField(BinOp("*", comp.expr, f0.expr), n=f0.n))
        index.append(f.name or f.text)
    return BasisFamily("pullback", members, index, phi, f0, {})


@dataclass
class AlgebraGenerators:
    """Generators ``D^alpha Phi_j`` (``|alpha| <= m``) of the algebra ``P_{DPhi,m}``."""

    phi: MapPhi
    m: int
    generators: list = field(init=False)
    labels: list = field(init=False)

    def __post_init__(self):
        self.generators, self.labels = [], []
        n = self.phi.n
        for j, comp in enumerate(self.phi.components):
            for alpha in multi_indices(n, self.m):
                self.generators.append(comp if sum(alpha) == 0 else comp.derivative(alpha))
                self.labels.append((j, tuple(alpha)))

    def products(self, degree_cap: int):
        """Labels of all generator monomials of total degree ``<= degree_cap``."""
        g = len(self.generators)
        for deg in range(degree_cap + 1):
            yield from itertools.combinations_with_replacement(range(g), deg)

    def evaluate_product(self, combo, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.ones(x.shape[:1] if x.ndim else ())
        for i in combo:
            out = out * np.asarray(self.generators[i](x))
        return out

    def dominant(self, x, degree: int) -> np.ndarray:
        """``(1 + sum |generator|)^degree``, which bounds every product of that degree."""
        s = 1.0
        for g in self.generators:
            s = s + np.abs(np.asarray(g(x)))
        return s ** degree


# --------------------------------------------------------------------------
# admissibility
# --------------------------------------------------------------------------

RADII = 2.0 ** np.arange(0, 12)
ENDPOINT_DISTANCES = (1e-4, 1e-6, 1e-8)
SLOPE_TOL = 1e-8
POWER_TOL = 1e-3


@dataclass
class AdmissibilityVerdict:
    passed: bool
    epsilon: float
    failures: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    fit: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "pass": self.passed,
            "epsilon": self.epsilon,
            "failures": self.failures,
            "diagnostics": self.diagnostics,
            "fit": self.fit,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, default=float)


def _tail_fit(logh: Callable, points: Callable, p: float, dim: int = 1) -> dict:
    """Fit ``log h(r) = A r + B log r + C`` on the last three representable radii.

    ``h`` is finite in L_p on the tail iff ``pA < 0`` or ``A ~ 0`` and
    ``pB < -dim``; for ``p = inf`` the condition is ``A < 0`` or ``B <= 0``.
    """
    with np.errstate(all="ignore"):
        vals = np.array([float(logh(points(r))) for r in RADII])
    finite = np.isfinite(vals)
    if np.any(vals == np.inf):
        r = float(RADII[np.argmax(vals == np.inf)])
        return {"finite": False, "reason": "overflow", "radius": r}
    if not finite.any():
        return {"finite": True, "reason": "identically zero on the probed tail"}
    last = int(np.flatnonzero(finite)[-1])
    if last < 2 or not finite[last - 2 : last + 1].all():
        # too few representable samples: it underflowed, i.e. it decays
        return {"finite": True, "reason": "underflow", "radius": float(RADII[last])}
    r = RADII[last - 2 : last + 1]
    M = np.stack([r, np.log(r), np.ones(3)], axis=-1)
    A, B, C = np.linalg.solve(M, vals[last - 2 : last + 1])
    scale = max(1.0, abs(vals[last]) / r[-1])
    if A < -SLOPE_TOL * scale:
        ok = True
    elif A > SLOPE_TOL * scale:
        ok = False
    else:
        ok = B <= 0 if p == math.inf else p * B < -dim + POWER_TOL
    return {"finite": bool(ok), "A": float(A), "B": float(B), "radius": float(r[-1])}


def _endpoint_fit(logh: Callable, point: Callable, p: float) -> dict:
    """Power ``b`` in ``h ~ d^b`` at a finite boundary point (``d`` = distance)."""
    with np.errstate(all="ignore"):
        vals = np.array([float(logh(point(d))) for d in ENDPOINT_DISTANCES])
    if np.all(vals == -np.inf):
        return {"finite": True, "b": None, "reason": "vanishes near the endpoint"}
    if not np.all(np.isfinite(vals)):
        return {"finite": False, "b": None, "reason": "non-finite near the endpoint"}
    ld = np.log(ENDPOINT_DISTANCES)
    b = float(np.polyfit(ld, vals, 1)[0])
    ok = b >= -POWER_TOL if p == math.inf else p * b > -1 + POWER_TOL
    return {"finite": bool(ok), "b": b}


def _log_pieces(phi: MapPhi, x, eps: float, degree: int, weight: Callable):
    vals = np.asarray(phi(x), dtype=float)
    norm = np.abs(vals) if phi.n == 1 else np.linalg.norm(vals, axis=-1)
    with np.errstate(all="ignore"):
        lw = np.log(np.abs(np.asarray(weight(x))))
        lp = degree * np.log(norm) if degree else 0.0
        return eps * norm + lp + lw


def _rays(n: int):
    if n == 1:
        return [np.array([1.0]), np.array([-1.0])]
    dirs = []
    for signs in itertools.product((-1.0, 0.0, 1.0), repeat=n):
        v = np.array(signs)
        if np.any(v):
            dirs.append(v / np.linalg.norm(v))
    return dirs


def _finiteness(logh_factory: Callable, domain: Domain, p: float, label: dict) -> list[dict]:
    """Run the tail and endpoint fits for ``h`` over ``domain``; return failures."""
    failures = []
    n = domain.n
    logh = logh_factory
    if n == 1:
        lo, hi = domain.bounds[0]
        ends = []
        if math.isinf(hi):
            base = 0.0 if math.isinf(lo) else lo
            ends.append(("+inf", lambda r, b=base: np.array([b + r])))
        if math.isinf(lo):
            base = 0.0 if math.isinf(hi) else hi
            ends.append(("-inf", lambda r, b=base: np.array([b - r])))
        for where, pts in ends:
            res = _tail_fit(lambda x: logh(x)[0], pts, p)
            if not res["finite"]:
                failures.append({**label, "condition": "tail growth", "location": where, "detail": res})
        for e, sgn in ((lo, 1.0), (hi, -1.0)):
            if math.isfinite(e):
                res = _endpoint_fit(lambda x: logh(x)[0], lambda d, e=e, s=sgn: np.array([e + s * d]), p)
                if not res["finite"]:
                    cond = "origin divergence" if e == 0 else "endpoint divergence"
                    failures.append({**label, "condition": cond, "location": e, "detail": res})
    else:
        if any(math.isfinite(v) for b in domain.bounds for v in b):
            raise FamilyError("multi-dimensional admissibility checks need the whole space")
        for d in _rays(n):
            res = _tail_fit(lambda x: logh(x)[0], lambda r, d=d: (r * d)[None, :], p, dim=n)
            if not res["finite"]:
                failures.append({**label, "condition": "tail growth", "location": d.tolist(), "detail": res})
    return failures


def _certified(eps_grid, passes) -> float:
    """Largest grid value such that it and every smaller grid value pass."""
    best = 0.0
    for eps, ok in sorted(zip(eps_grid, passes), key=lambda t: t[0]):
        if not ok:
            break
        best = eps
    return best


def check_thm31(
    f0: ScalarField,
    phi,
    p: float,
    measure: MeasureSpec = LEBESGUE,
    eps_grid: Sequence[float] = DEFAULT_EPS_GRID,
    degree_probe: int = DEFAULT_DEGREE_PROBE,
    domain: Domain | None = None,
) -> AdmissibilityVerdict:
    """Finiteness of ``||exp(eps ||Phi||) Phi^beta f0||_p`` over a grid of ``eps``.

    Both the top degree ``|beta| = degree_probe`` (which dominates at infinity)
    and ``beta = 0`` (which dominates near zeros of ``Phi``) are probed with a
    tail fit at every infinite end and a power fit at every finite endpoint.
    A passing ``eps`` must also yield a quadrature value exceeding ten times
    its own error estimate.
    """
    phi = _as_phi(phi)
    if not 1 <= p < math.inf:
        raise FamilyError("check_thm31 covers 1 <= p < inf")
    if any(e <= 0 for e in eps_grid):
        raise FamilyError("strip widths must be positive")
    domain = domain or Domain(((-math.inf, math.inf),) * phi.n)

    def weight(x):
        w = np.abs(np.asarray(f0(x))) ** p
        if measure.density is not None:
            w = w * np.asarray(measure.density(x))
        return w

    failures, diagnostics, fits = [], [], {}
    passes = []
    rule = default_rule(domain)
    for eps in eps_grid:
        eps_fail = []
        for degree in sorted({0, degree_probe}):
            label = {"epsilon": eps, "degree": degree}

            def logh(x, eps=eps, degree=degree):
                return p * _log_pieces(phi, x, eps, degree, f0) + (
                    np.log(np.asarray(measure.density(x))) if measure.density is not None else 0.0
                )

            eps_fail += _finiteness(logh, domain, 1.0, label)
        if not eps_fail:
            def integrand(x, eps=eps):
                with np.errstate(all="ignore"):
                    lv = p * _log_pieces(phi, x, eps, degree_probe, f0)
                    if measure.density is not None:
                        lv = lv + np.log(np.asarray(measure.density(x)))
                    return np.exp(lv)

            res = integrate(integrand, rule)
            ok = res.diverged is False and np.isfinite(res.value) and res.value >= 10 * res.error_estimate
            diagnostics.append(
                {"epsilon": eps, "degree": degree_probe, "integral": res.value, "error_estimate": res.error_estimate}
            )
            if not ok:
                eps_fail.append(
                    {"epsilon": eps, "degree": degree_probe, "condition": "insufficient margin", "location": None,
                     "detail": {"value": res.value, "error_estimate": res.error_estimate, "diverged": res.diverged}}
                )
        passes.append(not eps_fail)
        failures += eps_fail
        fits[str(eps)] = [f["detail"] for f in eps_fail]
    best = _certified(eps_grid, passes)
    return AdmissibilityVerdict(best > 0, best, failures, diagnostics, fits)


def strip_frequencies(eps: float, n: int = 1, real_extent: float = 1.0) -> list[ComplexFrequency]:
    """Nine sample frequencies: centre, axes and corners of the checked strip box."""
    t = 0.99 * eps
    out = []
    for re, im in itertools.product((-real_extent, 0.0, real_extent), (-t, 0.0, t)):
        lam = [complex(re, im)] + [0j] * (n - 1)
        out.append(ComplexFrequency(tuple(lam), eps))
    return out


def check_assumption26(
    space: SpaceSpec,
    f0: ScalarField,
    phi,
    eps: float,
    caps: dict | None = None,
    degree_probe: int = DEFAULT_DEGREE_PROBE,
) -> AdmissibilityVerdict:
    """Finiteness of ``||chi_k exp(eps ||Phi||) g nabla_N^alpha f0||_p`` within caps.

    ``g`` runs over products of the generators of ``P_{DPhi,m}`` up to
    ``degree_probe``; these are all dominated by ``(1 + sum |generator|)^D``,
    which is what gets probed. Membership of ``exp(i(lambda,Phi)) g f0`` is
    then checked on the seminorm panel at nine strip frequencies.
    """
    phi = _as_phi(phi)
    caps = dict(caps or {})
    m = min(space.derivative_cap, int(caps.get("alpha_max", space.derivative_cap)))
    n_max = min(space.n_max, int(caps.get("N_max", space.n_max)))
    gens = AlgebraGenerators(phi, m)
    n = space.n
    alphas = multi_indices(n, m)
    failures, diagnostics = [], []

    def make_logh(alpha, N, eps_val, degree):
        d = f0 if sum(alpha) == 0 else f0.derivative(alpha)

        def logh(x):
            x = np.asarray(x, dtype=float)
            v = np.asarray(phi(x), dtype=float)
            nrm = np.abs(v) if phi.n == 1 else np.linalg.norm(v, axis=-1)
            r = np.abs(x) if x.ndim == 1 else np.linalg.norm(x, axis=-1)
            with np.errstate(all="ignore"):
                out = eps_val * nrm + np.log(gens.dominant(x, degree)) + np.log(np.abs(np.asarray(d(x))))
                if N:
                    out = out + N * np.log1p(r)
                if space.measure.density is not None:
                    out = out + np.log(np.asarray(space.measure.density(x))) / (1.0 if space.p == math.inf else space.p)
            return out

        return logh

    def compact_check(logh, label):
        fails = []
        for k in range(1, space.k_max + 1):
            box = space.domain.box(k)
            axes = [np.linspace(lo, hi, 401 if n == 1 else 61) for lo, hi in box]
            if n == 1:
                x = axes[0]
            else:
                g = np.meshgrid(*axes, indexing="ij")
                x = np.stack([c.ravel() for c in g], axis=-1)
            vals = logh(x)
            if np.any(np.isnan(vals) | (vals == np.inf)):
                fails.append({**label, "k": k, "condition": "non-finite on compact", "location": k, "detail": {}})
        return fails

    p = space.p
    finite_p = math.inf if p == math.inf else 1.0

    def scaled(alpha, N, eps_val, degree):
        logh = make_logh(alpha, N, eps_val, degree)
        return logh if p == math.inf else (lambda x: p * logh(x))

    for alpha in alphas:
        for N in range(n_max + 1):
            for degree in sorted({0, degree_probe}):
                label = {"epsilon": eps, "alpha": list(alpha), "N": N, "degree": degree}
                if space.kind == "Cm":
                    failures += compact_check(make_logh(alpha, N, eps, degree), label)
                    continue
                fails = _finiteness(scaled(alpha, N, eps, degree), space.domain, finite_p, label)
                if fails:
                    plain = _finiteness(scaled(alpha, N, 0.0, degree), space.domain, finite_p, label)
                    for f in fails:
                        f["factor"] = "weight" if plain else "exp(eps*|Phi|)"
                failures += fails

    # item 1: exp(i(lambda,Phi)) g f0 must lie in the space; evaluate its panel
    from .spaces import seminorm_panel

    top = monomial_family(phi, f0, degree_probe).members[-1] if phi.n == 1 else f0
    for lam in strip_frequencies(eps, n):
        member = exponential_family(phi, top, [lam], eps).members[0]
        rows = seminorm_panel(space, member)
        bad = [r for r in rows if not np.isfinite(r.value)]
        diagnostics.append(
            {"frequency": [[z.real, z.imag] for z in lam.value], "panel_max": max(r.value for r in rows)}
        )
        for r in bad:
            failures.append(
                {"frequency": [[z.real, z.imag] for z in lam.value], "alpha": list(r.alpha), "N": r.N, "k": r.k,
                 "condition": "member outside space", "location": None, "detail": {"value": r.value}}
            )

    passed = not failures
    return AdmissibilityVerdict(passed, eps if passed else 0.0, failures, diagnostics, {})
