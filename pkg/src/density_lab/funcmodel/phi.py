"""Coordinate maps and complex strip frequencies."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .expr import ScalarField

N_SAMPLES = 10_000


class MapCheckError(ValueError):
    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class StripError(ValueError):
    pass


@dataclass(frozen=True)
class SampleCheck:
    passed: bool
    kind: str
    n_samples: int
    detail: str = ""
    pair: tuple | None = None


@dataclass(frozen=True)
class MapPhi:
    components: tuple[ScalarField, ...]
    name: str = "custom"
    inverse: tuple[ScalarField, ...] | None = None
    check: SampleCheck | None = None

    @property
    def n(self) -> int:
        return len(self.components)

    def __call__(self, x) -> np.ndarray:
        """Values ``Phi(x)`` with shape ``(m,)`` for n=1 and ``(m, n)`` otherwise."""
        vals = [c(x) for c in self.components]
        if self.n == 1:
            return vals[0]
        return np.stack(vals, axis=-1)

    def is_identity(self) -> bool:
        return self.name == "identity"


def _check_monotone(comp: ScalarField, bounds, n_samples) -> SampleCheck:
    lo, hi = bounds
    a = -10.0 if not np.isfinite(lo) else lo
    b = 10.0 if not np.isfinite(hi) else hi
    # open interval: stay strictly inside
    pad = 1e-9 * max(1.0, b - a)
    x = np.linspace(a + pad, b - pad, n_samples)
    y = comp(x)
    if not np.all(np.isfinite(y)):
        bad = x[~np.isfinite(y)][0]
        return SampleCheck(False, "monotone", n_samples, f"non-finite value at x={bad:g}", (bad, bad))
    d = np.diff(y)
    if np.all(d > 0) or np.all(d < 0):
        return SampleCheck(True, "monotone", n_samples)
    # offending pair: two samples with equal or reversed order against the majority direction
    sign = 1.0 if np.sum(d > 0) >= np.sum(d < 0) else -1.0
    k = int(np.argmax(sign * d <= 0))
    # report a symmetric-looking pair if one exists (e.g. +-t for even maps)
    close = np.argsort(np.abs(y - y[k]))
    partner = next((int(j) for j in close if abs(j - k) > 1), k + 1)
    return SampleCheck(
        False,
        "monotone",
        n_samples,
        f"not injective: Phi({x[k]:.6g})={y[k]:.6g}, Phi({x[partner]:.6g})={y[partner]:.6g}",
        (float(x[k]), float(x[partner])),
    )


def _check_jacobian(comps: Sequence[ScalarField], bounds, n_samples, seed=0) -> SampleCheck:
    rng = np.random.default_rng(seed)
    pts = []
    for lo, hi in bounds:
        a = -10.0 if not np.isfinite(lo) else lo
        b = 10.0 if not np.isfinite(hi) else hi
        pts.append(rng.uniform(a, b, n_samples))
    x = np.stack(pts, axis=-1)
    n = len(comps)
    J = np.empty((n_samples, n, n))
    for i, c in enumerate(comps):
        for j in range(n):
            alpha = tuple(1 if k == j else 0 for k in range(n))
            J[:, i, j] = c.derivative(alpha)(x)
    det = np.linalg.det(J)
    if np.all(det > 0) or np.all(det < 0):
        return SampleCheck(True, "jacobian-sign", n_samples)
    k = int(np.argmin(np.abs(det)))
    return SampleCheck(False, "jacobian-sign", n_samples, f"Jacobian determinant changes sign near {x[k]}", (tuple(x[k]), tuple(x[k])))


PRESETS_1D = {
    "identity": "x",
    "sinh": "sinh(x)",
    "x+x^3": "x+x^3",
    "cubic": "x+x^3",
    "x*sqrt(1+x^2)": "x*sqrt(1+x^2)",
}


def make_phi(spec, bounds=None, n_samples: int = N_SAMPLES) -> MapPhi:
    """Build a coordinate map from a preset name, an ``affine`` dict or expressions.

    ``spec`` may be ``"identity"``, ``"sinh"``, ``"x+x^3"``, ``{"affine": [a, b]}``,
    a single expression string, or a list of component expressions (2-D).
    ``bounds`` is a list of ``(lo, hi)`` per axis and defaults to the whole line.
    """
    name = "custom"
    inverse = None
    if isinstance(spec, MapPhi):
        return spec
    if isinstance(spec, dict):
        if "affine" in spec:
            a, b = (float(v) for v in spec["affine"])
            if a == 0:
                raise MapCheckError("affine map needs a != 0")
            comps = (ScalarField.parse(f"{a!r}*x+({b!r})"),)
            inverse = (ScalarField.parse(f"(x-({b!r}))/{a!r}"),)
            name = "affine"
        elif "components" in spec:
            comps = tuple(ScalarField.parse(t, n=len(spec["components"])) for t in spec["components"])
        else:
            raise MapCheckError(f"unrecognised map spec {spec!r}")
    elif isinstance(spec, str) and spec in PRESETS_1D:
        name = "identity" if spec == "identity" else spec
        comps = (ScalarField.parse(PRESETS_1D[spec]),)
        if spec == "identity":
            inverse = comps
        elif spec == "sinh":
            inverse = (ScalarField.parse("log(x+sqrt(x^2+1))"),)
    elif isinstance(spec, str) and spec == "identity2":
        name = "identity"
        comps = (ScalarField.parse("x1", n=2), ScalarField.parse("x2", n=2))
        inverse = comps
    elif isinstance(spec, str):
        comps = (ScalarField.parse(spec),)
    else:
        comps = tuple(c if isinstance(c, ScalarField) else ScalarField.parse(c, n=len(spec)) for c in spec)
    n = len(comps)
    if any(not c.smooth for c in comps):
        raise MapCheckError("map components must be smooth")
    if bounds is None:
        bounds = [(-np.inf, np.inf)] * n
    if n == 1:
        check = _check_monotone(comps[0], bounds[0], n_samples)
    else:
        check = _check_jacobian(comps, bounds, n_samples)
    if not check.passed:
        raise MapCheckError(f"map {name} fails its sample check: {check.detail}", check.pair)
    return MapPhi(comps, name=name, inverse=inverse, check=check)


@dataclass(frozen=True)
class ComplexFrequency:
    """A frequency ``lambda`` in C^n restricted to the strip ``|Im lambda| < eps``."""

    value: tuple[complex, ...]
    eps: float = field(default=np.inf)

    def __post_init__(self):
        vals = tuple(complex(v) for v in np.atleast_1d(self.value))
        object.__setattr__(self, "value", vals)
        if not self.in_strip():
            raise StripError(f"frequency {vals} lies outside the strip |Im| < {self.eps}")

    @property
    def imag_norm(self) -> float:
        return float(np.linalg.norm([v.imag for v in self.value]))

    def in_strip(self) -> bool:
        return self.imag_norm < self.eps

    def __add__(self, other: "ComplexFrequency") -> "ComplexFrequency":
        return ComplexFrequency(tuple(a + b for a, b in zip(self.value, other.value)), min(self.eps, other.eps))

    def conj(self) -> "ComplexFrequency":
        return ComplexFrequency(tuple(v.conjugate() for v in self.value), self.eps)

    def __neg__(self):
        return ComplexFrequency(tuple(-v for v in self.value), self.eps)


def as_frequency(lam, eps: float = np.inf) -> ComplexFrequency:
    if isinstance(lam, ComplexFrequency):
        return lam
    return ComplexFrequency(tuple(np.atleast_1d(lam)), eps)


def pairing(lam: ComplexFrequency, phi_values: np.ndarray) -> np.ndarray:
    """Bilinear ``(lambda, Phi(x)) = sum_j lambda_j Phi_j(x)``, no conjugation."""
    lam = np.asarray(lam.value)
    if phi_values.ndim == 1 or len(lam) == 1 and phi_values.ndim == 1:
        return lam[0] * phi_values
    return phi_values @ lam


def eval_exponential(lam, phi: MapPhi, f0: ScalarField, x) -> np.ndarray:
    """``exp(-i (lambda, Phi(x))) f0(x)`` at the points ``x``."""
    lam = as_frequency(lam)
    if not lam.in_strip():
        raise StripError(f"frequency {lam.value} lies outside the strip")
    return np.exp(-1j * pairing(lam, phi(x))) * f0(x)
