"""Named weights ``f0`` used throughout the experiments."""

from __future__ import annotations

from .expr import ScalarField

SINGULAR_AT_ZERO = "singular-at-zero"

# zero on [0, 1], positive elsewhere: exp(-x^2/2) * max(0, |2x-1| - 1)
INTERVAL_ZERO = "exp(-x^2/2)*(abs(2*x-1)-1+abs(abs(2*x-1)-1))/2"
EXOTIC = "exp(-sqrt(x^6+cos(x)+2))*floor(x^2+2)"


def preset_weight(name: str, params: dict | None = None) -> ScalarField:
    """Return the weight called ``name``.

    Known names: ``gaussian``, ``laguerre`` (param ``alpha`` > -1), ``exotic``,
    ``gaussian_nd`` (param ``n``), ``one``, ``interval_zero``, ``x_gaussian``.
    """
    params = dict(params or {})
    if name == "gaussian":
        return ScalarField.parse("exp(-x^2/2)", name="gaussian")
    if name == "laguerre":
        alpha = float(params.get("alpha", 0.0))
        if alpha <= -1:
            raise ValueError(f"laguerre weight needs alpha > -1, got {alpha}")
        f = ScalarField.parse(f"exp(-x/2)*x^({alpha!r}/2)", name=f"laguerre({alpha:g})")
        if alpha < 0:
            f.markers = frozenset({SINGULAR_AT_ZERO})
        f.params = {"alpha": alpha}
        return f
    if name == "exotic":
        return ScalarField.parse(EXOTIC, name="exotic")
    if name == "gaussian_nd":
        n = int(params.get("n", 1))
        if n == 1:
            return ScalarField.parse("exp(-x^2)", name="gaussian_nd")
        terms = "+".join(f"x{j + 1}^2" for j in range(n))
        return ScalarField.parse(f"exp(-({terms}))", n=n, name="gaussian_nd")
    if name == "one":
        return ScalarField.parse("1", n=int(params.get("n", 1)), name="one")
    if name == "interval_zero":
        return ScalarField.parse(INTERVAL_ZERO, name="interval_zero")
    if name == "x_gaussian":
        return ScalarField.parse("x*exp(-x^2)", name="x_gaussian")
    raise ValueError(f"unknown weight preset {name!r}")


WEIGHT_PRESETS = ("gaussian", "laguerre", "exotic", "gaussian_nd", "one", "interval_zero", "x_gaussian")
