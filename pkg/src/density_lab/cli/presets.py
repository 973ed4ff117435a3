"""Ready-made experiment configs, each parameterized by a few ``--param`` values."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .config import SCHEMA_VERSION, ConfigError

HALF_LINE = [[0, "inf"]]
UNIT_INTERVAL = [[-1, 1]]


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    defaults: dict
    build: Callable[[dict], dict]


def _base(name: str, **blocks) -> dict:
    return {"schema_version": SCHEMA_VERSION, "experiment": name, "seed": 0, **blocks}


def _hermite_l2(p):
    return _base(
        "hermite_l2",
        space={"kind": "Lp", "p": 2},
        weight={"preset": "gaussian"},
        family={"kind": "monomial", "sizes": p["sizes"]},
        targets=[p["target"]],
        admissibility={"check": "thm31"},
        witness={"enabled": True},
        criteria={"admissibility": "pass", "strictly_decreasing": True, "verdict": "dense-consistent"},
    )


def _hermite_lp(p):
    return _base(
        "hermite_lp",
        space={"kind": "Lp", "p": p["p"]},
        weight={"preset": "gaussian"},
        family={"kind": "monomial", "sizes": p["sizes"]},
        targets=[p["target"]],
        admissibility={"check": "thm31"},
        criteria={"admissibility": "pass", "strictly_decreasing": True},
    )


def _laguerre_threshold(p):
    alpha = float(p["alpha"])
    threshold = -2.0 / alpha if alpha < 0 else math.inf
    ps = [float(p["p"]), float(p["p_fail"])]
    expect = {f"{q:g}": ("pass" if q < threshold else "fail") for q in ps}
    criteria = {"admissibility": expect, "max_final_error": p["max_final_error"]}
    if expect[f"{ps[0]:g}"] == "pass":
        criteria["min_certified_eps"] = p["min_eps"]
    if "fail" in expect.values():
        criteria["admissibility_failure"] = "origin divergence"
    return _base(
        "laguerre_threshold",
        space={"kind": "Lp", "p": 2, "domain": HALF_LINE},
        weight={"preset": "laguerre", "params": {"alpha": alpha}},
        family={"kind": "monomial", "sizes": p["sizes"]},
        targets=[p["target"]],
        admissibility={"check": "thm31", "p": ps},
        criteria=criteria,
    )


def _exotic_l2(p):
    return _base(
        "exotic_l2",
        space={"kind": "Lp", "p": 2},
        weight={"preset": "exotic"},
        family={"kind": "monomial", "sizes": p["sizes"]},
        targets=[p["target"]],
        admissibility={"check": "thm31"},
        criteria={"admissibility": "pass", "decaying": True},
    )


def _polynomial_lp_smallmeasure(p):
    return _base(
        "polynomial_lp_smallmeasure",
        space={"kind": "Lp", "p": p["p"], "domain": UNIT_INTERVAL, "measure": {"density": p["density"]}},
        weight={"preset": "one"},
        family={"kind": "monomial", "sizes": p["sizes"]},
        admissibility={"check": "thm31"},
        witness={"enabled": True, "sizes": p["sizes"]},
        criteria={"admissibility": "pass", "verdict": "dense-consistent"},
    )


def _cm_polynomial_density(p):
    return _base(
        "cm_polynomial_density",
        space={"kind": "Cm", "m": p["m"], "domain": UNIT_INTERVAL},
        weight={"preset": "gaussian"},
        family={"kind": "monomial", "sizes": p["sizes"]},
        admissibility={"check": "assumption26", "eps": 0.5},
        witness={"enabled": True, "sizes": p["sizes"]},
        criteria={"admissibility": "pass", "verdict": "dense-consistent"},
    )


def _cm_zero_obstruction(p):
    return _base(
        "cm_zero_obstruction",
        space={"kind": "Cm", "m": p["m"], "domain": UNIT_INTERVAL},
        weight={"preset": "x_gaussian"},
        family={"kind": "monomial", "sizes": p["sizes"]},
        targets=["1"],
        witness={"enabled": True},
        criteria={"error_floor": 1 - 1e-6, "verdict": "obstruction-found", "witness_max_pairing": 1e-10},
    )


def _schwartz_hermite(p):
    return _base(
        "schwartz_hermite",
        space={"kind": "Schwartz", "alpha_max": p["alpha_max"], "N_max": p["N_max"]},
        weight={"preset": "gaussian"},
        family={"kind": "monomial", "sizes": p["sizes"]},
        targets=[p["target"]],
        admissibility={"check": "assumption26", "eps": 0.5},
        criteria={"admissibility": "pass", "decaying": True},
    )


def _gaussian_translates_schwartz(p):
    return _base(
        "gaussian_translates_schwartz",
        space={"kind": "Schwartz", "alpha_max": p["alpha_max"], "N_max": p["N_max"]},
        weight={"preset": "gaussian_nd"},
        family={"kind": "translate", "spacings": p["spacings"], "shift_range": p["shift_range"]},
        targets=[p["target"]],
        criteria={"strictly_decreasing": True},
    )


def _gap_family(p):
    return _base(
        "gap_family",
        space={"kind": "Lp", "p": 2, "domain": HALF_LINE},
        weight={"expression": "exp(-x)"},
        family={"kind": "gap", "N": p["N"], "l": p["l"], "sizes": p["caps"]},
        targets=[p["target"]],
        criteria={"strictly_decreasing": True, "max_final_error": p["max_final_error"]},
    )


def _closure_compare(p):
    return _base(
        "closure_compare",
        space={"kind": "Lp", "p": 2},
        weight={"preset": p["weight"]},
        closure_compare={"target": p["target"], "sizes": p["sizes"], "half_width": p["half_width"]},
        criteria={"closure_consistent": True},
    )


def _lemma212_check(p):
    return _base(
        "lemma212_check",
        weight={"preset": "gaussian"},
        analytic_checks=[{"check": "lemma212", "f": p["f"], "orders": p["orders"], "tol": p["tol"]},
                         {"check": "fourier_convention"}],
        criteria={"analytic_checks_pass": True},
    )


def _prop210_check(p):
    return _base(
        "prop210_check",
        weight={"preset": "gaussian"},
        analytic_checks=[
            {"check": "prop210", "g": p["g"], "alphas": p["alphas"], "methods": ["richardson-fd", "complex-step"],
             "tol": p["tol"], "complex_step_tol": p["complex_step_tol"]},
            {"check": "group_law", "g": p["g"], "lam1": 0.3, "lam2": -0.7},
        ],
        criteria={"analytic_checks_pass": True},
    )


PRESETS = {
    p.name: p
    for p in (
        Preset("hermite_l2", "Gaussian-weighted polynomials in L2(R)",
               {"sizes": [5, 10, 20, 40], "target": "1/(1+x^2)"}, _hermite_l2),
        Preset("hermite_lp", "Gaussian-weighted polynomials in Lp(R) via IRLS",
               {"p": 3, "sizes": [4, 8, 12], "target": "1/(1+x^2)"}, _hermite_lp),
        Preset("laguerre_threshold", "Laguerre weight admissibility below and above p = -2/alpha",
               {"alpha": -0.5, "p": 2, "p_fail": 4, "sizes": [5, 10, 20, 30], "target": "x*exp(-x)",
                "min_eps": 0.2, "max_final_error": 1e-2}, _laguerre_threshold),
        Preset("exotic_l2", "Measurable, floor-containing weight in L2(R)",
               {"sizes": [4, 8, 16], "target": "exp(-(x-1)^2)"}, _exotic_l2),
        Preset("polynomial_lp_smallmeasure", "Plain polynomials (f0 = 1) for a compactly supported density",
               {"p": 2, "density": "1-x^2", "sizes": [4, 8, 16]}, _polynomial_lp_smallmeasure),
        Preset("cm_polynomial_density", "Gaussian-weighted polynomials in C^m(-1, 1)",
               {"m": 1, "sizes": [4, 8, 16]}, _cm_polynomial_density),
        Preset("cm_zero_obstruction", "Weight with a zero in C^m(-1, 1): point-evaluation witness",
               {"m": 0, "sizes": [4, 8, 16]}, _cm_zero_obstruction),
        Preset("schwartz_hermite", "Gaussian-weighted polynomials under capped Schwartz seminorms",
               {"sizes": [4, 8, 16], "alpha_max": 1, "N_max": 1, "target": "sin(3*x)*exp(-x^2/4)"},
               _schwartz_hermite),
        Preset("gaussian_translates_schwartz", "Translates of exp(-x^2) on refining shift grids",
               {"spacings": [1.0, 0.5, 0.25], "shift_range": [-8, 8], "alpha_max": 3, "N_max": 0,
                "target": "sin(3*x)*exp(-x^2/4)"}, _gaussian_translates_schwartz),
        Preset("gap_family", "Gap family x^n e^-x, n >= N, l not dividing n, in L2(0, inf)",
               {"N": 3, "l": 2, "caps": [9, 19, 40], "target": "x*exp(-x)", "max_final_error": 1e-2},
               _gap_family),
        Preset("closure_compare", "Monomial vs real-exponential families at matched member counts",
               {"weight": "gaussian", "target": "exp(-(x-1)^2)", "sizes": [5, 9, 17, 33], "half_width": 4.0},
               _closure_compare),
        Preset("lemma212_check", "Fourier superposition of exponential members",
               {"f": "exp(-x^2/2)", "orders": [16, 32], "tol": 1e-8}, _lemma212_check),
        Preset("prop210_check", "Derivatives of the holomorphic probe against moments",
               {"g": "exp(-(x-1)^2)", "alphas": [1, 2, 3], "tol": 1e-5, "complex_step_tol": 1e-10},
               _prop210_check),
    )
}


def preset_experiments() -> list[str]:
    """Names of all preset experiments."""
    return list(PRESETS)


def preset_config(name: str, params: dict | None = None) -> dict:
    """The raw config dict of preset ``name`` with ``params`` overriding its defaults."""
    if name not in PRESETS:
        raise ConfigError("unknown-preset", f"no preset named {name!r}; see list-presets")
    preset = PRESETS[name]
    params = dict(params or {})
    unknown = sorted(set(params) - set(preset.defaults))
    if unknown:
        raise ConfigError("unknown-param", f"preset {name} has no parameters {unknown}; "
                                           f"known: {sorted(preset.defaults)}")
    return preset.build({**preset.defaults, **params})
