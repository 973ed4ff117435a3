"""Strict, versioned JSON experiment configuration.

Every block is checked for unknown keys, every referenced preset must exist
and cross-field rules are validated before any numerics run. Failures raise
:class:`ConfigError`, which names the violated rule.

Defaults (all overridable in the config):

* ``family.sizes`` -- member counts for ``exponential``/``pullback``, degree
  caps for ``monomial``, index caps for ``gap``.
* ``family.frequency_half_width = 4`` -- exponential frequencies are
  ``linspace(-w, w, size)``.
* ``admissibility.eps_grid`` / ``degree_probe`` -- the library defaults
  ``DEFAULT_EPS_GRID`` and ``DEFAULT_DEGREE_PROBE``.
* ``witness.probe_degree = 12``.
* ``closure_compare.half_width = 4``.
* analytic check tolerances: ``lemma212`` 1e-8, ``prop210`` 1e-5
  (Richardson) and 1e-10 (complex step), ``group_law`` 1e-10.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from ..families import DEFAULT_DEGREE_PROBE, DEFAULT_EPS_GRID, FAMILY_KINDS
from ..funcmodel import WEIGHT_PRESETS, ParseError, ScalarField

SCHEMA_VERSION = 1

TOP_KEYS = {"schema_version", "experiment", "seed", "space", "weight", "phi", "family", "targets",
            "admissibility", "witness", "closure_compare", "analytic_checks", "criteria", "output"}
SPACE_KEYS = {"kind", "p", "m", "n", "domain", "exhaustion", "k_max", "N_max", "alpha_max", "measure", "quadrature"}
MEASURE_KEYS = {"density", "atoms"}
QUADRATURE_KEYS = {"kind", "order", "panels"}
WEIGHT_KEYS = {"preset", "params", "expression"}
FAMILY_KEYS = {"kind", "sizes", "frequency_half_width", "strip_eps", "N", "l", "seed", "shift_range", "spacings",
               "dictionary_width"}
ADMISSIBILITY_KEYS = {"check", "p", "eps_grid", "degree_probe", "eps"}
WITNESS_KEYS = {"enabled", "probe_degree", "sizes"}
CLOSURE_KEYS = {"target", "sizes", "half_width", "include_pullback"}
CHECK_KEYS = {
    "lemma212": {"check", "f", "orders", "tol", "min_drop"},
    "prop210": {"check", "g", "alphas", "methods", "tol", "complex_step_tol", "eps"},
    "group_law": {"check", "g", "lam1", "lam2", "tol", "eps"},
    "fourier_convention": {"check"},
}
CRITERIA_KEYS = {"admissibility", "min_certified_eps", "admissibility_failure", "max_final_error", "decaying",
                 "strictly_decreasing", "error_floor", "verdict", "closure_consistent", "analytic_checks_pass",
                 "witness_max_pairing", "witness_min_separation"}
OUTPUT_KEYS = {"dir"}
ADMISSIBILITY_CHECKS = ("thm31", "assumption26", "none")
VERDICTS = ("dense-consistent", "obstruction-found", "inconclusive")
SMOOTH_ONLY_KINDS = ("Cm", "Schwartz")


class ConfigError(ValueError):
    """A configuration that violates ``rule``."""

    def __init__(self, rule: str, message: str):
        super().__init__(f"[{rule}] {message}")
        self.rule = rule
        self.message = message

    def to_dict(self) -> dict:
        return {"error": "validation", "rule": self.rule, "message": self.message}


def _number(v, where: str) -> float:
    """A float, accepting the strings ``inf``, ``+inf`` and ``-inf``."""
    if isinstance(v, str) and v.strip().lower() in ("inf", "+inf", "infinity", "-inf", "-infinity"):
        return -math.inf if v.strip().startswith("-") else math.inf
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError("type", f"{where} must be a number or 'inf', got {v!r}")
    return float(v)


def _int(v, where: str, minimum: int | None = None) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError("type", f"{where} must be an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError("range", f"{where} must be >= {minimum}, got {v}")
    return v


def _keys(block, allowed: set, where: str) -> dict:
    if not isinstance(block, dict):
        raise ConfigError("type", f"{where} must be an object")
    unknown = sorted(set(block) - allowed)
    if unknown:
        raise ConfigError("unknown-key", f"{where} has unknown keys {unknown}")
    return block


def _expression(text, where: str, n: int = 1) -> ScalarField:
    if not isinstance(text, str):
        raise ConfigError("type", f"{where} must be an expression string")
    try:
        return ScalarField.parse(text, n=n, name=text)
    except ParseError as exc:
        raise ConfigError("expression", f"{where}: {exc}") from exc


def _ascending(values, where: str, cast=int) -> list:
    if not isinstance(values, list) or not values:
        raise ConfigError("type", f"{where} must be a non-empty list")
    out = [_int(v, where, 0) if cast is int else _number(v, where) for v in values]
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ConfigError("sizes-ascending", f"{where} must be strictly increasing, got {out}")
    return out


@dataclass
class ExperimentConfig:
    """A validated experiment; ``raw`` is the normalized echo written into the report."""

    raw: dict
    experiment: str
    seed: int = 0
    space: dict | None = None
    weight: dict | None = None
    phi: object = "identity"
    family: dict | None = None
    targets: list | None = None
    admissibility: dict = field(default_factory=lambda: {"check": "none"})
    witness: dict = field(default_factory=lambda: {"enabled": False})
    closure_compare: dict | None = None
    analytic_checks: list = field(default_factory=list)
    criteria: dict = field(default_factory=dict)
    output_dir: str | None = None

    @property
    def domain_bounds(self):
        return None if self.space is None else self.space.get("domain")


def _validate_space(block) -> dict:
    block = dict(_keys(block, SPACE_KEYS, "space"))
    kind = block.get("kind")
    if kind not in ("Lp", "Cm", "Schwartz"):
        raise ConfigError("space-kind", f"space.kind must be Lp, Cm or Schwartz, got {kind!r}")
    n = _int(block.get("n", 1), "space.n", 1)
    if n > 2:
        raise ConfigError("dimension", "dimensions above 2 are not supported")
    block["n"] = n
    if "p" in block:
        block["p"] = _number(block["p"], "space.p")
    if "m" in block and block["m"] != "inf":
        block["m"] = _int(block["m"], "space.m", 0)
    dom = block.get("domain")
    if dom is None:
        block["domain"] = [[-math.inf, math.inf]] * n
    else:
        if not isinstance(dom, list) or len(dom) != n or any(not isinstance(b, list) or len(b) != 2 for b in dom):
            raise ConfigError("domain", f"space.domain must be a list of {n} [lo, hi] pairs")
        bounds = [[_number(lo, "space.domain"), _number(hi, "space.domain")] for lo, hi in dom]
        if any(not lo < hi for lo, hi in bounds):
            raise ConfigError("domain", f"space.domain needs lo < hi on every axis, got {bounds}")
        block["domain"] = bounds
    for key in ("k_max", "N_max", "alpha_max"):
        if key in block:
            block[key] = _int(block[key], f"space.{key}", 0)
    if "measure" in block:
        meas = dict(_keys(block["measure"], MEASURE_KEYS, "space.measure"))
        if meas.get("density") is not None:
            _expression(meas["density"], "space.measure.density", n)
        atoms = meas.get("atoms", [])
        if not isinstance(atoms, list):
            raise ConfigError("type", "space.measure.atoms must be a list of [location, mass]")
        for atom in atoms:
            if not isinstance(atom, list) or len(atom) != 2:
                raise ConfigError("type", "space.measure.atoms entries are [location, mass]")
            if _number(atom[1], "atom mass") <= 0:
                raise ConfigError("atom-mass", f"atom mass must be positive, got {atom[1]}")
        block["measure"] = meas
    if "quadrature" in block:
        q = dict(_keys(block["quadrature"], QUADRATURE_KEYS, "space.quadrature"))
        _int(q.get("order", 0), "space.quadrature.order", 1)
        block["quadrature"] = q
    return block


def _validate_weight(block, space) -> dict:
    block = dict(_keys(block, WEIGHT_KEYS, "weight"))
    has_preset, has_expr = "preset" in block, "expression" in block
    if has_preset == has_expr:
        raise ConfigError("weight", "weight needs exactly one of 'preset' or 'expression'")
    n = space["n"] if space else 1
    if has_preset:
        if block["preset"] not in WEIGHT_PRESETS:
            raise ConfigError("unknown-preset", f"weight preset {block['preset']!r} not in {list(WEIGHT_PRESETS)}")
        if not isinstance(block.get("params", {}), dict):
            raise ConfigError("type", "weight.params must be an object")
        from ..funcmodel import preset_weight
        try:
            f0 = preset_weight(block["preset"], block.get("params"))
        except ValueError as exc:
            raise ConfigError("weight-params", str(exc)) from exc
    else:
        if "params" in block:
            raise ConfigError("weight", "weight.params only applies to presets")
        f0 = _expression(block["expression"], "weight.expression", n)
    if space is not None:
        if space["kind"] in SMOOTH_ONLY_KINDS and not f0.smooth:
            raise ConfigError("smooth-weight-required",
                              f"{space['kind']} pipelines need a smooth weight; abs/floor fields are L_p-only")
        if block.get("preset") == "laguerre":
            lo, hi = space["domain"][0]
            if not (lo == 0 and hi == math.inf):
                raise ConfigError("laguerre-half-line", "the laguerre weight requires the domain (0, inf)")
        if f0.n != space["n"]:
            raise ConfigError("dimension", f"weight lives in dimension {f0.n}, space in {space['n']}")
    return block


def _validate_family(block, space) -> dict:
    block = dict(_keys(block, FAMILY_KEYS, "family"))
    kind = block.get("kind")
    if kind not in FAMILY_KINDS:
        raise ConfigError("family-kind", f"family.kind must be one of {list(FAMILY_KINDS)}, got {kind!r}")
    if kind == "translate":
        if "spacings" not in block or "shift_range" not in block:
            raise ConfigError("translate-grid", "translate families need 'spacings' and 'shift_range'")
        sp = [_number(s, "family.spacings") for s in block["spacings"]]
        if any(s <= 0 for s in sp) or any(b >= a for a, b in zip(sp, sp[1:])):
            raise ConfigError("spacings-refine", "family.spacings must be positive and strictly decreasing")
        lo, hi = (_number(v, "family.shift_range") for v in block["shift_range"])
        if not lo < hi:
            raise ConfigError("range", "family.shift_range needs lo < hi")
        if "seed" in block:
            _expression(block["seed"], "family.seed", space["n"] if space else 1)
        if "sizes" in block:
            raise ConfigError("translate-grid", "translate families are sized by 'spacings', not 'sizes'")
    else:
        block["sizes"] = _ascending(block.get("sizes"), "family.sizes")
    if kind == "gap":
        _int(block.get("N", 0), "family.N", 0)
        _int(block.get("l", 2), "family.l", 2)
        if space is not None and (space["kind"] != "Lp" or space["domain"][0] != [0.0, math.inf]):
            raise ConfigError("gap-half-line", "gap families live in L_p(0, inf)")
    if "strip_eps" in block:
        if _number(block["strip_eps"], "family.strip_eps") <= 0:
            raise ConfigError("range", "family.strip_eps must be positive")
    return block


def _validate_admissibility(block, space) -> dict:
    block = dict(_keys(block, ADMISSIBILITY_KEYS, "admissibility"))
    check = block.get("check", "none")
    if check not in ADMISSIBILITY_CHECKS:
        raise ConfigError("admissibility-check", f"admissibility.check must be one of {list(ADMISSIBILITY_CHECKS)}")
    block["check"] = check
    if check == "none":
        return block
    if space is None:
        raise ConfigError("missing-block", "admissibility checks need a space block")
    if check == "thm31":
        if space["kind"] != "Lp":
            raise ConfigError("thm31-lp", "the thm31 check applies to L_p spaces")
        ps = block.get("p", space.get("p", 2.0))
        ps = ps if isinstance(ps, list) else [ps]
        ps = [_number(p, "admissibility.p") for p in ps]
        if any(not (1 <= p < math.inf) for p in ps):
            raise ConfigError("range", "admissibility.p must lie in [1, inf)")
        block["p"] = ps
    if check == "assumption26":
        if "p" in block:
            raise ConfigError("admissibility", "assumption26 uses the space's own p")
        if _number(block.get("eps", 0.5), "admissibility.eps") <= 0:
            raise ConfigError("range", "admissibility.eps must be positive")
    if "eps_grid" in block:
        grid = [_number(e, "admissibility.eps_grid") for e in block["eps_grid"]]
        if not grid or any(e <= 0 for e in grid):
            raise ConfigError("range", "admissibility.eps_grid must hold positive values")
        block["eps_grid"] = grid
    _int(block.get("degree_probe", DEFAULT_DEGREE_PROBE), "admissibility.degree_probe", 0)
    return block


def _validate_checks(items) -> list:
    if not isinstance(items, list):
        raise ConfigError("type", "analytic_checks must be a list")
    out = []
    for i, item in enumerate(items):
        name = item.get("check") if isinstance(item, dict) else None
        if name not in CHECK_KEYS:
            raise ConfigError("unknown-check", f"analytic_checks[{i}].check must be one of {list(CHECK_KEYS)}")
        item = dict(_keys(item, CHECK_KEYS[name], f"analytic_checks[{i}]"))
        for key in ("f", "g"):
            if key in item:
                _expression(item[key], f"analytic_checks[{i}].{key}")
        if name == "lemma212":
            orders = item.get("orders", [32, 64])
            item["orders"] = _ascending(orders, f"analytic_checks[{i}].orders")
        if name == "prop210":
            alphas = item.get("alphas", [1, 2, 3])
            item["alphas"] = [_int(a, f"analytic_checks[{i}].alphas", 1) for a in alphas]
            methods = item.get("methods", ["richardson-fd"])
            if any(m not in ("richardson-fd", "complex-step") for m in methods):
                raise ConfigError("prop210-method", "methods are 'richardson-fd' and 'complex-step'")
            item["methods"] = list(methods)
        out.append(item)
    return out


def _validate_criteria(block) -> dict:
    block = dict(_keys(block, CRITERIA_KEYS, "criteria"))
    adm = block.get("admissibility")
    if adm is not None:
        values = adm.values() if isinstance(adm, dict) else [adm]
        if any(v not in ("pass", "fail") for v in values):
            raise ConfigError("criteria", "criteria.admissibility entries must be 'pass' or 'fail'")
    if "verdict" in block and block["verdict"] not in VERDICTS:
        raise ConfigError("criteria", f"criteria.verdict must be one of {list(VERDICTS)}")
    for key in ("min_certified_eps", "max_final_error", "error_floor", "witness_max_pairing", "witness_min_separation"):
        if key in block:
            block[key] = _number(block[key], f"criteria.{key}")
    for key in ("decaying", "strictly_decreasing", "closure_consistent", "analytic_checks_pass"):
        if key in block and not isinstance(block[key], bool):
            raise ConfigError("type", f"criteria.{key} must be true or false")
    return block


def validate(raw: dict) -> ExperimentConfig:
    """Validate a parsed config and return the normalized :class:`ExperimentConfig`."""
    raw = _keys(raw, TOP_KEYS, "config")
    if raw.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError("schema-version", f"schema_version must be {SCHEMA_VERSION}, got {raw.get('schema_version')!r}")
    name = raw.get("experiment")
    if not isinstance(name, str) or not name:
        raise ConfigError("experiment", "experiment must be a non-empty string")
    cfg = ExperimentConfig(raw=raw, experiment=name, seed=_int(raw.get("seed", 0), "seed", 0))
    if "space" in raw:
        cfg.space = _validate_space(raw["space"])
    if "weight" in raw:
        cfg.weight = _validate_weight(raw["weight"], cfg.space)
    cfg.phi = raw.get("phi", "identity")
    if not isinstance(cfg.phi, (str, dict, list)):
        raise ConfigError("type", "phi must be a preset name, an affine/components object or a list")
    if "family" in raw:
        if cfg.space is None or cfg.weight is None:
            raise ConfigError("missing-block", "a family needs space and weight blocks")
        cfg.family = _validate_family(raw["family"], cfg.space)
    if "targets" in raw:
        if not isinstance(raw["targets"], list) or not raw["targets"]:
            raise ConfigError("type", "targets must be a non-empty list of expressions")
        n = cfg.space["n"] if cfg.space else 1
        for t in raw["targets"]:
            f = _expression(t, "targets", n)
            if cfg.space and cfg.space["kind"] in SMOOTH_ONLY_KINDS and not f.smooth:
                raise ConfigError("smooth-target-required", f"target {t!r} uses abs/floor; not allowed in {cfg.space['kind']}")
        cfg.targets = list(raw["targets"])
    if "admissibility" in raw:
        if cfg.weight is None:
            raise ConfigError("missing-block", "admissibility checks need a weight block")
        cfg.admissibility = _validate_admissibility(raw["admissibility"], cfg.space)
    if "witness" in raw:
        w = dict(_keys(raw["witness"], WITNESS_KEYS, "witness"))
        if not isinstance(w.get("enabled", True), bool):
            raise ConfigError("type", "witness.enabled must be true or false")
        w.setdefault("enabled", True)
        _int(w.get("probe_degree", 12), "witness.probe_degree", 1)
        if "sizes" in w:
            w["sizes"] = _ascending(w["sizes"], "witness.sizes")
        if w["enabled"] and (cfg.space is None or cfg.weight is None):
            raise ConfigError("missing-block", "the witness search needs space and weight blocks")
        cfg.witness = w
    if "closure_compare" in raw:
        c = dict(_keys(raw["closure_compare"], CLOSURE_KEYS, "closure_compare"))
        if cfg.space is None or cfg.weight is None:
            raise ConfigError("missing-block", "closure_compare needs space and weight blocks")
        _expression(c.get("target"), "closure_compare.target", cfg.space["n"])
        c["sizes"] = _ascending(c.get("sizes", [5, 9, 17, 33]), "closure_compare.sizes")
        if c["sizes"][0] < 1:
            raise ConfigError("range", "closure_compare.sizes must be >= 1")
        cfg.closure_compare = c
    if "analytic_checks" in raw:
        if raw["analytic_checks"] and cfg.weight is None:
            raise ConfigError("missing-block", "analytic checks need a weight block")
        cfg.analytic_checks = _validate_checks(raw["analytic_checks"])
    if "criteria" in raw:
        cfg.criteria = _validate_criteria(raw["criteria"])
        if "admissibility" in cfg.criteria and cfg.admissibility["check"] == "none":
            raise ConfigError("criteria", "an admissibility criterion needs an admissibility check")
    if "output" in raw:
        out = _keys(raw["output"], OUTPUT_KEYS, "output")
        cfg.output_dir = out.get("dir")
    return cfg


def load(path) -> ExperimentConfig:
    """Read and validate a JSON config file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("unreadable", f"cannot read {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("json", f"{path}: {exc}") from exc
    return validate(raw)
