"""The experiment pipeline: admissibility, families, projections, verdict, analytic checks."""

from __future__ import annotations

import csv
import json
import logging
import math
import re
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from ..approx import DualFunctional, annihilator_witness, error_decay, targets_for
from ..approx.linalg import SolverError
from ..approx.solvers import GramError
from ..families import (
    DEFAULT_DEGREE_PROBE,
    DEFAULT_EPS_GRID,
    FamilyError,
    check_assumption26,
    check_thm31,
    exponential_family,
    gap_family,
    monomial_family,
    pullback_family,
    translate_family,
)
from ..funcmodel import MapCheckError, ScalarField, make_phi, preset_weight
from ..numerics import LEBESGUE, Domain, MeasureSpec, NonFiniteError, QuadratureError, build_quadrature
from ..spaces import SpaceError, make_space
from ..verify import (
    CheckRecord,
    FourierConvention,
    HolomorphicProbe,
    _jsonable,
    check_group_law,
    check_lemma212,
    check_prop210,
    compare_closures,
    default_frequency_grid,
    gaussian_dictionary,
)
from .config import ConfigError, ExperimentConfig

log = logging.getLogger("density_lab")

NUMERICAL_ERRORS = (SolverError, GramError, NonFiniteError, QuadratureError, FloatingPointError,
                    np.linalg.LinAlgError, ArithmeticError)


class NumericalFailure(RuntimeError):
    """An internal numerical failure that aborted the pipeline."""


@dataclass
class RunReport:
    """Deterministic results (``body``) plus wall-clock data kept apart (``timing``)."""

    body: dict
    timing: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.body.get("passed"))

    def to_json(self) -> str:
        return json.dumps(self.body, sort_keys=True, indent=2, allow_nan=False)


# ---------------------------------------------------------------- building blocks


def build_space(cfg: ExperimentConfig):
    if cfg.space is None:
        return None
    s = cfg.space
    params = {k: v for k, v in s.items() if k not in ("kind", "measure", "quadrature")}
    params["domain"] = [tuple(b) for b in s["domain"]]
    if "exhaustion" in s:
        params["exhaustion"] = [[tuple(b) for b in box] for box in s["exhaustion"]]
    if "measure" in s:
        m = s["measure"]
        density = ScalarField.parse(m["density"], n=s["n"]) if m.get("density") else None
        atoms = tuple((loc, float(mass)) for loc, mass in m.get("atoms", []))
        params["measure"] = MeasureSpec(density, atoms)
    if "quadrature" in s:
        q = s["quadrature"]
        params["rule"] = build_quadrature(Domain(tuple(tuple(b) for b in s["domain"])), q.get("kind", "tanh-sinh"),
                                          int(q.get("order", 100)), panels=int(q.get("panels", 1)))
    try:
        return make_space(s["kind"], params)
    except (SpaceError, ValueError) as exc:
        raise ConfigError("space", str(exc)) from exc


def build_weight(cfg: ExperimentConfig) -> ScalarField | None:
    w = cfg.weight
    if w is None:
        return None
    if "preset" in w:
        return preset_weight(w["preset"], w.get("params"))
    return ScalarField.parse(w["expression"], n=cfg.space["n"] if cfg.space else 1, name=w["expression"])


def build_phi(cfg: ExperimentConfig):
    bounds = [tuple(b) for b in cfg.space["domain"]] if cfg.space else None
    try:
        return make_phi(cfg.phi, bounds=bounds)
    except MapCheckError as exc:
        raise ConfigError("phi-check", str(exc)) from exc


def translate_shifts(lo: float, hi: float, spacing: float) -> np.ndarray:
    """Shifts ``lo, lo + h, ..., hi`` (``hi`` included when it lies on the grid)."""
    count = int(math.floor((hi - lo) / spacing + 1e-9)) + 1
    return lo + spacing * np.arange(count)


def family_builder(cfg: ExperimentConfig, phi, f0):
    """``(sizes, size -> BasisFamily)`` for the configured family."""
    fam = cfg.family
    kind = fam["kind"]
    if kind == "monomial":
        return fam["sizes"], lambda s: monomial_family(phi, f0, s)
    if kind == "exponential":
        hw = float(fam.get("frequency_half_width", 4.0))
        eps = float(fam.get("strip_eps", math.inf))
        return fam["sizes"], lambda s: exponential_family(phi, f0, default_frequency_grid(s, hw), eps)
    if kind == "pullback":
        width = float(fam.get("dictionary_width", 4.0))
        return fam["sizes"], lambda s: pullback_family(gaussian_dictionary(s, width), phi, f0)
    if kind == "gap":
        N, l = int(fam.get("N", 0)), int(fam.get("l", 2))
        return fam["sizes"], lambda s: gap_family(N, l, s)
    seed = ScalarField.parse(fam["seed"], name=fam["seed"]) if "seed" in fam else f0
    lo, hi = (float(v) for v in fam["shift_range"])
    grids = {}
    for h in fam["spacings"]:
        shifts = translate_shifts(lo, hi, float(h))
        grids[len(shifts)] = shifts
    return sorted(grids), lambda s: translate_family(seed, grids[s])


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", text).strip("_")[:40] or "target"


# ---------------------------------------------------------------- stages


def _admissibility(cfg, space, f0, phi) -> list:
    a = cfg.admissibility
    eps_grid = tuple(a.get("eps_grid", DEFAULT_EPS_GRID))
    degree = int(a.get("degree_probe", DEFAULT_DEGREE_PROBE))
    out = []
    if a["check"] == "thm31":
        domain = space.domain
        for p in a["p"]:
            v = check_thm31(f0, phi, p, space.measure, eps_grid, degree, Domain(domain.bounds))
            out.append({"check": "thm31", "p": p, **v.to_dict()})
    elif a["check"] == "assumption26":
        v = check_assumption26(space, f0, phi, float(a.get("eps", 0.5)), degree_probe=degree)
        out.append({"check": "assumption26", "p": space.p, **v.to_dict()})
    return out


def _decay(cfg, space, f0, phi) -> list:
    sizes, build = family_builder(cfg, phi, f0)
    targets = ([ScalarField.parse(t, n=space.n, name=t) for t in cfg.targets] if cfg.targets
               else targets_for(space))
    out = []
    for t in targets:
        table = error_decay(t, build, sizes, space)
        out.append({
            "target": t.name or t.text,
            "family": cfg.family["kind"],
            "member_counts": [r.sizes[-1] for r in table.reports],
            "converged": [bool(r.converged) for r in table.reports],
            "iterations": [int(r.iterations) for r in table.reports],
            "effective_rank": [r.effective_rank for r in table.reports],
            **table.to_dict(),
        })
    return out


def _analytic(cfg, f0, phi, space) -> list:
    out = []
    measure = space.measure if space is not None else LEBESGUE
    for item in cfg.analytic_checks:
        name = item["check"]
        if name == "fourier_convention":
            out.append(FourierConvention.check().to_dict())
        elif name == "lemma212":
            f = ScalarField.parse(item.get("f", "exp(-x^2/2)"))
            tol = float(item.get("tol", 1e-8))
            recs = [check_lemma212(f, phi, f0, order, tol=tol) for order in item["orders"]]
            out.append(recs[-1].to_dict())
            if len(recs) > 1:
                first, last = recs[0].residual, recs[1].residual
                drop = first / max(last, 1e-300)
                min_drop = float(item.get("min_drop", 10.0))
                out.append(CheckRecord("lemma212-order-drop", {"orders": item["orders"][:2], "min_drop": min_drop},
                                       first, last, drop, bool(drop >= min_drop),
                                       {"residual_by_order": {str(o): r.residual
                                                              for o, r in zip(item["orders"], recs)}}).to_dict())
        else:
            g = ScalarField.parse(item.get("g", "exp(-(x-1)^2)"))
            eps = float(item.get("eps", math.inf))
            probe = HolomorphicProbe(DualFunctional("integrate", g=g), phi, f0, eps, measure=measure)
            if name == "prop210":
                for method in item["methods"]:
                    alphas = item["alphas"] if method == "richardson-fd" else [1]
                    tol = item.get("tol", 1e-5) if method == "richardson-fd" else item.get("complex_step_tol", 1e-10)
                    for a in alphas:
                        out.append(check_prop210(probe, (a,), method, tol=float(tol)).to_dict())
            else:
                out.append(check_group_law(probe, item.get("lam1", 0.3), item.get("lam2", -0.7),
                                           float(item.get("tol", 1e-10))).to_dict())
    return out


# ---------------------------------------------------------------- criteria


def _criterion(name, expected, observed, ok) -> dict:
    return {"criterion": name, "expected": expected, "observed": observed, "pass": bool(ok)}


def evaluate_criteria(crit: dict, body: dict) -> list:
    out = []
    adm = body.get("admissibility", [])
    decay = body.get("decay", [])
    if "admissibility" in crit:
        want = crit["admissibility"]
        for v in adm:
            w = want.get(_pkey(v["p"])) if isinstance(want, dict) else want
            if w is not None:
                got = "pass" if v["pass"] else "fail"
                out.append(_criterion(f"admissibility p={_pkey(v['p'])}", w, got, got == w))
        if isinstance(want, dict):
            missing = sorted(set(want) - {_pkey(v["p"]) for v in adm})
            for k in missing:
                out.append(_criterion(f"admissibility p={k}", want[k], None, False))
    if "min_certified_eps" in crit:
        passing = [v for v in adm if v["pass"]]
        eps = min((v["epsilon"] for v in passing), default=None)
        out.append(_criterion("min_certified_eps", crit["min_certified_eps"], eps,
                              eps is not None and eps >= crit["min_certified_eps"]))
    if "admissibility_failure" in crit:
        want = crit["admissibility_failure"]
        conds = sorted({f.get("condition") for v in adm if not v["pass"] for f in v["failures"]})
        out.append(_criterion("admissibility_failure", want, conds, want in conds))
    if "max_final_error" in crit:
        finals = [d["errors"][-1] for d in decay]
        out.append(_criterion("max_final_error", crit["max_final_error"], finals,
                              bool(finals) and all(e < crit["max_final_error"] for e in finals)))
    if crit.get("decaying"):
        cls = [d["classification"] for d in decay]
        out.append(_criterion("decaying", True, cls, bool(cls) and all(c == "decaying" for c in cls)))
    if crit.get("strictly_decreasing"):
        mono = [all(b < a for a, b in zip(d["errors"], d["errors"][1:])) for d in decay]
        out.append(_criterion("strictly_decreasing", True, mono, bool(mono) and all(mono)))
    if "error_floor" in crit:
        lows = [min(d["errors"]) for d in decay]
        out.append(_criterion("error_floor", crit["error_floor"], lows,
                              bool(lows) and all(e >= crit["error_floor"] for e in lows)))
    verdict = body.get("density_verdict")
    if "verdict" in crit:
        got = verdict["outcome"] if verdict else None
        out.append(_criterion("verdict", crit["verdict"], got, got == crit["verdict"]))
    if "witness_max_pairing" in crit:
        got = verdict.get("max_pairing") if verdict else None
        out.append(_criterion("witness_max_pairing", crit["witness_max_pairing"], got,
                              got is not None and got < crit["witness_max_pairing"]))
    if "witness_min_separation" in crit:
        got = verdict.get("separating_value") if verdict else None
        out.append(_criterion("witness_min_separation", crit["witness_min_separation"], got,
                              got is not None and got > crit["witness_min_separation"]))
    if "closure_consistent" in crit:
        cc = body.get("closure_comparison")
        got = cc["consistent"] if cc else None
        out.append(_criterion("closure_consistent", crit["closure_consistent"], got, got == crit["closure_consistent"]))
    if crit.get("analytic_checks_pass"):
        checks = body.get("analytic_checks", [])
        fails = [c["check_name"] for c in checks if not c["pass"]]
        out.append(_criterion("analytic_checks_pass", True, fails, bool(checks) and not fails))
    return out


def _strict(v):
    """Replace non-finite floats by the strings ``inf``, ``-inf`` and ``nan`` (strict JSON)."""
    if isinstance(v, dict):
        return {k: _strict(u) for k, u in v.items()}
    if isinstance(v, list):
        return [_strict(u) for u in v]
    if isinstance(v, float) and not math.isfinite(v):
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return v


def _pkey(p) -> str:
    return "inf" if p == math.inf else f"{float(p):g}"


# ---------------------------------------------------------------- driver


def run_config(cfg: ExperimentConfig) -> RunReport:
    """Run every configured stage in order and evaluate the pass criteria.

    Raises :class:`ConfigError` for problems only detectable while building
    objects, and :class:`NumericalFailure` when a stage aborts numerically.
    """
    timing = {"started_at": datetime.now(timezone.utc).isoformat(), "stages": {}}
    body = {"schema_version": 1, "experiment": cfg.experiment, "seed": cfg.seed, "config": cfg.raw}
    np.random.seed(cfg.seed)

    def stage(name, fn):
        t0 = time.perf_counter()
        try:
            return fn()
        except ConfigError:
            raise
        except FamilyError as exc:
            raise ConfigError("family", str(exc)) from exc
        except NUMERICAL_ERRORS as exc:
            raise NumericalFailure(f"{name}: {type(exc).__name__}: {exc}") from exc
        finally:
            timing["stages"][name] = time.perf_counter() - t0

    space = stage("space", lambda: build_space(cfg))
    f0 = stage("weight", lambda: build_weight(cfg))
    phi = stage("phi", lambda: build_phi(cfg))
    if space is not None:
        body["space"] = space.describe() if hasattr(space, "describe") else None
    if cfg.admissibility["check"] != "none":
        body["admissibility"] = stage("admissibility", lambda: _admissibility(cfg, space, f0, phi))
    if cfg.family is not None:
        body["decay"] = stage("projections", lambda: _decay(cfg, space, f0, phi))
    if cfg.witness.get("enabled"):
        w = cfg.witness
        verdict = stage("verdict", lambda: annihilator_witness(space, f0, phi, int(w.get("probe_degree", 12)),
                                                               w.get("sizes")))
        body["density_verdict"] = verdict.to_dict()
    if cfg.closure_compare is not None:
        c = cfg.closure_compare
        hw = float(c.get("half_width", 4.0))
        target = ScalarField.parse(c["target"], n=space.n, name=c["target"])
        cc = stage("closure_compare", lambda: compare_closures(
            target, phi, f0, space, c["sizes"], [default_frequency_grid(s, hw) for s in c["sizes"]],
            include_pullback=bool(c.get("include_pullback", True))))
        body["closure_comparison"] = {"target": c["target"], **cc.to_dict()}
    if cfg.analytic_checks:
        body["analytic_checks"] = stage("analytic_checks", lambda: _analytic(cfg, f0, phi, space))
    body["criteria"] = evaluate_criteria(cfg.criteria, body)
    body["passed"] = all(c["pass"] for c in body["criteria"])
    timing["finished_at"] = datetime.now(timezone.utc).isoformat()
    return RunReport(_strict(_jsonable(body)), timing)


def plot_tables(report: RunReport) -> dict:
    """``name -> [(size, error), ...]`` for every error sequence in the report, in stable order."""
    tables = {}
    for i, d in enumerate(report.body.get("decay", [])):
        tables[f"decay_{i:02d}_{d['family']}_{_slug(d['target'])}"] = list(zip(d["sizes"], d["errors"]))
    cc = report.body.get("closure_comparison")
    if cc:
        tables["closure_monomial"] = list(zip(cc["sizes"], cc["errors_monomial"]))
        tables["closure_exponential"] = list(zip(cc["sizes"], cc["errors_exponential"]))
    return tables


def emit_plotdata(report: RunReport, path) -> list:
    """Write one ``(size, error)`` CSV per error table into ``path``; return the files written."""
    tables = plot_tables(report)
    if not tables:
        log.warning("report has no decay tables; no plot data written")
        return []
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    written = []
    for name, rows in tables.items():
        f = path / f"{name}.csv"
        with open(f, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["size", "error"])
            for s, e in rows:
                w.writerow([s, repr(float(e))])
        written.append(f)
    return written


def write_outputs(report: RunReport, out_dir) -> dict:
    """``report.json`` (deterministic), ``timing.json`` (wall clock) and ``tables/*.csv``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json() + "\n")
    (out / "timing.json").write_text(json.dumps(report.timing, sort_keys=True, indent=2) + "\n")
    tables = emit_plotdata(report, out / "tables")
    return {"report": out / "report.json", "timing": out / "timing.json", "tables": tables}
