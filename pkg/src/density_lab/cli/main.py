"""``density-lab`` entry point.

Exit status: 0 when every pass criterion holds, 1 when a criterion fails,
2 on a configuration/validation error, 3 on an internal numerical failure.
``DENSITY_LAB_THREADS`` caps the BLAS/OpenMP thread pools; it takes effect
when set before the numerical libraries are first imported.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

EXIT_OK, EXIT_CRITERIA, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2, 3
THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS")


def apply_thread_cap(env=os.environ) -> int | None:
    """Copy ``DENSITY_LAB_THREADS`` into the usual thread-pool variables; return the cap."""
    raw = env.get("DENSITY_LAB_THREADS")
    if not raw:
        return None
    try:
        cap = int(raw)
    except ValueError:
        raise SystemExit(f"DENSITY_LAB_THREADS must be a positive integer, got {raw!r}")
    if cap < 1:
        raise SystemExit(f"DENSITY_LAB_THREADS must be a positive integer, got {raw!r}")
    for var in THREAD_VARS:
        env[var] = str(cap)
    return cap


def _parse_param(text: str):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"--param expects k=v, got {text!r}")
    key, value = text.split("=", 1)
    try:
        return key.strip(), json.loads(value)
    except json.JSONDecodeError:
        return key.strip(), value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="density-lab", description="Numerical density experiments.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("config", help="path to a JSON config")
    run.add_argument("--out", help="output directory (overrides output.dir)")
    pre = sub.add_parser("preset", help="run a preset experiment")
    pre.add_argument("name")
    pre.add_argument("--param", action="append", default=[], type=_parse_param, metavar="K=V",
                     help="override a preset parameter; V is parsed as JSON when possible")
    pre.add_argument("--out", help="output directory (default: density_lab_out/<name>)")
    pre.add_argument("--print-config", action="store_true", help="print the config and exit")
    sub.add_parser("list-presets", help="list preset experiments and their parameters")
    chk = sub.add_parser("check", help="validate a config without running it")
    chk.add_argument("config")
    return parser


def _fail(code: int, payload: dict) -> int:
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return code


def _execute(cfg, out_dir) -> int:
    from .config import ConfigError
    from .runner import NumericalFailure, run_config, write_outputs

    try:
        report = run_config(cfg)
    except ConfigError as exc:
        return _fail(EXIT_VALIDATION, exc.to_dict())
    except NumericalFailure as exc:
        return _fail(EXIT_NUMERICAL, {"error": "numerical", "message": str(exc)})
    files = write_outputs(report, out_dir)
    for c in report.body["criteria"]:
        print(f"{'PASS' if c['pass'] else 'FAIL'}  {c['criterion']}: observed {c['observed']!r}, "
              f"expected {c['expected']!r}")
    print(f"report: {files['report']}")
    return EXIT_OK if report.passed else EXIT_CRITERIA


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    apply_thread_cap()
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    from .config import ConfigError, load, validate
    from .presets import PRESETS, preset_config

    if args.command == "list-presets":
        for name, p in PRESETS.items():
            params = " ".join(f"{k}={json.dumps(v)}" for k, v in p.defaults.items())
            print(f"{name:30s} {p.description}\n{'':30s} {params}")
        return EXIT_OK
    try:
        if args.command == "preset":
            raw = preset_config(args.name, dict(args.param))
            if args.print_config:
                print(json.dumps(raw, indent=2))
                return EXIT_OK
            cfg = validate(raw)
            out = args.out or cfg.output_dir or os.path.join("density_lab_out", args.name)
        else:
            cfg = load(args.config)
            if args.command == "check":
                print(f"{args.config}: valid ({cfg.experiment})")
                return EXIT_OK
            out = args.out or cfg.output_dir or os.path.join("density_lab_out", cfg.experiment)
    except ConfigError as exc:
        return _fail(EXIT_VALIDATION, exc.to_dict())
    return _execute(cfg, out)


if __name__ == "__main__":
    sys.exit(main())
