"""Command-line entry point: ``setsim run --scenario FILE --out DIR [...]``.

Exit status is 0 on success, 2 for invalid input and 3 for runtime failures.
Set ``SETSIM_LOG_LEVEL`` (e.g. ``INFO``) for progress messages on stderr.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import Algorithm, ScenarioConfig, apply_overrides, load_scenario_file
from .errors import ParseError, SetsimError, ValidationError
from .report import SweepVariable, emit_csv, sweep

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_RUNTIME = 3

log = logging.getLogger("setsim")


def parse_values(text):
    """``a,b,c`` or an inclusive ``start:stop:step`` range."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ParseError(f"range {text!r} must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ParseError("range step must be > 0")
        out, k = [], 0
        while start + k * step <= stop + 1e-9 * abs(step):
            out.append(round(start + k * step, 12))
            k += 1
        return out
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ParseError(f"sweep values {text!r} are not numbers") from None


def parse_sweep(text, cfg: ScenarioConfig):
    if text is None:
        return SweepVariable.NUM_UES, [cfg.num_ues]
    if "=" not in text:
        raise ParseError(f"--sweep expects VAR=v1,v2,..., got {text!r}")
    name, raw = text.split("=", 1)
    try:
        variable = SweepVariable.parse(name)
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    values = parse_values(raw)
    if not values:
        raise ParseError("--sweep needs at least one value")
    if variable is SweepVariable.NUM_UES:
        if any(v != int(v) or v < 1 for v in values):
            raise ValidationError("num_ues", "sweep values must be positive integers")
        values = [int(v) for v in values]
    return variable, sorted(values)


def parse_algorithms(text):
    out = []
    for name in text.split(","):
        name = name.strip()
        if not name:
            continue
        match = [a for a in Algorithm if a.value.lower() == name.lower()]
        if not match:
            raise ParseError(f"unknown algorithm {name!r}; use set and/or drx")
        if match[0] not in out:
            out.append(match[0])
    if not out:
        raise ParseError("--algo needs at least one algorithm")
    return out


def build_parser():
    parser = argparse.ArgumentParser(prog="setsim", description="Sleep-mode LTE downlink simulator.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run a scenario or a sweep and write CSV results")
    p.add_argument("--scenario", metavar="FILE", help="YAML scenario file (defaults apply when omitted)")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override one scenario field; repeatable")
    p.add_argument("--sweep", metavar="VAR=VALUES",
                   help="num_ues, arrival_rate or theta, with v1,v2,... or start:stop:step")
    p.add_argument("--algo", default="set,drx", help="comma-separated algorithms (default: set,drx)")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.add_argument("--replicates", type=int, default=1, help="seeds averaged per cell")
    p.add_argument("--seed", type=int, help="base RNG seed (overrides the scenario)")
    p.add_argument("--out", required=True, metavar="DIR", help="output directory")
    return parser


def _configure_logging():
    level = os.environ.get("SETSIM_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(message)s")


def run_command(args):
    cfg = load_scenario_file(args.scenario) if args.scenario else ScenarioConfig()
    cfg = apply_overrides(cfg, args.overrides)
    if args.seed is not None:
        cfg = cfg.replace(rng_seed=args.seed)
    variable, values = parse_sweep(args.sweep, cfg)
    algorithms = parse_algorithms(args.algo)
    if args.jobs < 1:
        raise ValidationError("jobs", "must be >= 1")
    if args.replicates < 1:
        raise ValidationError("replicates", "must be >= 1")
    reports = sweep(cfg, variable, values, algorithms, replicates=args.replicates, jobs=args.jobs)
    for path in emit_csv(reports, args.out, variable):
        log.info("wrote %s", path)


def main(argv=None):
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        run_command(args)
    except (ParseError, ValidationError) as exc:
        print(f"setsim: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except FileNotFoundError as exc:
        print(f"setsim: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (SetsimError, OSError) as exc:
        print(f"setsim: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
