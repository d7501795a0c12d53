"""Command-line entry point: ``qlint analyze|test|sweep|fit``."""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import boolean_core as bc
from .harness import ExperimentConfig, InfeasibleConfig, fit_exponent, read_sweep_csv, run_sweep
from .testers import blr_test, dj_repetition_test, grover_test, parse_policy

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2

# default c in t = ceil(c / eps) for BLR; a 2000-trial n=12 sweep calibrates ~0.35
BLR_CONSTANT = 0.5


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qlint", description="Quantum and classical affinity testing lab.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="spectrum, nonlinearity and distance of a truth table")
    a.add_argument("table")
    a.add_argument("--spectrum-csv", help="write omega,walsh,normalized rows here")

    t = sub.add_parser("test", help="run one tester on a truth table")
    t.add_argument("table")
    t.add_argument("--alg", choices=("blr", "dj", "grover"), required=True)
    t.add_argument("--eps", type=float, required=True)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--t", type=int, help="rounds for blr/dj (default derived from --eps)")
    t.add_argument("--policy", default="paper_epsilon",
                   help="grover iterations: paper_epsilon, exact_theta or fixed:<t>")

    s = sub.add_parser("sweep", help="run an epsilon sweep from a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--out", help="output prefix for .csv and .json (default: config stem)")
    s.add_argument("--workers", type=int, help="worker processes (default QLINT_THREADS or cores)")

    f = sub.add_parser("fit", help="fit the scaling exponent of a sweep CSV")
    f.add_argument("csv")
    return p


def default_rounds(alg: str, eps: float) -> int:
    if alg == "blr":
        return max(1, math.ceil(BLR_CONSTANT / eps))
    # (1 - 2 eps)^t <= 1/3
    return max(1, math.ceil(math.log(3.0) / -math.log1p(-2.0 * eps)))


def cmd_analyze(args) -> int:
    f = bc.read_table(args.table)
    spec = f.spectrum
    peak = spec.peak()
    nl = bc.nonlinearity(f)
    print(f"n: {f.n}")
    print(f"weight: {f.weight}")
    print(f"degree: {bc.truth_table_to_anf(f).degree}")
    print(f"nonlinearity: {nl}")
    print(f"distance_to_affine: {nl / (1 << f.n)!r}")
    print(f"spectral_peak: omega={peak} walsh={int(spec.values[peak])}")
    print("spectrum: " + " ".join(str(v) for v in spec.values.tolist()))
    if args.spectrum_csv:
        Path(args.spectrum_csv).write_text(spec.to_csv())
    return EXIT_OK


def cmd_test(args) -> int:
    if not 0.0 < args.eps < 0.5:
        raise UsageError("--eps must lie in (0, 1/2)")
    f = bc.read_table(args.table)
    if args.alg == "grover":
        report = grover_test(f, parse_policy(args.policy, args.eps), args.seed)
    else:
        rounds = args.t if args.t is not None else default_rounds(args.alg, args.eps)
        run = blr_test if args.alg == "blr" else dj_repetition_test
        report = run(f, rounds, args.seed)
    print(report.to_json())
    return EXIT_OK


def cmd_sweep(args) -> int:
    path = Path(args.config)
    config = ExperimentConfig.from_json(path.read_text())
    result = run_sweep(config, workers=args.workers)
    prefix = Path(args.out) if args.out else Path(path.stem)
    prefix.with_suffix(".csv").write_text(result.to_csv())
    prefix.with_suffix(".json").write_text(result.to_json())
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(json.dumps({"slope": result.fitted_exponent, "residual": result.fit_residual}))
    return EXIT_OK


def cmd_fit(args) -> int:
    points = read_sweep_csv(Path(args.csv).read_text())
    slope, residual = fit_exponent(points)
    print(json.dumps({"slope": slope, "residual": residual, "points": [list(p) for p in points]}))
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "test": cmd_test, "sweep": cmd_sweep, "fit": cmd_fit}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except InfeasibleConfig as exc:
        print(f"infeasible configuration: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (UsageError, ValueError, OSError, KeyError, TypeError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
