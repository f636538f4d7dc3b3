"""Command-line front end.

Subcommands: ``chain``, ``zeno``, ``antizeno``, ``sweep`` and ``selftest``.
Results go to ``--output`` or stdout.

Exit status: 0 on success, 1 when an oracle comparison or self-test check
fails, 2 for bad flags or config files, 3 when the Hilbert-dimension cap is
exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import __version__
from .errors import ConfigError, DimensionCapExceeded, ToleranceViolation
from .experiments import (
    AntiZenoConfig,
    SweepConfig,
    ZenoConfig,
    anti_zeno_expectation,
    figure3_sweep,
    zeno_simulate,
)
from .numerics import DEFAULT_TOLERANCES
from .report import build_run_report, check_report, fmt, load_chain_config

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_DIM_CAP = 3


def _emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def _json(data) -> str:
    return json.dumps(data, indent=2, allow_nan=False) + "\n"


def cmd_chain(args) -> int:
    chain = load_chain_config(args.config)
    report = build_run_report(
        chain, oracle=args.oracle, venn=args.venn, reproducible=args.reproducible
    )
    _emit(report.to_json() if args.format == "json" else report.to_csv(), args.output)
    if args.oracle:
        worst = check_report(report)
        if worst is not None:
            raise ToleranceViolation(worst.quantity, worst.abs_diff, DEFAULT_TOLERANCES.entropy_tol)
    return EXIT_OK


def cmd_zeno(args) -> int:
    rows = []
    for n in args.n:
        res = zeno_simulate(ZenoConfig(n, args.p))
        rows.append((n, res.q_simulated, res.q_closed_form, res.abs_diff))
    header = ("n", "q_simulated", "q_closed_form", "abs_diff")
    if args.format == "json":
        text = _json([dict(zip(header, row)) for row in rows])
    else:
        text = _csv(header, rows)
    _emit(text, args.output)
    return EXIT_OK


def cmd_antizeno(args) -> int:
    cfg = AntiZenoConfig(n=args.n, p=args.p, trials=args.trials, seed=args.seed)
    est = anti_zeno_expectation(cfg, threads=args.threads)
    data = est.as_dict()
    if not math.isfinite(data["std_error"]):
        data["std_error"] = data["variance"] = data["sigmas"] = None
    if args.format == "csv":
        _emit(_csv(tuple(data), [tuple(data.values())]), args.output)
    else:
        _emit(_json(data), args.output)
    return EXIT_OK


def cmd_sweep(args) -> int:
    table = figure3_sweep(SweepConfig(theta=args.theta, steps=args.steps, grid=args.grid))
    rows = [[float(x) for x in row] for row in table.rows]
    if args.format == "json":
        _emit(_json({"headers": list(table.headers), "rows": rows}), args.output)
    else:
        _emit(_csv(table.headers, rows), args.output)
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .validation import run_all

    results = run_all(chain_count=args.chains, quick=args.quick)
    lines = [r.line() for r in results]
    _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK_FAILED


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _probability(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"expected a probability in [0, 1], got {text}")
    return value


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chainwatch",
        description="Consecutive projective measurements: entropies, Zeno and anti-Zeno effects.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def output_flags(p, formats, default):
        p.add_argument("--output", "-o", help="output file (default: stdout)")
        p.add_argument("--format", choices=formats, default=default)

    p = sub.add_parser("chain", help="analyse a measurement chain from a JSON config")
    p.add_argument("config", help="chain config file (JSON)")
    p.add_argument("--oracle", action=argparse.BooleanOptionalAction, default=True,
                   help="cross-check closed forms against the quantum state (default: on)")
    p.add_argument("--venn", action=argparse.BooleanOptionalAction, default=False,
                   help="include Venn regions over Q and every detector")
    p.add_argument("--reproducible", action="store_true", help="omit the timestamp")
    output_flags(p, ("json", "csv"), "json")
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("zeno", help="Zeno effect: n detectors at pi/4n relative angles")
    p.add_argument("--n", type=_positive_int, nargs="+", default=[1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024])
    p.add_argument("--p", type=_probability, default=1.0)
    output_flags(p, ("csv", "json"), "csv")
    p.set_defaults(func=cmd_zeno)

    p = sub.add_parser("antizeno", help="anti-Zeno effect: Monte Carlo over random angles")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--p", type=_probability, default=1.0)
    p.add_argument("--trials", type=_positive_int, default=100_000)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--threads", type=_positive_int, default=1)
    output_flags(p, ("json", "csv"), "json")
    p.set_defaults(func=cmd_antizeno)

    p = sub.add_parser("sweep", help="qubit detector entropies over a grid of preparations")
    p.add_argument("--theta", type=float, default=math.pi / 8, help="relative angle per step (radians)")
    p.add_argument("--steps", type=int, default=2)
    p.add_argument("--grid", type=int, default=101)
    output_flags(p, ("csv", "json"), "csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("selftest", help="run the acceptance battery")
    p.add_argument("--chains", type=_positive_int, default=200)
    p.add_argument("--quick", action="store_true", help="smaller Zeno and anti-Zeno runs")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "sweep" and (args.grid < 2 or args.steps < 0):
        parser.error("sweep needs --grid >= 2 and --steps >= 0")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"chainwatch: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DimensionCapExceeded as exc:
        print(f"chainwatch: {exc}", file=sys.stderr)
        return EXIT_DIM_CAP
    except ToleranceViolation as exc:
        print(f"chainwatch: tolerance violation: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
