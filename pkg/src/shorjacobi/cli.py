"""Command-line front end.

Exit codes: 0 success/verified, 1 domain error, 2 verification mismatch,
3 resource cap (including an exhausted attempt budget).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from pathlib import Path
from typing import Sequence

from . import census, shor
from .errors import DomainError, ShorJacobiError
from .ntcore import factorize, jacobi, multiplicative_order

EXIT_OK, EXIT_DOMAIN, EXIT_MISMATCH, EXIT_RESOURCE = 0, 1, 2, 3

GLOBAL_DEFAULTS = {
    "format": "text",
    "seed": 0,
    "workers": None,  # resolved to the CPU count
    "max_attempts": shor.DEFAULT_MAX_ATTEMPTS,
    "strategy": "jacobi",
    "trials": 1000,
    "oracle": "classical",
}
_INT_KEYS = {"seed", "workers", "max_attempts", "trials"}
_CHOICES = {
    "format": ("json", "csv", "text"),
    "strategy": tuple(s.value for s in shor.SelectionStrategy),
    "oracle": ("classical", "measurement"),
}


def load_config(path: Path) -> dict:
    """Parse a ``key = value`` defaults file; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in GLOBAL_DEFAULTS:
            raise DomainError(f"{path}:{lineno}: unrecognised config line {raw!r}")
        value = value.strip()
        if key in _CHOICES and value not in _CHOICES[key]:
            raise DomainError(f"{path}:{lineno}: {key} must be one of {_CHOICES[key]}")
        values[key] = int(value) if key in _INT_KEYS else value
    return values


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be a 64-bit unsigned integer, got {text}")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _non_negative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


def _global_flags() -> argparse.ArgumentParser:
    # SUPPRESS lets the flags appear before or after the subcommand without
    # the subparser defaults clobbering the top-level values.
    flags = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    flags.add_argument("--format", choices=("json", "csv", "text"))
    flags.add_argument("--seed", type=_u64)
    flags.add_argument("--workers", type=_positive)
    flags.add_argument("--max-attempts", dest="max_attempts", type=_positive)
    flags.add_argument("--config", type=Path, help="key=value file supplying defaults")
    return flags


def build_parser() -> argparse.ArgumentParser:
    flags = _global_flags()
    parser = argparse.ArgumentParser(
        prog="shorjacobi",
        description="Jacobi-symbol base selection for Shor factoring: census and classical driver.",
        parents=[flags],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("jacobi", parents=[flags], help="Jacobi symbol (a/n)")
    p.add_argument("a", type=int)
    p.add_argument("n", type=int)

    p = sub.add_parser("order", parents=[flags], help="multiplicative order of y mod n")
    p.add_argument("y", type=int)
    p.add_argument("n", type=int)

    p = sub.add_parser("census", parents=[flags], help="exhaustive census of Z_pq*")
    p.add_argument("p", type=int)
    p.add_argument("q", type=int)

    p = sub.add_parser("sweep", parents=[flags], help="census over all prime pairs up to bounds")
    p.add_argument("p_max", type=int)
    p.add_argument("q_max", type=int)

    p = sub.add_parser("factor", parents=[flags], help="run the classical Shor loop")
    p.add_argument("n", type=int)
    p.add_argument("--strategy", choices=[s.value for s in shor.SelectionStrategy], default=argparse.SUPPRESS)
    p.add_argument("--oracle", choices=("classical", "measurement"), default=argparse.SUPPRESS)

    p = sub.add_parser("compare", parents=[flags], help="Monte Carlo comparison of strategies")
    p.add_argument("n", type=int, nargs="*")
    p.add_argument("--trials", type=_non_negative, default=argparse.SUPPRESS)
    return parser


def _emit_rows(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _sign(value: int) -> str:
    return f"{value:+d}" if value else "0"


def _cmd_jacobi(args) -> tuple[str, int]:
    value = jacobi(args.a, args.n)
    if args.format == "json":
        return json.dumps({"a": args.a, "n": args.n, "jacobi": value}), EXIT_OK
    if args.format == "csv":
        return _emit_rows(("a", "n", "jacobi"), [(args.a, args.n, value)]), EXIT_OK
    return _sign(value), EXIT_OK


def _cmd_order(args) -> tuple[str, int]:
    if args.n < 2:
        raise DomainError(f"modulus must be >= 2, got {args.n}")
    # Any multiple of the group exponent works; phi(n) is the easy one.
    phi = 1
    for p, e in factorize(args.n).items():
        phi *= (p - 1) * p ** (e - 1)
    bound = factorize(phi) if phi > 1 else {}
    value = multiplicative_order(args.y, args.n, bound)
    if args.format == "json":
        return json.dumps({"y": args.y, "n": args.n, "order": value}), EXIT_OK
    if args.format == "csv":
        return _emit_rows(("y", "n", "order"), [(args.y, args.n, value)]), EXIT_OK
    return str(value), EXIT_OK


def _cmd_census(args) -> tuple[str, int]:
    report = census.run_census(census.build_profile(args.p, args.q), workers=args.workers)
    for msg in report.mismatches():
        print(f"mismatch: {msg}", file=sys.stderr)
    code = EXIT_OK if report.verified else EXIT_MISMATCH
    if args.format == "json":
        return report.to_json(), code
    if args.format == "csv":
        return census.reports_to_csv([report]), code
    return report.to_text(), code


def _cmd_sweep(args) -> tuple[str, int]:
    reports = census.sweep(args.p_max, args.q_max, workers=args.workers)
    violations = census.sweep_violations(reports)
    for msg in violations:
        print(f"violation: {msg}", file=sys.stderr)
    code = EXIT_MISMATCH if violations else EXIT_OK
    if args.format == "json":
        doc = {"pairs": len(reports), "violations": violations, "reports": [r.to_dict() for r in reports]}
        return json.dumps(doc, indent=2), code
    if args.format == "csv":
        return census.reports_to_csv(reports), code
    lines = [f"{'n':>8} {'p':>5} {'q':>5} {'m1':>3} {'m2':>3} {'fail(unif)':>12} {'succ(jacobi)':>13} ok"]
    for r in reports:
        pr = r.profile
        lines.append(
            f"{pr.n:>8} {pr.p:>5} {pr.q:>5} {pr.m1:>3} {pr.m2:>3}"
            f" {str(r.failure_prob_uniform):>12} {str(r.success_prob_filtered):>13} {'yes' if r.verified else 'NO'}"
        )
    lines.append(f"{len(reports)} pairs, {len(violations)} violations")
    return "\n".join(lines), code


def _cmd_factor(args) -> tuple[str, int]:
    strategy = shor.SelectionStrategy(args.strategy)
    oracle = None
    if args.oracle == "measurement":
        # Separate stream so the base sequence matches the classical oracle's.
        oracle = shor.MeasurementOrderOracle(args.n, random.Random(args.seed ^ 0x5EED))
    run = shor.factor(args.n, strategy, args.seed, args.max_attempts, oracle)
    code = EXIT_OK if run.succeeded else EXIT_RESOURCE
    if args.format == "json":
        return run.to_jsonl().rstrip("\n"), code
    if args.format == "csv":
        header = ("attempt", "y", "jacobi", "outcome", "order", "factor")
        rows = [[rec.get(k, "") for k in header] for rec in run.log_records()]
        return _emit_rows(header, rows), code
    lines = [
        f"{rec['attempt']:>3}: y={rec['y']} (y/n)={_sign(rec['jacobi'])} -> {rec['outcome']}"
        + (f", r={rec['order']}" if "order" in rec else "")
        for rec in run.log_records()
    ]
    if run.succeeded:
        p, q = run.factors
        lines.append(f"{args.n} = {p} * {q} after {run.attempts_used} attempt(s)")
    else:
        lines.append(f"no factor of {args.n} after {run.attempts_used} attempts")
    return "\n".join(lines), code


def _cmd_compare(args) -> tuple[str, int]:
    stats = []
    if args.trials:
        for n in args.n:
            for strategy in shor.SelectionStrategy:
                stats.append(shor.compare_strategies(n, strategy, args.trials, args.seed, args.max_attempts))
    if args.format == "json":
        return json.dumps([s.to_dict() for s in stats], indent=2), EXIT_OK
    if args.format == "csv":
        header = ("n", "strategy", "trials", "mean_attempts", "success_rate", "predicted_success", "z_score")
        rows = [
            (s.n, s.strategy.value, s.trials, s.mean_attempts, s.success_rate, str(s.predicted_success), s.z_score)
            for s in stats
        ]
        return _emit_rows(header, rows), EXIT_OK
    lines = [f"{'n':>10} {'strategy':>8} {'trials':>8} {'mean att.':>10} {'succ/att':>9} {'predicted':>9} {'z':>7}"]
    for s in stats:
        lines.append(
            f"{s.n:>10} {s.strategy.value:>8} {s.trials:>8} {s.mean_attempts:>10.4f}"
            f" {s.success_rate:>9.4f} {str(s.predicted_success):>9} {s.z_score:>7.2f}"
        )
    return "\n".join(lines), EXIT_OK


COMMANDS = {
    "jacobi": _cmd_jacobi,
    "order": _cmd_order,
    "census": _cmd_census,
    "sweep": _cmd_sweep,
    "factor": _cmd_factor,
    "compare": _cmd_compare,
}


def resolve_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    """Parse argv; explicit flags win over the config file, which wins over defaults."""
    args = build_parser().parse_args(argv)
    config = load_config(args.config) if getattr(args, "config", None) else {}
    for key, default in GLOBAL_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, config.get(key, default))
    if args.workers is None:
        args.workers = census.default_workers()
    return args


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = resolve_args(argv)
        out, code = COMMANDS[args.command](args)
    except ShorJacobiError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    if out:
        print(out.rstrip("\n"))
    return code


if __name__ == "__main__":
    sys.exit(main())
