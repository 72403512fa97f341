"""Command-line entry point ``betaescape``.

Exit codes: 0 on success, 1 on usage or input errors, 2 when a result
cannot be certified at the requested precision.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import mpmath

from . import constants
from .beta_core import BetaSpecError, make_beta, univoque_test
from .markov_escape import (
    AnalysisConfig,
    PerronConvergenceError,
    UndeterminedError,
    decide_escape,
)
from .sft_tools import Block, build_transfer, count_words, sft_entropy
from .survivor import escape_rate_empirical, survivor_iterate

EXIT_OK, EXIT_USAGE, EXIT_UNDETERMINED = 0, 1, 2

CSV_HEADER = "beta,E,dim,method,bracket_lo,bracket_hi,i_a,i_b,depth,precision_bits"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def fmt20(x) -> str:
    """Decimal with 20 significant digits, or empty for ``None``."""
    if x is None:
        return ""
    with mpmath.mp.workprec(128):
        v = mpmath.mpf(x.numerator) / x.denominator if isinstance(x, Fraction) else mpmath.mpf(x)
        if v == 0:
            return "0"
        return mpmath.nstr(v, 20, strip_zeros=False, min_fixed=-4, max_fixed=2)


def _default_precision() -> int:
    env = os.environ.get("BETAESCAPE_PRECISION")
    if env is None:
        return 128
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"BETAESCAPE_PRECISION must be an integer, got {env!r}") from None


def _global_flags(parser: argparse.ArgumentParser) -> None:
    # SUPPRESS lets the flags appear before or after the subcommand
    g = parser.add_argument_group("global options")
    g.add_argument("--precision", type=int, default=argparse.SUPPRESS,
                   help="working precision in bits (default 128, env BETAESCAPE_PRECISION)")
    g.add_argument("--depth", type=int, default=argparse.SUPPRESS,
                   help="survivor / bracket depth (default 40)")
    g.add_argument("--max-orbit", type=int, default=argparse.SUPPRESS,
                   help="endpoint orbit step limit (default 10000)")
    g.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                   help="emit JSON instead of text")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="betaescape",
                     description="Escape rates of the greedy beta-transformation through its switch hole.")
    _global_flags(parser)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("analyze", help="escape rate and univoque dimension for one base")
    p.add_argument("beta", help="base descriptor, e.g. 1.9, golden, kl, 'poly:x^3-x^2-x-1 in (1,2)'")
    p.add_argument("--no-empirical", action="store_true", help="skip the survivor cross-check")
    _global_flags(p)

    p = sub.add_parser("sweep", help="tabulate E over an evenly spaced grid of bases")
    p.add_argument("--from", dest="lo", required=True, help="first base (decimal)")
    p.add_argument("--to", dest="hi", required=True, help="last base (decimal)")
    p.add_argument("--steps", type=int, required=True, help="number of grid points")
    p.add_argument("--out", help="CSV path (stdout when omitted)")
    p.add_argument("--svg", help="optional SVG path for the staircase plot")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    _global_flags(p)

    p = sub.add_parser("survivor", help="table of survivor and first-entry measures")
    p.add_argument("beta")
    p.add_argument("--out", help="CSV path (stdout when omitted)")
    p.add_argument("--method", choices=("pushforward", "preimage"), default="pushforward")
    p.add_argument("--max-intervals", type=int, default=2_000_000)
    p.add_argument("--merge-tolerance", type=float, default=None)
    _global_flags(p)

    p = sub.add_parser("sft", help="entropy of the lexicographic subshift of a block")
    p.add_argument("block", help="binary word starting with 1, e.g. 110")
    p.add_argument("--count-up-to", type=int, default=None, help="also count words of length 1..n")
    _global_flags(p)

    p = sub.add_parser("constants", help="print a named constant")
    p.add_argument("--name", required=True, help="golden, kl, tribonacci or multinacci:k")
    p.add_argument("--digits", type=int, default=20)
    _global_flags(p)

    p = sub.add_parser("univoque", help="finite-depth check that a point has a unique expansion")
    p.add_argument("x", help="point, as a decimal or ratio")
    p.add_argument("beta")
    p.add_argument("--steps", type=int, default=None, help="orbit length (default: --depth)")
    _global_flags(p)
    return parser


def _resolve(args) -> argparse.Namespace:
    if not hasattr(args, "precision"):
        args.precision = _default_precision()
    args.depth = getattr(args, "depth", 40)
    args.max_orbit = getattr(args, "max_orbit", 10_000)
    args.json = getattr(args, "json", False)
    if args.precision < 64:
        raise UsageError("--precision must be at least 64")
    if args.depth < 1:
        raise UsageError("--depth must be positive")
    if args.max_orbit < 1:
        raise UsageError("--max-orbit must be positive")
    return args


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def cmd_analyze(args) -> int:
    beta = make_beta(args.beta, args.precision)
    cfg = AnalysisConfig(depth=args.depth, max_orbit=args.max_orbit,
                         empirical=not args.no_empirical)
    rep = decide_escape(beta, cfg)
    d = rep.to_dict()
    d["method"] = rep.method
    if args.json:
        print(json.dumps(d, indent=2))
        return EXIT_OK
    rows = [("beta", d["beta"]), ("method", rep.method), ("E", fmt20(rep.E)),
            ("dim", fmt20(rep.dim)), ("e", fmt20(rep.e))]
    if rep.rho is not None:
        rows.append(("rho", fmt20(rep.rho)))
    if rep.i_a is not None:
        rows += [("i_a", str(rep.i_a)), ("i_b", str(rep.i_b))]
    if rep.partition_size is not None:
        rows.append(("cells", str(rep.partition_size)))
    if rep.bracket is not None:
        rows += [("bracket_lo", fmt20(rep.bracket.lo)), ("bracket_hi", fmt20(rep.bracket.hi))]
    if rep.empirical is not None:
        rows.append(("E_empirical", fmt20(rep.empirical["E_hat"])))
    width = max(len(k) for k, _ in rows)
    for k, v in rows:
        print(f"{k:<{width}}  {v}")
    return EXIT_OK


def sweep_grid(lo: Fraction, hi: Fraction, steps: int) -> list[Fraction]:
    return [lo + (hi - lo) * i / (steps - 1) for i in range(steps)]


def sweep_row(beta_exact: Fraction, depth: int, precision: int, max_orbit: int) -> dict:
    """One staircase sample; never raises, failures become ``method = failed``."""
    row = {"beta": beta_exact, "E": None, "dim": None, "method": "failed", "bracket_lo": None,
           "bracket_hi": None, "i_a": None, "i_b": None, "depth": depth,
           "precision_bits": precision}
    try:
        beta = make_beta(beta_exact, precision)
        cfg = AnalysisConfig(depth=depth, max_orbit=max_orbit, empirical=False,
                             on_undetermined="bracket")
        rep = decide_escape(beta, cfg)
    except (UndeterminedError, PerronConvergenceError, ArithmeticError, RuntimeError, ValueError):
        return row
    row.update(E=rep.E, dim=rep.dim, method=rep.method, i_a=rep.i_a, i_b=rep.i_b)
    if rep.bracket is not None:
        row.update(bracket_lo=rep.bracket.lo, bracket_hi=rep.bracket.hi)
    return row


def _row_csv(row: dict) -> str:
    cells = [fmt20(row["beta"]),
             fmt20(row["E"]), fmt20(row["dim"]), row["method"], fmt20(row["bracket_lo"]),
             fmt20(row["bracket_hi"]), "" if row["i_a"] is None else str(row["i_a"]),
             "" if row["i_b"] is None else str(row["i_b"]), str(row["depth"]),
             str(row["precision_bits"])]
    return ",".join(cells)


def render_svg(rows: list[dict], lo: float, hi: float, width: int = 800, height: int = 500) -> str:
    """Standalone SVG polyline of ``E`` against ``beta``."""
    pad = 50
    sx = (width - 2 * pad) / (hi - lo)
    sy = height - 2 * pad
    pts = []
    for r in rows:
        if r["E"] is None:
            continue
        x = pad + (float(r["beta"]) - lo) * sx
        y = height - pad - float(r["E"]) * sy
        pts.append(f"{x:.3f},{y:.3f}")
    return "\n".join([
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width // 2}" y="{height - 15}" text-anchor="middle" font-size="14">beta</text>',
        f'<text x="15" y="{height // 2}" font-size="14">E</text>',
        f'<text x="{pad}" y="{height - pad + 18}" text-anchor="middle" font-size="12">{lo:g}</text>',
        f'<text x="{width - pad}" y="{height - pad + 18}" text-anchor="middle" font-size="12">{hi:g}</text>',
        f'<text x="{pad - 8}" y="{height - pad}" text-anchor="end" font-size="12">0</text>',
        f'<text x="{pad - 8}" y="{pad + 4}" text-anchor="end" font-size="12">1</text>',
        f'<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{" ".join(pts)}"/>',
        "</svg>",
        "",
    ])


def _exact(text: str, flag: str) -> Fraction:
    try:
        return Fraction(text)
    except ValueError:
        raise UsageError(f"{flag} must be a decimal or ratio, got {text!r}") from None


def cmd_sweep(args) -> int:
    lo, hi = _exact(args.lo, "--from"), _exact(args.hi, "--to")
    if not (1 < lo < hi <= 2):
        raise UsageError("sweep needs 1 < from < to <= 2")
    if args.steps < 2:
        raise UsageError("--steps must be at least 2")
    if args.jobs < 1:
        raise UsageError("--jobs must be positive")
    grid = sweep_grid(lo, hi, args.steps)
    n = len(grid)
    params = ([args.depth] * n, [args.precision] * n, [args.max_orbit] * n)
    if args.jobs == 1:
        rows = list(map(sweep_row, grid, *params))
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(sweep_row, grid, *params))
    text = "\n".join([CSV_HEADER] + [_row_csv(r) for r in rows]) + "\n"
    _write(args.out, text)
    if args.svg:
        _write(args.svg, render_svg(rows, float(lo), float(hi)))
    failed = sum(r["method"] == "failed" for r in rows)
    if failed:
        print(f"{failed} of {n} rows failed", file=sys.stderr)
    return EXIT_OK


def cmd_survivor(args) -> int:
    beta = make_beta(args.beta, args.precision)
    table = survivor_iterate(beta, args.depth, max_intervals=args.max_intervals,
                             merge_tolerance=args.merge_tolerance, method=args.method)
    if args.json:
        fit = escape_rate_empirical(table) if args.depth >= 4 else None
        d = {
            "beta": fmt20(beta.value),
            "method": table.method,
            "truncated": table.truncated,
            "rows": [{"n": r.n, "measure_W": fmt20(r.measure_W),
                      "measure_Gamma": fmt20(r.measure_Gamma),
                      "interval_count": r.interval_count} for r in table.rows],
            "E_hat": None if fit is None else fit.E_hat,
        }
        _write(args.out, json.dumps(d, indent=2) + "\n")
    else:
        _write(args.out, table.to_csv())
    return EXIT_OK


def cmd_sft(args) -> int:
    block = Block(args.block)
    res = build_transfer(block)
    h = sft_entropy(block)
    d = {"block": str(block), "entropy": h, "rho": math.exp(h) if not res.empty else 0.0,
         "empty": res.empty}
    if args.count_up_to is not None:
        if args.count_up_to < 1:
            raise UsageError("--count-up-to must be positive")
        d["counts"] = [count_words(block, k) for k in range(1, args.count_up_to + 1)]
    if args.json:
        print(json.dumps(d))
    else:
        print(f"block    {d['block']}")
        print(f"entropy  {h!r}")
        print(f"rho      {d['rho']!r}")
        if "counts" in d:
            print("counts   " + " ".join(map(str, d["counts"])))
    return EXIT_OK


def cmd_constants(args) -> int:
    if args.digits < 1:
        raise UsageError("--digits must be positive")
    bits = max(args.precision, int(args.digits * 3.33) + 32)
    c = constants.named_constant(args.name, bits)
    text = mpmath.nstr(c.value, args.digits, strip_zeros=False)
    if args.json:
        print(json.dumps({"name": c.name, "value": text, "relation": c.defining_relation}))
    else:
        print(text)
    return EXIT_OK


def cmd_univoque(args) -> int:
    beta = make_beta(args.beta, args.precision)
    x = _exact(args.x, "x")
    steps = args.steps if args.steps is not None else args.depth
    res = univoque_test(x, beta, steps)
    if args.json:
        print(json.dumps({"x": args.x, "beta": beta.spec, "status": res.status,
                          "step": res.step, "depth": res.depth}))
    else:
        extra = "" if res.step is None else f" at step {res.step}"
        print(f"{res.status}{extra}")
    return EXIT_UNDETERMINED if res.status == "undetermined" else EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "sweep": cmd_sweep,
    "survivor": cmd_survivor,
    "sft": cmd_sft,
    "constants": cmd_constants,
    "univoque": cmd_univoque,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = _resolve(parser.parse_args(argv))
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"betaescape: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UndeterminedError, PerronConvergenceError) as exc:
        print(f"betaescape: undetermined: {exc}", file=sys.stderr)
        return EXIT_UNDETERMINED
    except (BetaSpecError, ValueError, OverflowError, OSError) as exc:
        print(f"betaescape: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
