"""Command-line entry point: ``squareplus {eval,bench,figures,verify}``.

Exit codes: 0 success, 1 a verification check failed, 2 usage error,
3 I/O error.  All tabular output is UTF-8 CSV with LF line endings; doubles
are written with 17 significant digits and singles with 9, which is enough
to read every value back bit-for-bit.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .activations import (
    ACTIVATION_NAMES,
    B_SOFTPLUS_MATCH,
    B_UNIT,
    Activation,
    DomainError,
    Precision,
    activation_from_name,
    derivative,
    evaluate,
    has_derivatives,
    relu,
    softplus_d1,
    softplus_d2,
    softplus_naive,
    softplus_stable,
    squareplus,
    squareplus_d1,
    squareplus_d2,
)
from .bench import BenchConfig, ResourceError, format_report, run_bench
from .kernels import UsageError
from .verify import DEFAULT_GRID, GridSpec, run_checks

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

DEFAULT_FIGURE_BS = (B_SOFTPLUS_MATCH, B_UNIT)

log = logging.getLogger("squareplus")


def fmt_num(value, digits: int = 17) -> str:
    return format(float(value), f".{digits}g")


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------


def cmd_eval(act: Activation, xs: Sequence[float], precision: Precision = Precision.DOUBLE) -> str:
    """One ``x,value,d1,d2`` line per input; derivative fields stay empty when unsupported."""
    digits = precision.digits
    lines = []
    for x in xs:
        x = precision.scalar(x)
        fields = [fmt_num(x, digits), fmt_num(evaluate(act, x, precision), digits)]
        if has_derivatives(act):
            fields += [fmt_num(derivative(act, x, order, precision), digits) for order in (1, 2)]
        else:
            fields += ["", ""]
        lines.append(",".join(fields))
    return "".join(line + "\n" for line in lines)


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------


def _b_tag(b: float) -> str:
    return f"squareplus_b{fmt_num(b)}"


def figure1_columns(xs: np.ndarray, b_values: Sequence[float]) -> dict[str, list]:
    """Functions and first/second derivatives: softplus plus one squareplus per b."""
    cols: dict[str, list] = {
        "x": list(xs),
        "softplus": [softplus_stable(x) for x in xs],
        "softplus_d1": [softplus_d1(x) for x in xs],
        "softplus_d2": [softplus_d2(x) for x in xs],
    }
    for b in b_values:
        tag = _b_tag(b)
        cols[tag] = [squareplus(x, b) for x in xs]
        cols[f"{tag}_d1"] = [squareplus_d1(x, b) for x in xs]
        cols[f"{tag}_d2"] = [squareplus_d2(x, b) for x in xs]
    return cols


def figure2_columns(xs: np.ndarray, b_values: Sequence[float]) -> dict[str, list]:
    """Differences to relu; the naive column is computed entirely in float32."""
    single = Precision.SINGLE
    cols: dict[str, list] = {
        "x": list(xs),
        "softplus_minus_relu": [softplus_stable(x) - relu(x) for x in xs],
        "softplus_naive_single_minus_relu": [
            softplus_naive(x, single) - relu(x, single) for x in xs.astype(np.float32)
        ],
    }
    for b in b_values:
        cols[f"{_b_tag(b)}_minus_relu"] = [squareplus(x, b) - relu(x) for x in xs]
    return cols


def write_columns(path: Path, cols: dict[str, list]) -> None:
    names = list(cols)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for row in zip(*cols.values()):
            writer.writerow(fmt_num(v, 9 if isinstance(v, np.float32) else 17) for v in row)


def read_columns(path: Path) -> dict[str, np.ndarray]:
    """Read a figure CSV back; columns whose name mentions ``single`` come back as float32."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        names = next(reader)
        rows = list(reader)
    out = {}
    for i, name in enumerate(names):
        dtype = np.float32 if "single" in name else np.float64
        out[name] = np.array([row[i] for row in rows], dtype=np.float64).astype(dtype)
    return out


def cmd_figures(grid: GridSpec, b_values: Sequence[float], out: Path) -> list[Path]:
    """Write ``fig1.csv`` and ``fig2.csv`` into directory `out`."""
    for b in b_values:
        if not b >= 0:
            raise DomainError(f"squareplus requires b >= 0, got {b!r}")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    xs = grid.points()
    paths = [out / "fig1.csv", out / "fig2.csv"]
    write_columns(paths[0], figure1_columns(xs, b_values))
    write_columns(paths[1], figure2_columns(xs, b_values))
    return paths


# ---------------------------------------------------------------------------
# verify / bench
# ---------------------------------------------------------------------------


def cmd_verify(names: Sequence[str] = ("all",), b: float | None = None) -> tuple[int, str]:
    reports = run_checks(names, b)
    text = "".join(r.line() + "\n" for r in reports)
    ok = all(r.passed for r in reports)
    text += f"{sum(r.passed for r in reports)}/{len(reports)} checks passed\n"
    return (EXIT_OK if ok else EXIT_FAILED), text


def cmd_bench(config: BenchConfig, fmt: str = "table") -> str:
    return format_report(run_bench(config), fmt)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="squareplus",
        description="Squareplus and related rectifiers: evaluation, benchmarks, figure data, checks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="print x,value,d1,d2 for each x")
    p.add_argument("xs", nargs="+", type=float, metavar="X")
    p.add_argument("--act", default="squareplus", choices=ACTIVATION_NAMES)
    p.add_argument("--b", type=float, default=B_UNIT, help="squareplus b (default: 4)")
    p.add_argument("--alpha", type=float, default=1.0, help="ELU alpha (default: 1)")
    p.add_argument("--precision", default="double", choices=[q.value for q in Precision])

    p = sub.add_parser("bench", help="time the activation kernels")
    p.add_argument("--n", type=int, default=1_000_000)
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--warmup", type=int, default=5)
    p.add_argument("--precision", default="double", choices=[q.value for q in Precision])
    p.add_argument("--format", default="table", choices=["table", "csv", "json"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--parallel", action="store_true", help="use the chunked multi-threaded kernels")
    p.add_argument("--act", nargs="+", choices=ACTIVATION_NAMES, help="subset to time (default: all six)")
    p.add_argument("--b", type=float, default=B_UNIT)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--low", type=float, default=-5.0, help="input range lower bound")
    p.add_argument("--high", type=float, default=5.0, help="input range upper bound")

    p = sub.add_parser("figures", help="write fig1.csv and fig2.csv")
    p.add_argument("--out", type=Path, default=Path("figures"), help="output directory")
    p.add_argument("--start", type=float, default=DEFAULT_GRID.start)
    p.add_argument("--stop", type=float, default=DEFAULT_GRID.stop)
    p.add_argument("--count", type=int, default=DEFAULT_GRID.count)
    p.add_argument("--spacing", default="linear", choices=["linear", "log-symmetric"])
    p.add_argument("--b", type=float, action="append", help="squareplus b (repeatable; default: 4 ln^2 2 and 4)")

    p = sub.add_parser("verify", help="run numerical checks; exit 1 if any fails")
    p.add_argument("checks", nargs="*", default=["all"], metavar="CHECK", help="check names or 'all'")
    p.add_argument("--b", type=float, help="override b for checks that take one")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")

    try:
        if args.command == "eval":
            act = activation_from_name(args.act, b=args.b, alpha=args.alpha)
            sys.stdout.write(cmd_eval(act, args.xs, Precision.parse(args.precision)))
        elif args.command == "bench":
            names = args.act or list(ACTIVATION_NAMES)
            config = BenchConfig(
                activations=[activation_from_name(n, b=args.b, alpha=args.alpha) for n in names],
                n=args.n,
                reps=args.reps,
                warmup=args.warmup,
                precision=args.precision,
                uniform_low=args.low,
                uniform_high=args.high,
                seed=args.seed,
                parallel=args.parallel,
            )
            sys.stdout.write(cmd_bench(config, args.format))
        elif args.command == "figures":
            grid = GridSpec(args.start, args.stop, args.count, args.spacing)
            for path in cmd_figures(grid, args.b or DEFAULT_FIGURE_BS, args.out):
                print(path)
        elif args.command == "verify":
            status, text = cmd_verify(args.checks, args.b)
            sys.stdout.write(text)
            return status
    except (DomainError, UsageError, ValueError, KeyError) as exc:
        print(f"squareplus: error: {exc.args[0] if exc.args else exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceError as exc:
        print(f"squareplus: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"squareplus: error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
