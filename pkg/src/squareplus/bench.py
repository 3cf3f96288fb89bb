"""Microbenchmark of the value kernels over a large paired input buffer.

Every activation in a run is timed on the same pseudo-random input, after a
few untimed warmup passes.  The checksum of the last timed output goes into
the record so a timed pass can never be skipped as dead work.

Only one benchmark should run per process at a time; the timing loop is not
meant to share the CPU with itself.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .activations import (
    Activation,
    Elu,
    Precision,
    Relu,
    SoftplusNaive,
    SoftplusStable,
    Squareplus,
    Swish,
)
from .kernels import KernelMode, apply, checksum

__all__ = [
    "CSV_HEADER",
    "BenchConfig",
    "BenchRecord",
    "ResourceError",
    "TABLE1_ACTIVATIONS",
    "format_report",
    "parse_report",
    "run_bench",
]

log = logging.getLogger(__name__)

CSV_HEADER = ("name", "precision", "n", "reps", "median_ns_per_elem", "min_ns_per_elem", "checksum")

# The six rows of the CPU runtime comparison, in its order.
TABLE1_ACTIVATIONS: tuple[Activation, ...] = (
    SoftplusStable(),
    SoftplusNaive(),
    Elu(1.0),
    Swish(),
    Relu(),
    Squareplus(4.0),
)


class ResourceError(MemoryError):
    """The benchmark buffers could not be allocated."""

    def __init__(self, nbytes: int):
        super().__init__(f"could not allocate {nbytes} bytes for benchmark buffers")
        self.nbytes = nbytes


@dataclass
class BenchConfig:
    activations: list = field(default_factory=lambda: list(TABLE1_ACTIVATIONS))
    n: int = 1_000_000
    reps: int = 50
    warmup: int = 5
    precision: Precision = Precision.DOUBLE
    uniform_low: float = -5.0
    uniform_high: float = 5.0
    seed: int = 0
    parallel: bool = False

    def __post_init__(self):
        self.precision = Precision.parse(self.precision)
        if self.n <= 0:
            raise ValueError(f"n must be positive, got {self.n}")
        if self.reps <= 0:
            raise ValueError(f"reps must be positive, got {self.reps}")
        if self.warmup < 0:
            raise ValueError(f"warmup must be non-negative, got {self.warmup}")
        if not self.uniform_low < self.uniform_high:
            raise ValueError(f"empty input range [{self.uniform_low}, {self.uniform_high}]")
        if not self.activations:
            raise ValueError("no activations to benchmark")


@dataclass(frozen=True)
class BenchRecord:
    activation_name: str
    precision: Precision
    n: int
    reps: int
    median_ns_per_elem: float
    min_ns_per_elem: float
    checksum: float


def make_input(config: BenchConfig) -> np.ndarray:
    """The shared input buffer: uniform on [low, high), drawn in double and cast."""
    rng = np.random.default_rng(config.seed)
    nbytes = config.n * (8 + config.precision.dtype.itemsize)
    try:
        return rng.uniform(config.uniform_low, config.uniform_high, config.n).astype(config.precision.dtype)
    except MemoryError:
        raise ResourceError(nbytes) from None


def _check_timer(pass_seconds: float) -> None:
    resolution = time.get_clock_info("perf_counter").resolution
    if resolution > 0.01 * pass_seconds:
        warnings.warn(
            f"timer resolution {resolution:.3g}s exceeds 1% of one pass ({pass_seconds:.3g}s); "
            "timings will be coarse",
            RuntimeWarning,
            stacklevel=3,
        )


def _time_one(act: Activation, x: np.ndarray, out: np.ndarray, config: BenchConfig) -> BenchRecord:
    for _ in range(config.warmup):
        apply(act, KernelMode.VALUE, x, out, parallel=config.parallel)

    samples = np.empty(config.reps, dtype=np.int64)
    for r in range(config.reps):
        t0 = time.perf_counter_ns()
        apply(act, KernelMode.VALUE, x, out, parallel=config.parallel)
        samples[r] = time.perf_counter_ns() - t0

    per_elem = samples / config.n
    return BenchRecord(
        activation_name=act.label,
        precision=config.precision,
        n=config.n,
        reps=config.reps,
        median_ns_per_elem=float(np.median(per_elem)),
        min_ns_per_elem=float(per_elem.min()),
        checksum=float(checksum(out)),
    )


def run_bench(config: BenchConfig) -> list[BenchRecord]:
    """Time every activation of `config`; records come back slowest first."""
    x = make_input(config)
    try:
        out = np.empty_like(x)
    except MemoryError:
        raise ResourceError(2 * x.nbytes) from None

    t0 = time.perf_counter()
    apply(config.activations[0], KernelMode.VALUE, x, out, parallel=config.parallel)
    _check_timer(time.perf_counter() - t0)

    records = []
    for act in config.activations:
        rec = _time_one(act, x, out, config)
        log.info("%-28s %8.3f ns/elem (min %.3f)", rec.activation_name, rec.median_ns_per_elem, rec.min_ns_per_elem)
        records.append(rec)
    return sorted(records, key=lambda r: r.median_ns_per_elem, reverse=True)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _num(value: float, digits: int = 17) -> str:
    return format(float(value), f".{digits}g")


def _row(rec: BenchRecord) -> list[str]:
    return [
        rec.activation_name,
        rec.precision.value,
        str(rec.n),
        str(rec.reps),
        _num(rec.median_ns_per_elem),
        _num(rec.min_ns_per_elem),
        _num(rec.checksum, rec.precision.digits),
    ]


def format_report(records: list[BenchRecord], fmt: str = "table") -> str:
    """Serialize records as ``table``, ``csv`` or ``json``, slowest first.

    The table view also lists per-pass milliseconds and the speed of each row
    relative to the fastest one.
    """
    records = sorted(records, key=lambda r: r.median_ns_per_elem, reverse=True)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        writer.writerows(_row(r) for r in records)
        return buf.getvalue()
    if fmt == "json":
        payload = [dict(zip(CSV_HEADER, _json_values(r))) for r in records]
        return json.dumps(payload, indent=2) + "\n"
    if fmt == "table":
        return _table(records)
    raise ValueError(f"unknown report format {fmt!r}; expected table, csv or json")


def _json_values(rec: BenchRecord) -> list:
    return [
        rec.activation_name,
        rec.precision.value,
        rec.n,
        rec.reps,
        rec.median_ns_per_elem,
        rec.min_ns_per_elem,
        rec.checksum,
    ]


def _table(records: list[BenchRecord]) -> str:
    head = ("activation", "precision", "n", "ms/pass", "ns/elem", "min ns/elem", "x fastest", "checksum")
    fastest = min((r.median_ns_per_elem for r in records), default=0.0)
    rows = [
        (
            r.activation_name,
            r.precision.value,
            str(r.n),
            f"{r.median_ns_per_elem * r.n / 1e6:.3f}",
            f"{r.median_ns_per_elem:.3f}",
            f"{r.min_ns_per_elem:.3f}",
            f"{r.median_ns_per_elem / fastest:.2f}" if fastest > 0 else "-",
            _num(r.checksum, r.precision.digits),
        )
        for r in records
    ]
    widths = [max([len(h)] + [len(row[i]) for row in rows]) for i, h in enumerate(head)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(head, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in rows]
    return "\n".join(line.rstrip() for line in lines) + "\n"


def _record(values: dict) -> BenchRecord:
    precision = Precision.parse(values["precision"])
    return BenchRecord(
        activation_name=str(values["name"]),
        precision=precision,
        n=int(values["n"]),
        reps=int(values["reps"]),
        median_ns_per_elem=float(values["median_ns_per_elem"]),
        min_ns_per_elem=float(values["min_ns_per_elem"]),
        # Single-precision checksums are written with 9 digits; snap back to float32.
        checksum=float(precision.scalar(values["checksum"])),
    )


def parse_report(text: str, fmt: str = "csv") -> list[BenchRecord]:
    """Inverse of :func:`format_report` for the ``csv`` and ``json`` formats."""
    if fmt == "csv":
        reader = csv.DictReader(io.StringIO(text))
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        return [_record(row) for row in reader]
    if fmt == "json":
        return [_record(row) for row in json.loads(text)]
    raise ValueError(f"cannot parse report format {fmt!r}")
