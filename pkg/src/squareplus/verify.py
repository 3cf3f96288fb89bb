"""Numerical checks for the identities, bounds and stability claims of squareplus.

Each ``check_*`` function samples its claim and returns :class:`VerifyReport`
records whose ``passed`` flag is exactly ``worst_error <= tolerance``.  The
registry at the bottom (:data:`CHECKS`) names the default configuration of
every check and is what ``squareplus verify`` runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .activations import (
    B_SOFTPLUS_MATCH,
    B_UNIT,
    DomainError,
    Precision,
    SoftplusNaive,
    relu,
    rescale_b,
    softplus_d1,
    softplus_stable,
    squareplus,
    squareplus_d1,
    squareplus_d2,
)
from .kernels import KernelMode, apply

__all__ = [
    "CHECKS",
    "DEFAULT_GRID",
    "GridSpec",
    "VerifyReport",
    "check_bound_vs_softplus",
    "check_gradients",
    "check_naive_breakdown",
    "check_origin_identities",
    "check_relu_reduction",
    "check_scale_identity",
    "check_slow_tail",
    "check_student_t_pdf",
    "find_naive_breakdown",
    "run_checks",
    "student_t_pdf",
]


@dataclass(frozen=True)
class GridSpec:
    """A 1-D sample grid.

    ``linear`` grids hold `count` evenly spaced points over [start, stop].
    ``log-symmetric`` grids take `count` geometrically spaced magnitudes over
    [start, stop] (both positive) and mirror them, giving ``2 * count`` points
    that never include zero.
    """

    start: float
    stop: float
    count: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.count < 2:
            raise ValueError(f"grid needs at least 2 points, got {self.count}")
        if not self.start < self.stop:
            raise ValueError(f"grid start {self.start} must be below stop {self.stop}")
        if self.spacing not in ("linear", "log-symmetric"):
            raise ValueError(f"unknown spacing {self.spacing!r}")
        if self.spacing == "log-symmetric" and not self.start > 0:
            raise ValueError("log-symmetric grids need 0 < start < stop")

    def points(self) -> np.ndarray:
        if self.spacing == "linear":
            return np.linspace(self.start, self.stop, self.count)
        pos = np.geomspace(self.start, self.stop, self.count)
        return np.concatenate([-pos[::-1], pos])


DEFAULT_GRID = GridSpec(-20.0, 20.0, 2001)


@dataclass(frozen=True)
class VerifyReport:
    check_name: str
    passed: bool
    worst_x: float
    worst_b: float | None
    worst_error: float
    tolerance: float

    def line(self) -> str:
        b = "-" if self.worst_b is None else f"{self.worst_b:.17g}"
        return (
            f"{'PASS' if self.passed else 'FAIL'} {self.check_name}: "
            f"worst_error={self.worst_error:.6g} tolerance={self.tolerance:.6g} "
            f"at x={self.worst_x:.17g} b={b}"
        )


def _report(name: str, errors, xs, tolerance: float, bs=None) -> VerifyReport:
    errors = np.asarray(errors, dtype=np.float64)
    xs = np.asarray(xs, dtype=np.float64)
    # NaN errors must fail, so rank them above everything.
    ranked = np.where(np.isnan(errors), np.inf, errors)
    i = int(np.argmax(ranked))
    worst = float(errors[i])
    worst_b = None
    if bs is not None:
        worst_b = float(np.broadcast_to(np.asarray(bs, dtype=np.float64), errors.shape)[i])
    return VerifyReport(name, bool(worst <= tolerance), float(xs[i]), worst_b, worst, tolerance)


def _ulp(v: float) -> float:
    return math.ulp(v) if v != 0 else math.ulp(0.0)


def check_relu_reduction(grid: GridSpec = DEFAULT_GRID) -> VerifyReport:
    """squareplus(x, 0) against relu(x), error measured in ulps of relu(x)."""
    xs = grid.points()
    errs = []
    for x in xs:
        r = float(relu(x))
        errs.append(abs(float(squareplus(x, 0.0)) - r) / _ulp(r))
    return _report("relu_reduction", errs, xs, 1.0, 0.0)


def check_bound_vs_softplus(b: float, grid: GridSpec = DEFAULT_GRID, slack: float = 1e-12) -> VerifyReport:
    """squareplus(x, b) >= softplus(x) - slack at every grid point.

    ``worst_error`` is the largest ``softplus - squareplus`` seen, so a
    positive value beyond `slack` is a violation.
    """
    xs = grid.points()
    errs = [float(softplus_stable(x)) - float(squareplus(x, b)) for x in xs]
    return _report("bound", errs, xs, slack, b)


def check_origin_identities(b_list: Sequence[float] = (0.0, 1e-8, 1.0, B_UNIT, 1e8), tol: float = 1e-12) -> list[VerifyReport]:
    """Values of squareplus and its derivatives at x = 0.

    Always checks the softplus-matching b (value ln 2), b = 4 (value 1,
    curvature 1/4), then the slope 1/2 for every b in `b_list`.
    """
    cases = [
        ("origin:softplus_match", B_SOFTPLUS_MATCH, float(squareplus(0.0, B_SOFTPLUS_MATCH)), math.log(2.0)),
        ("origin:unit_value", B_UNIT, float(squareplus(0.0, B_UNIT)), 1.0),
        ("origin:unit_curvature", B_UNIT, float(squareplus_d2(0.0, B_UNIT)), 0.25),
    ]
    for b in b_list:
        cases.append((f"origin:half_slope[b={b:g}]", b, float(squareplus_d1(0.0, b)), 0.5))
    return [_report(name, [abs(got - want)], [0.0], tol, b) for name, b, got, want in cases]


def check_scale_identity(
    a_list: Sequence[float], b: float, grid: GridSpec = DEFAULT_GRID, tol: float = 1e-12
) -> VerifyReport:
    """squareplus(a x, b) / a == squareplus(x, b / a^2), relative to max(1, |x|).

    ``worst_b`` holds the rescaled ``b / a^2`` of the worst case, which
    identifies the offending scale.
    """
    xs = grid.points()
    errs, bs, at = [], [], []
    for a in a_list:
        b_scaled = rescale_b(a, b)
        for x in xs:
            lhs = float(squareplus(a * x, b)) / a
            rhs = float(squareplus(x, b_scaled))
            errs.append(abs(lhs - rhs) / max(1.0, abs(x)))
            bs.append(b_scaled)
            at.append(x)
    return _report("scale", errs, at, tol, bs)


def _rel(approx: float, exact: float) -> float:
    if approx == exact:
        return 0.0
    if exact == 0.0:
        return math.inf
    return abs(approx - exact) / abs(exact)


def check_gradients(
    b: float, grid: GridSpec = GridSpec(-10.0, 10.0, 401), tol_d1: float = 1e-6, tol_d2: float = 1e-5
) -> VerifyReport:
    """Central differences of squareplus vs d1, and of d1 vs d2.

    Step ``h = max(1, |x|) * cbrt(eps)``, snapped so ``x + h`` is exact.  The
    reported error is normalized: ``max(rel_d1 / tol_d1, rel_d2 / tol_d2)``
    against a tolerance of 1.
    """
    cbrt_eps = np.finfo(np.float64).eps ** (1.0 / 3.0)
    xs = grid.points()
    errs = []
    for x in xs:
        h = max(1.0, abs(x)) * cbrt_eps
        h = (x + h) - x
        fd1 = (float(squareplus(x + h, b)) - float(squareplus(x - h, b))) / (2.0 * h)
        fd2 = (float(squareplus_d1(x + h, b)) - float(squareplus_d1(x - h, b))) / (2.0 * h)
        e1 = _rel(fd1, float(squareplus_d1(x, b)))
        e2 = _rel(fd2, float(squareplus_d2(x, b)))
        errs.append(max(e1 / tol_d1, e2 / tol_d2))
    return _report("gradients", errs, xs, 1.0, b)


def student_t_pdf(x: float, nu: float) -> float:
    """Density of Student's t distribution with `nu` degrees of freedom."""
    log_norm = math.lgamma((nu + 1) / 2) - math.lgamma(nu / 2) - 0.5 * math.log(nu * math.pi)
    return math.exp(log_norm) * (1.0 + x * x / nu) ** (-(nu + 1) / 2)


def check_student_t_pdf(grid: GridSpec = GridSpec(-8.0, 8.0, 1601), tol: float = 1e-12) -> VerifyReport:
    """squareplus_d2(x, 2) against the t(nu=2) density."""
    xs = grid.points()
    errs = [abs(float(squareplus_d2(x, 2.0)) - student_t_pdf(x, 2.0)) for x in xs]
    return _report("student_t", errs, xs, tol, 2.0)


def find_naive_breakdown(precision: Precision = Precision.SINGLE, step: float = 0.01, stop: float = 40.0) -> float | None:
    """Where naive softplus stops carrying any information beyond relu.

    Scans x = 0, step, 2*step, ... , stop in `precision` and returns the first
    grid point from which ``softplus_naive(x) - x`` is exactly zero at every
    remaining point.  Near the knee the rounded difference flickers between
    zero and one ulp, so the first zero alone is not a stable answer.  Returns
    ``None`` if the difference is still nonzero at `stop`.
    """
    precision = Precision.parse(precision)
    count = int(round(stop / step)) + 1
    xs = (np.arange(count) * step).astype(precision.dtype)
    vals = np.empty_like(xs)
    apply(SoftplusNaive(), KernelMode.VALUE, xs, vals)
    diff = vals - xs
    nonzero = np.flatnonzero(diff != 0)
    last = int(nonzero[-1]) if nonzero.size else -1
    if last == count - 1:
        return None
    return float(xs[last + 1])


def check_naive_breakdown(precision: Precision = Precision.SINGLE, band: tuple[float, float] = (13.0, 18.0)) -> VerifyReport:
    """The float32 breakdown point lies inside `band`; error is the distance outside it."""
    x = find_naive_breakdown(precision)
    if x is None:
        return VerifyReport("breakdown", False, math.nan, None, math.inf, 0.0)
    lo, hi = band
    err = max(lo - x, x - hi, 0.0)
    return VerifyReport("breakdown", err <= 0.0, x, None, err, 0.0)


# The smallest positive double: `margin >= this` is the same as `margin > 0`.
_STRICT = -math.ulp(0.0)


def check_slow_tail(b: float, x_probe: float) -> VerifyReport:
    """squareplus approaches relu (and its slope approaches 0) slower than softplus.

    Requires ``squareplus - relu > softplus - relu > 0`` at `x_probe`, and for
    negative probes ``squareplus_d1 > sigmoid``.  ``worst_error`` is minus the
    smallest margin, so it is negative on success.
    """
    if not b >= B_SOFTPLUS_MATCH:
        raise DomainError(f"slow-tail comparison needs b >= 4 ln^2 2, got {b!r}")
    if not abs(x_probe) >= 2:
        raise DomainError(f"slow-tail probe needs |x| >= 2, got {x_probe!r}")
    r = float(relu(x_probe))
    sp_gap = float(squareplus(x_probe, b)) - r
    soft_gap = float(softplus_stable(x_probe)) - r
    margins = [sp_gap - soft_gap, soft_gap]
    if x_probe < 0:
        margins.append(float(squareplus_d1(x_probe, b)) - float(softplus_d1(x_probe)))
    worst = -min(margins)
    return VerifyReport(f"slow_tail[x={x_probe:g}]", worst <= _STRICT, x_probe, b, worst, _STRICT)


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    name: str
    description: str
    equations: tuple[int, ...]
    run: Callable[[float | None], list[VerifyReport]]


def _bs(b: float | None, default: Sequence[float]) -> list[float]:
    return list(default) if b is None else [b]


_MATCH_AND_UNIT = (B_SOFTPLUS_MATCH, B_UNIT)
# The slope comparison only holds well into the negative tail: at x = -2 with
# b = 4 ln^2 2 the sigmoid is still steeper.
SLOW_TAIL_PROBES = (-10.0, 2.0, 10.0)

CHECKS: dict[str, Check] = {
    c.name: c
    for c in [
        Check("relu_reduction", "b = 0 reduces squareplus to relu (1 ulp)", (6,), lambda b: [check_relu_reduction()]),
        Check(
            "origin",
            "values and slopes at x = 0",
            (7, 9, 10, 11),
            lambda b: check_origin_identities(_bs(b, (0.0, 1e-8, 1.0, B_UNIT, 1e8))),
        ),
        Check(
            "bound",
            "squareplus >= softplus for b >= 4 ln^2 2",
            (8,),
            lambda b: [check_bound_vs_softplus(v) for v in _bs(b, _MATCH_AND_UNIT)],
        ),
        Check(
            "scale",
            "input scaling is equivalent to rescaling b",
            (12,),
            lambda b: [check_scale_identity((0.5, 2.0, 3.0, 10.0), v) for v in _bs(b, _MATCH_AND_UNIT)],
        ),
        Check(
            "gradients",
            "finite differences agree with the closed-form derivatives",
            (4, 5),
            lambda b: [check_gradients(v) for v in _bs(b, (0.5, B_SOFTPLUS_MATCH, B_UNIT))],
        ),
        Check("student_t", "d2 with b = 2 is the t(2) density", (), lambda b: [check_student_t_pdf()]),
        Check("breakdown", "naive float32 softplus loses x near 15", (), lambda b: [check_naive_breakdown()]),
        Check(
            "slow_tail",
            "squareplus tails decay slower than softplus",
            (),
            lambda b: [check_slow_tail(v, x) for v in _bs(b, _MATCH_AND_UNIT) for x in SLOW_TAIL_PROBES],
        ),
    ]
}


def run_checks(names: Sequence[str] = ("all",), b: float | None = None) -> list[VerifyReport]:
    """Run the named registry checks (``"all"`` for every one).

    `b` overrides the default b values of checks that take one.
    """
    selected = list(CHECKS) if "all" in names else list(names)
    unknown = [n for n in selected if n not in CHECKS]
    if unknown:
        raise KeyError(f"unknown check(s): {', '.join(unknown)}; available: {', '.join(CHECKS)}")
    reports: list[VerifyReport] = []
    for name in selected:
        reports.extend(CHECKS[name].run(b))
    return reports
