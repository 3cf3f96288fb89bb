"""Acceptance criteria, one test each, every tolerance pinned.

Run alone with ``pytest tests/test_acceptance.py``; a PASS/FAIL line per
criterion is printed in the terminal summary.
"""

import math
import time

import numpy as np
import pytest

from squareplus.activations import (
    B_SOFTPLUS_MATCH,
    Elu,
    Precision,
    Relu,
    SoftplusNaive,
    SoftplusStable,
    Squareplus,
    Swish,
    relu,
    squareplus,
    squareplus_d1,
    squareplus_d2,
)
from squareplus.bench import BenchConfig, format_report, parse_report, run_bench
from squareplus.cli import (
    cmd_figures,
    figure1_columns,
    figure2_columns,
    main,
    read_columns,
)
from squareplus.kernels import KernelMode, apply
from squareplus.verify import (
    DEFAULT_GRID,
    GridSpec,
    check_bound_vs_softplus,
    check_gradients,
    check_scale_identity,
    check_student_t_pdf,
    find_naive_breakdown,
)


@pytest.fixture
def note(request):
    """Attach a one-line measurement to the criterion's PASS/FAIL line."""

    def record(text: str) -> None:
        request.node.user_properties.append(("criterion_detail", text))

    return record


def test_01_origin_identities(note):
    """1. origin identities within 1e-12"""
    tol = 1e-12
    errors = {
        "sp(0, 4ln^2 2) = ln 2": abs(squareplus(0.0, B_SOFTPLUS_MATCH) - math.log(2.0)),
        "sp(0, 4) = 1": abs(squareplus(0.0, 4.0) - 1.0),
        "d2(0, 4) = 1/4": abs(squareplus_d2(0.0, 4.0) - 0.25),
    }
    for b in (0.0, 1e-8, 1.0, 4.0, 1e8):
        errors[f"d1(0, {b:g}) = 1/2"] = abs(squareplus_d1(0.0, b) - 0.5)
    worst = max(errors.values())
    note(f"max abs error {worst:.3g} (tol {tol:g})")
    assert all(e <= tol for e in errors.values()), errors


def test_02_relu_reduction(note):
    """2. squareplus(x, 0) == relu(x) within 1 ulp on 2001 points"""
    xs = np.linspace(-20.0, 20.0, 2001)
    worst = 0.0
    for x in xs:
        r = float(relu(x))
        worst = max(worst, abs(float(squareplus(x, 0.0)) - r) / math.ulp(r if r else 0.0))
    note(f"max {worst:g} ulp (tol 1)")
    assert worst <= 1.0


def test_03_bound(note):
    """3. squareplus(x, 4ln^2 2) >= softplus(x) - 1e-12, and b = 1 is caught"""
    good = check_bound_vs_softplus(B_SOFTPLUS_MATCH, DEFAULT_GRID)
    bad = check_bound_vs_softplus(1.0, DEFAULT_GRID)
    note(
        f"b=4ln^2 2 worst {good.worst_error:.3g}; b=1 violation {bad.worst_error:.3g} at x={bad.worst_x:g}"
    )
    assert good.passed and good.tolerance == 1e-12
    assert not bad.passed


def test_04_scale_identity(note):
    """4. scale identity within 1e-12 * max(1, |x|)"""
    reports = [check_scale_identity((0.5, 2.0, 3.0, 10.0), b, DEFAULT_GRID, tol=1e-12) for b in (B_SOFTPLUS_MATCH, 4.0)]
    note(f"max scaled error {max(r.worst_error for r in reports):.3g} (tol 1e-12)")
    assert all(r.passed for r in reports)


def test_05_derivatives(note):
    """5. finite differences match d1 (1e-6) and d2 (1e-5)"""
    t0 = time.perf_counter()
    grid = GridSpec(-10.0, 10.0, 401)
    reports = [check_gradients(b, grid, tol_d1=1e-6, tol_d2=1e-5) for b in (0.5, B_SOFTPLUS_MATCH, 4.0)]
    elapsed = time.perf_counter() - t0
    note(f"worst fraction of tolerance {max(r.worst_error for r in reports):.3g}; {elapsed:.2f}s")
    assert all(r.passed for r in reports)
    assert elapsed < 1.0


def test_06_student_t(note):
    """6. d2(x, 2) equals the t(2) density within 1e-12 on [-8, 8]"""
    r = check_student_t_pdf(GridSpec(-8.0, 8.0, 1601), tol=1e-12)
    note(f"max abs error {r.worst_error:.3g}")
    assert r.passed


def test_07_breakdown(note):
    """7. naive float32 softplus breaks down in [13, 18]"""
    t0 = time.perf_counter()
    x = find_naive_breakdown(Precision.SINGLE)
    elapsed = time.perf_counter() - t0
    note(f"breakdown at x = {x:.2f}; {elapsed:.2f}s")
    assert x is not None and 13.0 <= x <= 18.0
    assert elapsed < 1.0


def test_08_runtime_ordering(note):
    """8. n=1e6 double single-threaded: squareplus < softplus, <= 2x relu, >= 2x faster than softplus"""
    t0 = time.perf_counter()
    cfg = BenchConfig(
        activations=[SoftplusStable(), Relu(), Squareplus(4.0)],
        n=1_000_000,
        reps=50,
        warmup=5,
        precision=Precision.DOUBLE,
        parallel=False,
        seed=0,
    )
    med = {r.activation_name: r.median_ns_per_elem for r in run_bench(cfg)}
    elapsed = time.perf_counter() - t0
    sp, soft, rl = med["squareplus(b=4)"], med["softplus_stable"], med["relu"]
    note(
        f"squareplus {sp:.3f} ns/elem, relu {rl:.3f}, softplus {soft:.3f}; "
        f"softplus/squareplus {soft / sp:.1f}x, squareplus/relu {sp / rl:.2f}x; {elapsed:.1f}s"
    )
    assert sp < soft
    assert sp <= 2.0 * rl
    assert soft / sp >= 2.0
    assert elapsed < 60.0


def test_09_parallel_determinism(note):
    """9. parallel apply on 1e6 elements is bit-identical to sequential"""
    x = np.random.default_rng(9).uniform(-20.0, 20.0, 1_000_000)
    acts = [Squareplus(4.0), Squareplus(B_SOFTPLUS_MATCH), SoftplusStable(), SoftplusNaive(), Relu(), Elu(1.0), Swish()]
    checked = 0
    for act in acts:
        seq = np.empty_like(x)
        apply(act, KernelMode.VALUE, x, seq)
        for workers in (None, 4):
            par = np.empty_like(x)
            apply(act, KernelMode.VALUE, x, par, parallel=True, workers=workers)
            assert seq.tobytes() == par.tobytes(), act.label
            checked += 1
    note(f"{checked} activation/worker combinations identical")


def test_10_cli_round_trip(note, tmp_path, capsys):
    """10. bench and figure CSVs round-trip; `verify all` exits 0"""
    assert main(["bench", "--n", "20000", "--reps", "3", "--format", "csv"]) == 0
    out = capsys.readouterr().out
    assert format_report(parse_report(out), "csv") == out

    grid = GridSpec(-20.0, 20.0, 2001)
    bs = [B_SOFTPLUS_MATCH, 4.0]
    cmd_figures(grid, bs, tmp_path)
    for name, build in (("fig1.csv", figure1_columns), ("fig2.csv", figure2_columns)):
        back = read_columns(tmp_path / name)
        for col, values in build(grid.points(), bs).items():
            assert back[col].tobytes() == np.array(values).tobytes(), (name, col)

    status = main(["verify", "all"])
    capsys.readouterr()
    note(f"verify all exit {status}")
    assert status == 0
