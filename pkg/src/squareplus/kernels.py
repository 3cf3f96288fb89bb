"""Elementwise batch kernels over contiguous 1-D float32/float64 buffers.

Each kernel is a plain indexed loop around the compiled scalar core from
:mod:`squareplus.activations`, so ``out[i]`` is bit-identical to calling the
scalar function on ``x[i]``.  Parallel execution splits the index range into
disjoint contiguous slices; nothing is reduced across slices, so the result
does not depend on the number of workers.

Callers own all buffers.  Kernels never allocate.
"""

from __future__ import annotations

import enum
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from numba import njit

from .activations import (
    Activation,
    Elu,
    Precision,
    Relu,
    SoftplusNaive,
    SoftplusStable,
    Squareplus,
    Swish,
    scalar_ops,
)

__all__ = ["KernelMode", "PARALLEL_THRESHOLD", "UsageError", "apply", "apply_in_place", "checksum"]

#: Below this many elements a call always runs on the calling thread.
PARALLEL_THRESHOLD = 65536


class UsageError(ValueError):
    """Buffers or modes passed to a kernel are inconsistent."""


class KernelMode(enum.Enum):
    VALUE = "value"
    DERIVATIVE = "derivative"
    FUSED = "fused"


def _binary(f):
    # Adapts a one-argument core to the (x, param) loop signature.
    @njit(nogil=True)
    def g(x, p):
        return f(x)

    return g


def _map_kernel(f):
    @njit(nogil=True)
    def kernel(x, out, p):
        for i in range(x.shape[0]):
            out[i] = f(x[i], p)

    return kernel


def _fused_kernel(f, df):
    @njit(nogil=True)
    def kernel(x, out, dout, p):
        for i in range(x.shape[0]):
            xi = x[i]
            out[i] = f(xi, p)
            dout[i] = df(xi, p)

    return kernel


def _checksum_kernel(ftype):
    zero = ftype(0.0)

    @njit(nogil=True)
    def fold(x):
        acc = zero
        for i in range(x.shape[0]):
            acc += x[i]
        return acc

    return fold


def _build(precision: Precision) -> dict:
    ops = scalar_ops(precision)
    cores = {
        "squareplus": (ops.squareplus, ops.squareplus_d1),
        "softplus_stable": (_binary(ops.softplus_stable), _binary(ops.softplus_d1)),
        "softplus_naive": (_binary(ops.softplus_naive), _binary(ops.softplus_d1)),
        "relu": (_binary(ops.relu), None),
        "elu": (ops.elu, None),
        "swish": (_binary(ops.swish), None),
    }
    table = {}
    for name, (f, df) in cores.items():
        table[name, KernelMode.VALUE] = _map_kernel(f)
        if df is not None:
            table[name, KernelMode.DERIVATIVE] = _map_kernel(df)
            table[name, KernelMode.FUSED] = _fused_kernel(f, df)
    table["checksum"] = _checksum_kernel(precision.scalar)
    return table


_KERNELS = {p: _build(p) for p in Precision}


def _param(act: Activation) -> float:
    match act:
        case Squareplus(b=b):
            return b
        case Elu(alpha=alpha):
            return alpha
        case SoftplusStable() | SoftplusNaive() | Relu() | Swish():
            return 0.0
    raise TypeError(f"not an activation: {act!r}")


def _check_buffer(a, what: str) -> None:
    if not isinstance(a, np.ndarray):
        raise UsageError(f"{what} must be a numpy array, got {type(a).__name__}")
    if a.ndim != 1 or not a.flags.c_contiguous:
        raise UsageError(f"{what} must be a contiguous 1-D array")
    if a.dtype not in (np.float32, np.float64):
        raise UsageError(f"{what} has dtype {a.dtype}; expected float32 or float64")


def _check_output(x: np.ndarray, out, what: str) -> None:
    _check_buffer(out, what)
    if not out.flags.writeable:
        raise UsageError(f"{what} is read-only")
    if out.shape != x.shape:
        raise UsageError(f"length mismatch: input has {x.shape[0]}, {what} has {out.shape[0]}")
    if out.dtype != x.dtype:
        raise UsageError(f"dtype mismatch: input is {x.dtype}, {what} is {out.dtype}")
    same = out.ctypes.data == x.ctypes.data
    if not same and np.may_share_memory(x, out):
        raise UsageError(f"{what} partially overlaps the input")


def _chunks(n: int, parts: int) -> list[tuple[int, int]]:
    step = -(-n // parts)
    return [(lo, min(lo + step, n)) for lo in range(0, n, step)]


def _run(kernel, x: np.ndarray, outs: tuple, p, parallel: bool, workers: int | None) -> None:
    n = x.shape[0]
    if workers is None:
        workers = os.cpu_count() or 1
    if not parallel or n < PARALLEL_THRESHOLD or workers < 1:
        kernel(x, *outs, p)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(kernel, x[lo:hi], *(o[lo:hi] for o in outs), p)
            for lo, hi in _chunks(n, workers)
        ]
        for fut in futures:
            fut.result()


def apply(
    act: Activation,
    mode: KernelMode,
    x: np.ndarray,
    out,
    *,
    parallel: bool = False,
    workers: int | None = None,
) -> None:
    """Write ``act`` (or its first derivative) of every ``x[i]`` into `out`.

    For ``KernelMode.FUSED``, `out` is a ``(values, derivatives)`` pair.
    `out` may be `x` itself (in-place) but must not otherwise overlap it.
    Derivative modes exist only for squareplus and softplus.

    With ``parallel=True`` and at least ``PARALLEL_THRESHOLD`` elements the
    range is split into `workers` contiguous slices (default: CPU count).
    """
    mode = KernelMode(mode)
    _check_buffer(x, "input")
    if mode is KernelMode.FUSED:
        if not (isinstance(out, (tuple, list)) and len(out) == 2):
            raise UsageError("fused mode needs a (values, derivatives) pair of output buffers")
        outs = tuple(out)
        _check_output(x, outs[0], "values output")
        _check_output(x, outs[1], "derivatives output")
        if outs[0].ctypes.data == outs[1].ctypes.data and x.shape[0]:
            raise UsageError("fused outputs must be distinct buffers")
    else:
        _check_output(x, out, "output")
        outs = (out,)

    precision = Precision.of(x.dtype)
    kernel = _KERNELS[precision].get((act.name, mode))
    if kernel is None:
        raise UsageError(f"{mode.value} mode is not available for {act.label}")
    _run(kernel, x, outs, precision.scalar(_param(act)), parallel, workers)


def apply_in_place(act: Activation, buf: np.ndarray, *, parallel: bool = False, workers: int | None = None) -> None:
    """Overwrite `buf` with ``act(buf)``."""
    apply(act, KernelMode.VALUE, buf, buf, parallel=parallel, workers=workers)


def checksum(buf: np.ndarray):
    """Left-to-right sum of `buf`, accumulated in the buffer's own precision.

    Order-sensitive by design: it is a fixed sequential fold, not ``np.sum``'s
    pairwise reduction, so it is reproducible but not the most accurate sum.
    """
    _check_buffer(buf, "buffer")
    precision = Precision.of(buf.dtype)
    return precision.scalar(_KERNELS[precision]["checksum"](buf))
