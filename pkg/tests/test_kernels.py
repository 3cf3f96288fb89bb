import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from squareplus.activations import (
    B_SOFTPLUS_MATCH,
    Elu,
    Precision,
    Relu,
    SoftplusNaive,
    SoftplusStable,
    Squareplus,
    Swish,
    derivative,
    evaluate,
)
from squareplus.kernels import (
    PARALLEL_THRESHOLD,
    KernelMode,
    UsageError,
    apply,
    apply_in_place,
    checksum,
)

ALL_ACTS = [Squareplus(4.0), Squareplus(0.0), Squareplus(B_SOFTPLUS_MATCH), SoftplusStable(), SoftplusNaive(), Relu(), Elu(1.0), Swish()]
DIFFERENTIABLE = [a for a in ALL_ACTS if isinstance(a, (Squareplus, SoftplusStable, SoftplusNaive))]
DTYPES = [np.float32, np.float64]


def _same_bits(a: np.ndarray, b: np.ndarray) -> bool:
    return a.dtype == b.dtype and a.tobytes() == b.tobytes()


def test_squareplus_value_example():
    x = np.array([0.0, 1.0, -3.0])
    out = np.empty_like(x)
    apply(Squareplus(4.0), KernelMode.VALUE, x, out)
    assert out[0] == 1.0
    assert out[1] == 1.618033988749895
    # (sqrt(13) - 3) / 2
    assert out[2] == pytest.approx(0.3027756377319947, rel=1e-15, abs=0)


def test_empty_buffer():
    x = np.empty(0)
    out = np.empty(0)
    apply(Relu(), KernelMode.VALUE, x, out)
    assert out.shape == (0,)
    apply_in_place(Relu(), x)


def test_b0_is_relu_on_grid():
    x = np.linspace(-20, 20, 2001)
    a, b = np.empty_like(x), np.empty_like(x)
    apply(Squareplus(0.0), KernelMode.VALUE, x, a)
    apply(Relu(), KernelMode.VALUE, x, b)
    assert _same_bits(a, b)


@pytest.mark.parametrize("dtype", DTYPES)
@pytest.mark.parametrize("act", ALL_ACTS, ids=lambda a: a.label)
def test_matches_scalar_loop(act, dtype, rng):
    precision = Precision.of(dtype)
    x = rng.uniform(-30, 30, 2000).astype(dtype)
    out = np.empty_like(x)
    apply(act, KernelMode.VALUE, x, out)
    expected = np.array([evaluate(act, v, precision) for v in x], dtype=dtype)
    assert _same_bits(out, expected)


@pytest.mark.parametrize("dtype", DTYPES)
@pytest.mark.parametrize("act", DIFFERENTIABLE, ids=lambda a: a.label)
def test_derivative_and_fused(act, dtype, rng):
    precision = Precision.of(dtype)
    x = rng.uniform(-30, 30, 2000).astype(dtype)
    val, der = np.empty_like(x), np.empty_like(x)
    apply(act, KernelMode.DERIVATIVE, x, der)
    expected = np.array([derivative(act, v, 1, precision) for v in x], dtype=dtype)
    assert _same_bits(der, expected)

    fv, fd = np.empty_like(x), np.empty_like(x)
    apply(act, KernelMode.FUSED, x, (fv, fd))
    apply(act, KernelMode.VALUE, x, val)
    assert _same_bits(fv, val)
    assert _same_bits(fd, der)


@pytest.mark.parametrize("act", [Relu(), Elu(), Swish()], ids=lambda a: a.label)
def test_no_derivative_kernel(act):
    x = np.zeros(3)
    with pytest.raises(UsageError):
        apply(act, KernelMode.DERIVATIVE, x, np.empty_like(x))


@pytest.mark.parametrize("act", ALL_ACTS, ids=lambda a: a.label)
def test_in_place_matches_out_of_place(act, rng):
    x = rng.uniform(-5, 5, 1_000_000)
    out = np.empty_like(x)
    apply(act, KernelMode.VALUE, x, out)
    apply_in_place(act, x)
    assert _same_bits(x, out)


def test_in_place_small_examples():
    for data in ([0.0, 1.0, -3.0], []):
        x = np.array(data, dtype=np.float64)
        out = np.empty_like(x)
        apply(Squareplus(4.0), KernelMode.VALUE, x.copy(), out)
        apply_in_place(Squareplus(4.0), x)
        assert _same_bits(x, out)


@pytest.mark.parametrize("dtype", DTYPES)
@pytest.mark.parametrize("workers", [2, 3, 7])
def test_parallel_is_bit_identical(dtype, workers, rng):
    x = rng.uniform(-10, 10, 3 * PARALLEL_THRESHOLD + 17).astype(dtype)
    for act in ALL_ACTS:
        seq, par = np.empty_like(x), np.empty_like(x)
        apply(act, KernelMode.VALUE, x, seq)
        apply(act, KernelMode.VALUE, x, par, parallel=True, workers=workers)
        assert _same_bits(seq, par), act.label
    for act in DIFFERENTIABLE:
        seq = (np.empty_like(x), np.empty_like(x))
        par = (np.empty_like(x), np.empty_like(x))
        apply(act, KernelMode.FUSED, x, seq)
        apply(act, KernelMode.FUSED, x, par, parallel=True, workers=workers)
        assert _same_bits(seq[0], par[0]) and _same_bits(seq[1], par[1])


@given(hnp.arrays(np.float64, st.integers(0, 300), elements=st.floats(-1e6, 1e6)))
def test_relu_idempotent(x):
    once = np.empty_like(x)
    apply(Relu(), KernelMode.VALUE, x, once)
    twice = once.copy()
    apply_in_place(Relu(), twice)
    assert _same_bits(once, twice)


class TestUsageErrors:
    def test_length_mismatch(self):
        with pytest.raises(UsageError, match="length"):
            apply(Relu(), KernelMode.VALUE, np.zeros(3), np.zeros(4))

    def test_dtype_mismatch(self):
        with pytest.raises(UsageError, match="dtype"):
            apply(Relu(), KernelMode.VALUE, np.zeros(3), np.zeros(3, dtype=np.float32))

    def test_partial_overlap(self):
        buf = np.zeros(10)
        with pytest.raises(UsageError, match="overlap"):
            apply(Relu(), KernelMode.VALUE, buf[:5], buf[2:7])

    def test_not_contiguous(self):
        with pytest.raises(UsageError):
            apply(Relu(), KernelMode.VALUE, np.zeros(10)[::2], np.zeros(5))

    def test_integer_buffer(self):
        with pytest.raises(UsageError):
            apply(Relu(), KernelMode.VALUE, np.zeros(3, dtype=int), np.zeros(3, dtype=int))

    def test_fused_needs_pair(self):
        x = np.zeros(3)
        with pytest.raises(UsageError):
            apply(Squareplus(), KernelMode.FUSED, x, np.zeros(3))
        with pytest.raises(UsageError):
            apply(Squareplus(), KernelMode.FUSED, x, (np.zeros(3), np.zeros(2)))

    def test_read_only_output(self):
        out = np.zeros(3)
        out.flags.writeable = False
        with pytest.raises(UsageError):
            apply(Relu(), KernelMode.VALUE, np.zeros(3), out)


class TestChecksum:
    def test_empty(self):
        assert checksum(np.empty(0)) == 0.0

    def test_small(self):
        assert checksum(np.array([1.0, 2.0, 3.0])) == 6.0

    def test_of_relu(self):
        x = np.array([-1.0, 2.0, -3.0, 4.0])
        apply_in_place(Relu(), x)
        assert checksum(x) == 6.0

    def test_sequential_order_in_buffer_precision(self):
        # 2**24 + 1 + 1 in float32: each +1 is lost, unlike a pairwise sum.
        x = np.array([2.0**24, 1.0, 1.0], dtype=np.float32)
        assert checksum(x) == np.float32(2.0**24)
        assert isinstance(checksum(x), np.float32)
