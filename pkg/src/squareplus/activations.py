"""Scalar rectifier activations and their exact derivatives.

Every function here is evaluated in one of two IEEE-754 formats, selected by
:class:`Precision`.  The single-precision path never widens to double: the
compiled cores call ``expf``/``logf``/``sqrtf`` directly, which is what makes
the float32 breakdown of naive softplus observable.

The compiled cores (see :func:`scalar_ops`) are shared with
:mod:`squareplus.kernels`, so a batch kernel and a loop of scalar calls run the
same machine code per element.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from types import SimpleNamespace
from typing import ClassVar, Union

import numpy as np
from numba import njit

__all__ = [
    "B_SOFTPLUS_MATCH",
    "B_UNIT",
    "Activation",
    "DomainError",
    "Elu",
    "Precision",
    "Relu",
    "SoftplusNaive",
    "SoftplusStable",
    "Squareplus",
    "Swish",
    "activation_from_name",
    "derivative",
    "elu",
    "evaluate",
    "has_derivatives",
    "relu",
    "rescale_b",
    "scalar_ops",
    "softplus_d1",
    "softplus_d2",
    "softplus_naive",
    "softplus_stable",
    "squareplus",
    "squareplus_d1",
    "squareplus_d2",
    "swish",
]

#: b at which squareplus(0, b) == softplus(0) == ln 2.
B_SOFTPLUS_MATCH = 4.0 * math.log(2.0) ** 2
#: b at which squareplus(0, b) == 1 and its curvature at 0 matches softplus.
B_UNIT = 4.0


class DomainError(ValueError):
    """An activation parameter or argument lies outside its domain."""


class Precision(enum.Enum):
    SINGLE = "single"
    DOUBLE = "double"

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(np.float32 if self is Precision.SINGLE else np.float64)

    @property
    def scalar(self) -> type:
        return self.dtype.type

    @property
    def digits(self) -> int:
        """Significant decimal digits needed for a lossless round trip."""
        return 9 if self is Precision.SINGLE else 17

    @classmethod
    def parse(cls, value: "str | Precision") -> "Precision":
        if isinstance(value, Precision):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown precision {value!r}; expected 'single' or 'double'") from None

    @classmethod
    def of(cls, dtype) -> "Precision":
        dtype = np.dtype(dtype)
        if dtype == np.float32:
            return cls.SINGLE
        if dtype == np.float64:
            return cls.DOUBLE
        raise ValueError(f"unsupported dtype {dtype}; expected float32 or float64")


# ---------------------------------------------------------------------------
# Compiled cores, one set per floating-point format.  Constants are captured as
# numpy scalars of the target format so numba types them as such; a bare
# Python float literal would promote float32 arithmetic to float64.
# ---------------------------------------------------------------------------


def _build_ops(ftype) -> SimpleNamespace:
    ZERO = ftype(0.0)
    HALF = ftype(0.5)
    ONE = ftype(1.0)

    @njit(nogil=True)
    def squareplus_(x, b):
        return HALF * (x + math.sqrt(x * x + b))

    @njit(nogil=True)
    def squareplus_d1_(x, b):
        if b == ZERO:
            # Subgradient midpoint at the kink; the b -> 0+ limit elsewhere.
            if x > ZERO:
                return ONE
            if x < ZERO:
                return ZERO
            return HALF
        return HALF * (ONE + x / math.sqrt(x * x + b))

    @njit(nogil=True)
    def squareplus_d2_(x, b):
        if b == ZERO:
            return ZERO
        s = x * x + b
        return HALF * (b / (s * math.sqrt(s)))

    @njit(nogil=True)
    def softplus_stable_(x):
        m = x if x > ZERO else ZERO
        return m + math.log1p(math.exp(-abs(x)))

    @njit(nogil=True)
    def softplus_naive_(x):
        return math.log(math.exp(x) + ONE)

    @njit(nogil=True)
    def softplus_d1_(x):
        # Logistic sigmoid; exp(-x) overflowing to inf gives the correct 0.
        return ONE / (ONE + math.exp(-x))

    @njit(nogil=True)
    def softplus_d2_(x):
        # Logistic density, written in |x| so neither tail cancels.
        e = math.exp(-abs(x))
        d = ONE + e
        return e / (d * d)

    @njit(nogil=True)
    def relu_(x):
        return x if x > ZERO else ZERO

    @njit(nogil=True)
    def elu_(x, alpha):
        if x > ZERO:
            return x
        return alpha * math.expm1(x)

    @njit(nogil=True)
    def swish_(x):
        return x / (ONE + math.exp(-x))

    return SimpleNamespace(
        squareplus=squareplus_,
        squareplus_d1=squareplus_d1_,
        squareplus_d2=squareplus_d2_,
        softplus_stable=softplus_stable_,
        softplus_naive=softplus_naive_,
        softplus_d1=softplus_d1_,
        softplus_d2=softplus_d2_,
        relu=relu_,
        elu=elu_,
        swish=swish_,
    )


_OPS = {
    Precision.SINGLE: _build_ops(np.float32),
    Precision.DOUBLE: _build_ops(np.float64),
}


def scalar_ops(precision: Precision) -> SimpleNamespace:
    """Compiled scalar cores for `precision` (callable from numba code)."""
    return _OPS[Precision.parse(precision)]


# ---------------------------------------------------------------------------
# Activation descriptors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Squareplus:
    b: float = B_UNIT
    name: ClassVar[str] = "squareplus"

    def __post_init__(self):
        _check_b(self.b)

    @property
    def label(self) -> str:
        return f"squareplus(b={self.b:.17g})"


@dataclass(frozen=True)
class SoftplusStable:
    name: ClassVar[str] = "softplus_stable"
    label: ClassVar[str] = "softplus_stable"


@dataclass(frozen=True)
class SoftplusNaive:
    name: ClassVar[str] = "softplus_naive"
    label: ClassVar[str] = "softplus_naive"


@dataclass(frozen=True)
class Relu:
    name: ClassVar[str] = "relu"
    label: ClassVar[str] = "relu"


@dataclass(frozen=True)
class Elu:
    alpha: float = 1.0
    name: ClassVar[str] = "elu"

    def __post_init__(self):
        _check_alpha(self.alpha)

    @property
    def label(self) -> str:
        return f"elu(alpha={self.alpha:.17g})"


@dataclass(frozen=True)
class Swish:
    """SiLU, i.e. swish with a fixed beta of 1."""

    name: ClassVar[str] = "swish"
    label: ClassVar[str] = "swish"


Activation = Union[Squareplus, SoftplusStable, SoftplusNaive, Relu, Elu, Swish]

ACTIVATION_NAMES = ("squareplus", "softplus_stable", "softplus_naive", "relu", "elu", "swish")


def activation_from_name(name: str, b: float = B_UNIT, alpha: float = 1.0) -> Activation:
    """Build a descriptor from its short name; `b`/`alpha` apply where relevant."""
    key = name.strip().lower().replace("-", "_")
    if key == "squareplus":
        return Squareplus(b)
    if key in ("softplus", "softplus_stable"):
        return SoftplusStable()
    if key == "softplus_naive":
        return SoftplusNaive()
    if key == "relu":
        return Relu()
    if key == "elu":
        return Elu(alpha)
    if key in ("swish", "silu"):
        return Swish()
    raise ValueError(f"unknown activation {name!r}; expected one of {', '.join(ACTIVATION_NAMES)}")


def has_derivatives(act: Activation) -> bool:
    """Whether exact first/second derivatives are provided for `act`."""
    return isinstance(act, (Squareplus, SoftplusStable, SoftplusNaive))


def _check_b(b) -> None:
    if not b >= 0:
        raise DomainError(f"squareplus requires b >= 0, got {b!r}")


def _check_alpha(alpha) -> None:
    if not alpha > 0:
        raise DomainError(f"elu requires alpha > 0, got {alpha!r}")


# ---------------------------------------------------------------------------
# Public scalar API.  Results are numpy scalars of the requested precision.
# ---------------------------------------------------------------------------

_DOUBLE = Precision.DOUBLE


def squareplus(x, b, precision: Precision = _DOUBLE):
    """Return ``(x + sqrt(x**2 + b)) / 2``.

    No rescaling is done at either end of the range: once ``x*x`` overflows
    the result is ``inf`` (``|x| > ~1.3e154`` in double, ``~1.8e19`` in
    single), and once it underflows (``0 < |x| < ~1.5e-154``, ``~1.1e-19``)
    the b = 0 case returns ``x / 2`` rather than ``relu(x)``.
    """
    _check_b(b)
    p = Precision.parse(precision)
    return p.scalar(_OPS[p].squareplus(p.scalar(x), p.scalar(b)))


def squareplus_d1(x, b, precision: Precision = _DOUBLE):
    """First derivative ``(1 + x / sqrt(x**2 + b)) / 2``; 1/2 at the b = 0 kink."""
    _check_b(b)
    p = Precision.parse(precision)
    return p.scalar(_OPS[p].squareplus_d1(p.scalar(x), p.scalar(b)))


def squareplus_d2(x, b, precision: Precision = _DOUBLE):
    """Second derivative ``b / (2 (x**2 + b)**1.5)``.

    For b = 0 this is identically zero: the Dirac spike of ReLU's second
    derivative at the origin has no pointwise value.
    """
    _check_b(b)
    p = Precision.parse(precision)
    return p.scalar(_OPS[p].squareplus_d2(p.scalar(x), p.scalar(b)))


def softplus_stable(x, precision: Precision = _DOUBLE):
    """``log(1 + exp(x))`` as ``max(x, 0) + log1p(exp(-|x|))``; never overflows."""
    p = Precision.parse(precision)
    return p.scalar(_OPS[p].softplus_stable(p.scalar(x)))


def softplus_naive(x, precision: Precision = _DOUBLE):
    """``log(exp(x) + 1)`` with no safeguards.

    Overflows to ``inf`` once ``exp(x)`` does (x > ~88.7 in single precision).
    """
    p = Precision.parse(precision)
    return p.scalar(_OPS[p].softplus_naive(p.scalar(x)))


def softplus_d1(x, precision: Precision = _DOUBLE):
    p = Precision.parse(precision)
    return p.scalar(_OPS[p].softplus_d1(p.scalar(x)))


def softplus_d2(x, precision: Precision = _DOUBLE):
    p = Precision.parse(precision)
    return p.scalar(_OPS[p].softplus_d2(p.scalar(x)))


def relu(x, precision: Precision = _DOUBLE):
    p = Precision.parse(precision)
    return p.scalar(_OPS[p].relu(p.scalar(x)))


def elu(x, alpha=1.0, precision: Precision = _DOUBLE):
    """``x`` for positive inputs, ``alpha * (exp(x) - 1)`` otherwise."""
    _check_alpha(alpha)
    p = Precision.parse(precision)
    return p.scalar(_OPS[p].elu(p.scalar(x), p.scalar(alpha)))


def swish(x, precision: Precision = _DOUBLE):
    """SiLU: ``x * sigmoid(x)``."""
    p = Precision.parse(precision)
    return p.scalar(_OPS[p].swish(p.scalar(x)))


def rescale_b(a, b) -> float:
    """The b giving ``squareplus(x, b') == squareplus(a*x, b) / a``, i.e. ``b / a**2``."""
    if not a > 0:
        raise DomainError(f"scale a must be > 0, got {a!r}")
    _check_b(b)
    return b / (a * a)


def evaluate(act: Activation, x, precision: Precision = _DOUBLE):
    """Value of `act` at scalar `x`."""
    match act:
        case Squareplus(b=b):
            return squareplus(x, b, precision)
        case SoftplusStable():
            return softplus_stable(x, precision)
        case SoftplusNaive():
            return softplus_naive(x, precision)
        case Relu():
            return relu(x, precision)
        case Elu(alpha=alpha):
            return elu(x, alpha, precision)
        case Swish():
            return swish(x, precision)
    raise TypeError(f"not an activation: {act!r}")


def derivative(act: Activation, x, order: int = 1, precision: Precision = _DOUBLE):
    """First or second derivative of `act` at `x`.

    Only squareplus and the two softplus variants (which share the analytic
    derivative) provide them; other activations raise ``NotImplementedError``.
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    match act:
        case Squareplus(b=b):
            return (squareplus_d1 if order == 1 else squareplus_d2)(x, b, precision)
        case SoftplusStable() | SoftplusNaive():
            return (softplus_d1 if order == 1 else softplus_d2)(x, precision)
    raise NotImplementedError(f"no derivatives provided for {act.label}")
