"""Squareplus: an algebraic softplus-like rectifier, with batch kernels,
a runtime benchmark and numerical checks of its properties."""

__version__ = "0.1.0"

from .activations import (  # noqa: E402
    B_SOFTPLUS_MATCH,
    B_UNIT,
    Activation,
    DomainError,
    Elu,
    Precision,
    Relu,
    SoftplusNaive,
    SoftplusStable,
    Squareplus,
    Swish,
    elu,
    relu,
    rescale_b,
    softplus_naive,
    softplus_stable,
    squareplus,
    squareplus_d1,
    squareplus_d2,
    swish,
)
from .kernels import KernelMode, UsageError, apply, apply_in_place, checksum  # noqa: E402

__all__ = [
    "B_SOFTPLUS_MATCH",
    "B_UNIT",
    "Activation",
    "DomainError",
    "Elu",
    "KernelMode",
    "Precision",
    "Relu",
    "SoftplusNaive",
    "SoftplusStable",
    "Squareplus",
    "Swish",
    "UsageError",
    "apply",
    "apply_in_place",
    "checksum",
    "elu",
    "relu",
    "rescale_b",
    "softplus_naive",
    "softplus_stable",
    "squareplus",
    "squareplus_d1",
    "squareplus_d2",
    "swish",
]
