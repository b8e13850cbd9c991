"""Rigorous bounds and simulations for partial sums of random completely
multiplicative functions, sum_{n<=x} f(n)/n."""

__version__ = "0.1.0"

N0 = 72_185_376_951_205

from .errors import (  # noqa: E402
    BoundsError,
    CapacityError,
    CmfBoundsError,
    ConstraintError,
    ContractError,
    DivergenceError,
    DomainError,
)
from .numerics import ZERO, Enclosure, LogReal, log_add, zeta  # noqa: E402
from .primes import PrimeTable, sieve  # noqa: E402
from .bounds import BoundParams, BoundReport, verify_bound  # noqa: E402

__all__ = [
    "N0",
    "BoundParams",
    "BoundReport",
    "BoundsError",
    "CapacityError",
    "CmfBoundsError",
    "ConstraintError",
    "ContractError",
    "DivergenceError",
    "DomainError",
    "Enclosure",
    "LogReal",
    "PrimeTable",
    "ZERO",
    "log_add",
    "sieve",
    "verify_bound",
    "zeta",
]
