"""Large-x versions of the product and tail bounds, and the parameter
schedule k, delta, sigma as functions of x."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import expi

from .bounds import EULER_SLACK
from .errors import ConstraintError, DomainError
from .numerics import LogReal, accurate_sum, log_add
from .primes import PrimeTable

# pi(t) < PI_UPPER * t / log t for all t > 1 (Rosser and Schoenfeld, 1962).
PI_UPPER = 1.25506
SCHEDULE_MIN_X = 1e6
DEFAULT_C0_GRID = (1e2, 1e3, 1e4)


def c1_threshold(x: float) -> float:
    """Smallest C1 with 2k LL - C1 k LL/2 + 100k <= -C1 k LL/3, LL = log log x."""
    ll = math.log(math.log(x))
    return 12.0 + 600.0 / ll


DEFAULT_C1 = float(math.ceil(c1_threshold(1e20)))


@dataclass(frozen=True)
class AsymptoticConstants:
    C0: float
    C1: float = DEFAULT_C1
    c: float | None = None

    def __post_init__(self):
        if self.c is None:
            object.__setattr__(self, "c", 1.0 / (4.0 * self.C0))
        for name in ("C0", "C1", "c"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive and finite, got {v}")


def c0_ratios(table: PrimeTable, lambda_grid: Sequence[float]) -> list[float]:
    """prod_{p<=10 lam} (1+1/p) / log lam for each lam."""
    out = []
    for lam in lambda_grid:
        if lam <= 1:
            raise DomainError("grid values must exceed 1")
        ps = table.primes_upto(10 * lam).astype(np.float64)
        out.append(math.exp(accurate_sum(np.log1p(1.0 / ps))) / math.log(lam))
    return out


def estimate_C0(table: PrimeTable, lambda_grid: Sequence[float] = DEFAULT_C0_GRID) -> float:
    """Smallest C0 with prod_{p<=10 lam}(1+1/p) <= C0 log lam on the grid.

    An empirical witness on finitely many lam, not a proof for all lam.
    """
    if len(lambda_grid) == 0:
        raise DomainError("lambda grid is empty")
    return max(c0_ratios(table, lambda_grid))


@dataclass(frozen=True)
class AsymProductBound:
    bound: LogReal
    lam: float
    simplified_ln: float
    c: float
    vacuous: bool


def asym_product_bound(
    delta: float,
    x: float,
    constants: AsymptoticConstants,
    table: PrimeTable | None = None,
    min_delta_factor: float = 1.0,
) -> AsymProductBound:
    """Chernoff bound with lam = exp(1/(2 C0 delta)) and P_lam <= (C0 log lam)^lam.

    ``min_delta_factor`` makes the requirement delta >> 1/log x concrete:
    delta >= min_delta_factor / log x.
    """
    if not delta >= min_delta_factor / math.log(x):
        raise ConstraintError("delta>=1/log x", f"delta={delta} below {min_delta_factor}/log x")
    C0 = constants.C0
    lam = math.exp(1.0 / (2.0 * C0 * delta))
    if lam > x / 10:
        raise ConstraintError("lambda<=x/10", f"x too small for this delta (lambda={lam:.3g})")
    if lam < 2:
        # (C0 log lam)^lam is only witnessed for lam on the C0 grid; below 2 the
        # product over p <= 10 lam is at least 1 and nothing useful follows.
        return AsymProductBound(LogReal(0.0), lam, 0.0, constants.c, True)
    ln_bound = lam * math.log(C0 * math.log(lam)) - lam * math.log(1.0 / delta) + EULER_SLACK * lam
    return AsymProductBound(LogReal(ln_bound), lam, -lam / 2.0, constants.c, False)


def prime_sum_upper(s: float, R: float, table: PrimeTable) -> float:
    """Upper bound for sum_{p<=R} p^-s with 0 < s < 1.

    Exact over the table; beyond it, partial summation against
    pi(t) < 1.25506 t/log t.
    """
    if not 0 < s < 1:
        raise DomainError("prime_sum_upper expects 0 < s < 1")
    L = table.limit
    if R <= L:
        ps = table.primes_upto(R).astype(np.float64)
        return accurate_sum(ps ** (-s))
    ps = table.primes.astype(np.float64)
    head = accurate_sum(ps ** (-s))
    a = 1.0 - s
    lnR, lnL = math.log(R), math.log(L)
    boundary = PI_UPPER * math.exp(a * lnR) / lnR - ps.size * math.exp(-s * lnL)
    integral = s * PI_UPPER * (expi(a * lnR) - expi(a * lnL))
    return float(head + boundary + integral)


def tail_cutoff(k: int, sigma: float) -> int:
    return max(1, math.ceil(k ** (2.0 / sigma)))


def asym_tail_bound(
    x: float,
    delta: float,
    k: int,
    sigma: float,
    table: PrimeTable,
    exponent: str = "full",
) -> LogReal:
    """exp(16 k^(2/sigma) + 4k sum_{p<=R} p^(-sigma/2)) / (delta^2k x^(k e)), R = k^(2/sigma).

    ``exponent='full'`` uses e = 2 - sigma, which the moment bound supports;
    ``'half'`` uses the weaker e = 1 - sigma/2 for comparison.
    """
    if not 1.5 < sigma < 2:
        raise ConstraintError("3/2<sigma<2", f"sigma={sigma} not in (3/2, 2)")
    if k < 1:
        raise DomainError("k must be >= 1")
    if exponent == "full":
        e = 2.0 - sigma
    elif exponent == "half":
        e = 1.0 - sigma / 2.0
    else:
        raise DomainError(f"unknown exponent variant {exponent!r}")
    R = tail_cutoff(k, sigma)
    psum = prime_sum_upper(sigma / 2.0, R, table) if R >= 2 else 0.0
    ln_bound = (
        -2 * k * math.log(delta)
        - k * e * math.log(x)
        + 16.0 * k ** (2.0 / sigma)
        + 4.0 * k * psum
    )
    return LogReal(ln_bound)


@dataclass(frozen=True)
class Schedule:
    k: int
    delta: float
    sigma: float


def growth_schedule(x: float, C1: float = DEFAULT_C1) -> Schedule:
    """k = x^(1/log log x), delta = log log x / log x, sigma = 2 - C1 log log x / log x."""
    if not x >= SCHEDULE_MIN_X:
        raise DomainError(f"schedule needs x >= {SCHEDULE_MIN_X:g}")
    L = math.log(x)
    LL = math.log(L)
    k = max(1, int(round(math.exp(L / LL))))
    return Schedule(k=k, delta=LL / L, sigma=2.0 - C1 * LL / L)


@dataclass
class LargeXResult:
    x: float
    schedule: Schedule
    constants: AsymptoticConstants
    product: AsymProductBound
    tail_display: LogReal
    total: LogReal
    implied_C: float | None
    display_holds: bool
    sigma_in_range: bool
    moment_tail: LogReal | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        s = self.schedule
        return {
            "x": self.x,
            "k": s.k,
            "delta": s.delta,
            "sigma": s.sigma,
            "log10_product_bound": self.product.bound.log10,
            "log10_tail_bound": self.tail_display.log10,
            "log10_total": self.total.log10,
            "implied_C": self.implied_C,
            "C0": self.constants.C0,
            "C1": self.constants.C1,
            "c": self.constants.c,
            "lambda": self.product.lam,
            "display_inequality_holds": self.display_holds,
            "c1_threshold": c1_threshold(self.x),
            "sigma_in_range": self.sigma_in_range,
            "log10_moment_tail_bound": None if self.moment_tail is None else self.moment_tail.log10,
            "notes": self.notes,
        }


def implied_constant(x: float, ln_bound: float) -> float | None:
    """C with exp(-exp(log x / (C log log x))) equal to the bound, if ln_bound < -1."""
    if not ln_bound < -1:
        return None
    L = math.log(x)
    return L / (math.log(L) * math.log(-ln_bound))


def large_x_bound(x: float, constants: AsymptoticConstants, table: PrimeTable) -> LargeXResult:
    """Product bound at the scheduled delta plus the tail term exp(-C1 k LL/3)."""
    sched = growth_schedule(x, constants.C1)
    prod = asym_product_bound(sched.delta, x, constants, table)
    LL = math.log(math.log(x))
    tail = LogReal(-constants.C1 * sched.k * LL / 3.0)
    total = log_add(prod.bound, tail)
    in_range = 1.5 < sched.sigma < 2.0
    notes = []
    moment_tail = None
    if in_range:
        moment_tail = asym_tail_bound(x, sched.delta, sched.k, sched.sigma, table)
    else:
        notes.append("scheduled sigma outside (3/2, 2); moment tail bound not applicable")
    display_holds = constants.C1 >= c1_threshold(x)
    if not display_holds:
        notes.append("C1 below the threshold for the final tail inequality at this x")
    return LargeXResult(
        x=x,
        schedule=sched,
        constants=constants,
        product=prod,
        tail_display=tail,
        total=total,
        implied_C=implied_constant(x, total.ln),
        display_holds=display_holds,
        sigma_in_range=in_range,
        moment_tail=moment_tail,
        notes=notes,
    )


def loglog_sum_diagnostic(sigma: float, R: float, table: PrimeTable) -> tuple[float, float, bool]:
    """(4 sum_{p<=R} p^(-sigma/2), 5 log log R, whether the first is <= the second)."""
    lhs = 4.0 * prime_sum_upper(sigma / 2.0, R, table)
    rhs = 5.0 * math.log(math.log(R))
    return lhs, rhs, lhs <= rhs
