"""Probability bounds for the event that sum_{n<=x} f(n)/n fails to stay positive.

Every bound is returned as a :class:`LogReal`. The split is

    P(fail for some x >= N0) <= P(Euler product small) + P(smooth tail large),

with the Euler-product side handled by a Chernoff moment bound at x = N0
plus a drift bound for primes beyond N0, and the tail side by a 2k-th
moment bound summed over all truncation points x >= N0.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import N0 as DEFAULT_N0
from .errors import BoundsError, ConstraintError, DomainError
from .numerics import (
    LN2,
    LogReal,
    accurate_sum,
    avg_power_factors,
    log_add,
    zeta,
)
from .primes import PrimeTable, sieve

DEFAULT_ZETA_CUTOFF = 10**7
COMPONENT_LOG10_THRESHOLD = math.log10(5.0) - 46.0
TOTAL_LOG10_THRESHOLD = -45.0
EULER_SLACK = 0.05


@dataclass(frozen=True)
class BoundParams:
    lam: float = 700.0
    delta: float = 0.12
    k: int = 48
    sigma: float = 1.42
    R: int = 10_000
    ell: float = 0.9999
    N0: int = DEFAULT_N0

    def constraints(self) -> list[tuple[str, bool]]:
        lam, delta, k, sigma, R, ell = self.lam, self.delta, self.k, self.sigma, self.R, self.ell
        sigma_ok = 1.0 < sigma < 2.0
        return [
            ("lambda>0", lam > 0),
            ("lambda<=N0/10", lam <= self.N0 / 10),
            ("0<delta<1", 0.0 < delta < 1.0),
            ("k>=1", k >= 1 and int(k) == k),
            ("1<sigma<2", sigma_ok),
            ("R>=2", R >= 2 and int(R) == R),
            ("2R^sigma>k^2", sigma_ok and R >= 1 and 2.0 * R**sigma > k * k),
            ("k(2-sigma)>1", k * (2.0 - sigma) > 1.0),
            ("1/2<ell<1", 0.5 < ell < 1.0),
        ]

    @property
    def valid(self) -> bool:
        return all(ok for _, ok in self.constraints())

    def check(self) -> None:
        for name, ok in self.constraints():
            if not ok:
                raise ConstraintError(name)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d


def log_P_lambda(lam: float, table: PrimeTable) -> LogReal:
    """ln of prod_{p <= 10 lam} ((1+1/p)^lam + (1-1/p)^lam)/2."""
    if 10 * lam > table.limit:
        raise BoundsError(f"need primes up to {10 * lam}, table has {table.limit}")
    ps = table.primes_upto(10 * lam)
    if ps.size == 0:
        return LogReal(0.0)
    return LogReal(accurate_sum(avg_power_factors(ps, lam)))


def euler_lower_tail_bound(lam: float, delta: float, x: float, table: PrimeTable) -> LogReal:
    """Upper bound on P(prod_{p<=x} (1 - f(p)/p)^-1 <= delta).

    Markov's inequality on the lam-th moment of the reciprocal product; the
    primes beyond 10*lam contribute at most exp(lam/20).
    """
    if not lam <= x / 10:
        raise ConstraintError("lambda<=x/10", f"lambda={lam} exceeds x/10={x / 10}")
    if delta <= 0:
        raise DomainError(f"delta must be positive, got {delta}")
    ln_p = log_P_lambda(lam, table).ln
    return LogReal(ln_p - lam * math.log(1.0 / delta) + EULER_SLACK * lam)


def drift_exponent(x: float, ell: float) -> float:
    return x * math.log(1.0 / ell) ** 2 / 20.0


def drift_bound(x: float, ell: float) -> LogReal:
    """3 exp(-x (ln 1/ell)^2 / 20): chance the product over primes in (x, x+y]
    ever drops to ell."""
    if not 0.5 < ell < 1.0:
        raise ConstraintError("1/2<ell<1", f"ell={ell} not in (1/2, 1)")
    if x <= 0:
        raise DomainError(f"x must be positive, got {x}")
    return LogReal(math.log(3.0) - drift_exponent(x, ell))


def product_components(params: BoundParams, table: PrimeTable) -> tuple[LogReal, LogReal]:
    """(Chernoff term at N0 with threshold delta/ell, drift term beyond N0)."""
    euler = euler_lower_tail_bound(params.lam, params.delta / params.ell, params.N0, table)
    drift = drift_bound(params.N0, params.ell)
    return euler, drift


def product_always_large_bound(params: BoundParams, table: PrimeTable) -> LogReal:
    """Bound on P(the Euler product is <= delta for some x >= N0)."""
    euler, drift = product_components(params, table)
    return log_add(euler, drift)


def _log_small_prime_factors(ps: np.ndarray, k: int, sigma: float) -> np.ndarray:
    q = ps ** (-sigma / 2.0)
    return np.logaddexp(-2 * k * np.log1p(-q), -2 * k * np.log1p(q)) - LN2


def log_S(
    R: int,
    k: int,
    sigma: float,
    table: PrimeTable,
    zeta_cutoff: int = DEFAULT_ZETA_CUTOFF,
) -> LogReal:
    """ln S(R, k, sigma), the moment constant of the smooth tail.

    The product over p > R is evaluated as
    (zeta(sigma) / prod_{p<=R} (1 - p^-sigma)^-1)^(2k^2+2k) with the upper end
    of the zeta enclosure, so the result is an upper bound.
    """
    if sigma <= 1:
        raise ConstraintError("1<sigma<2", f"sigma={sigma} must exceed 1")
    if R < 2:
        raise DomainError("R must be >= 2")
    if not 2.0 * R**sigma > k * k:
        raise ConstraintError("2R^sigma>k^2")
    ps = table.primes_upto(R).astype(np.float64)
    small = accurate_sum(_log_small_prime_factors(ps, k, sigma))
    ln_partial_zeta = accurate_sum(-np.log1p(-(ps ** (-sigma))))
    z = zeta(float(sigma), int(zeta_cutoff))
    large = (2 * k * k + 2 * k) * (math.log(z.upper) - ln_partial_zeta)
    return LogReal(small + large)


def tail_single_bound(
    x: float,
    delta: float,
    k: int,
    sigma: float,
    R: int,
    table: PrimeTable,
    zeta_cutoff: int = DEFAULT_ZETA_CUTOFF,
) -> LogReal:
    """Bound on P(S_x >= delta) at a single truncation point x."""
    if x <= 0 or delta <= 0:
        raise DomainError("x and delta must be positive")
    ls = log_S(R, k, sigma, table, zeta_cutoff).ln
    return LogReal(ls - 2 * k * math.log(delta) - k * (2.0 - sigma) * math.log(x))


def union_sum_ln(a: float, start: float, rigorous: bool = False) -> float:
    """ln of a closed-form bound for sum_{x >= start} x^-a, a > 1.

    The default is start^(1-a)/(a-1). ``rigorous=True`` adds the first term
    explicitly: start^-a + start^(1-a)/(a-1).
    """
    if a <= 1:
        raise ConstraintError("k(2-sigma)>1")
    base = (1.0 - a) * math.log(start) - math.log(a - 1.0)
    if not rigorous:
        return base
    return log_add(LogReal(base), LogReal(-a * math.log(start))).ln


def tail_union_bound(
    params: BoundParams,
    table: PrimeTable,
    zeta_cutoff: int = DEFAULT_ZETA_CUTOFF,
) -> LogReal:
    """Bound on P(S_x > delta for some x >= N0) by the union bound."""
    k, sigma = params.k, params.sigma
    a = k * (2.0 - sigma)
    if not a > 1:
        raise ConstraintError("k(2-sigma)>1", f"k(2-sigma)={a} <= 1")
    ls = log_S(params.R, k, sigma, table, zeta_cutoff).ln
    return LogReal(ls - 2 * k * math.log(params.delta) + union_sum_ln(a, params.N0))


def bernstein_bound(variance_sum: float, M: float, t: float) -> LogReal:
    """exp(-(t^2/2) / (variance_sum + M t / 3)) for sums of mean-zero |X_i| <= M."""
    if t <= 0 or M <= 0:
        raise DomainError("Bernstein bound needs t > 0 and M > 0")
    if variance_sum < 0:
        raise DomainError("variance_sum must be nonnegative")
    return LogReal(-(t * t / 2.0) / (variance_sum + M * t / 3.0))


@dataclass
class BoundReport:
    params: BoundParams
    constraints: list[tuple[str, bool]]
    log10_product_bound: float | None = None
    log10_drift_bound: float | None = None
    log10_tail_bound: float | None = None
    log10_total: float | None = None
    pass_product: bool = False
    pass_tail: bool = False
    pass_total: bool = False
    extras: dict = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return all(ok for _, ok in self.constraints)

    def to_dict(self) -> dict:
        p = self.params
        return {
            "lambda": p.lam,
            "delta": p.delta,
            "k": p.k,
            "sigma": p.sigma,
            "R": p.R,
            "ell": p.ell,
            "log10_product_bound": self.log10_product_bound,
            "log10_drift_bound": self.log10_drift_bound,
            "log10_tail_bound": self.log10_tail_bound,
            "log10_total": self.log10_total,
            "constraints": [{"name": n, "ok": ok} for n, ok in self.constraints],
            "pass_product": self.pass_product,
            "pass_tail": self.pass_tail,
            "pass_total": self.pass_total,
        }


def verify_bound(
    params: BoundParams | None = None,
    table: PrimeTable | None = None,
    zeta_cutoff: int = DEFAULT_ZETA_CUTOFF,
) -> BoundReport:
    """Evaluate all three components and the total at ``params``.

    An invalid parameter set yields a report with the failing constraints
    flagged and no bound values.
    """
    params = params or BoundParams()
    report = BoundReport(params=params, constraints=params.constraints())
    if not report.valid:
        return report
    if table is None or table.limit < max(10 * params.lam, params.R):
        table = sieve(max(int(math.ceil(10 * params.lam)), int(params.R), 2))

    euler, drift = product_components(params, table)
    product = log_add(euler, drift)
    tail = tail_union_bound(params, table, zeta_cutoff)
    total = log_add(product, tail)

    report.log10_product_bound = euler.log10
    report.log10_drift_bound = drift.log10
    report.log10_tail_bound = tail.log10
    report.log10_total = total.log10
    report.pass_product = product.log10 <= COMPONENT_LOG10_THRESHOLD
    report.pass_tail = tail.log10 <= COMPONENT_LOG10_THRESHOLD
    report.pass_total = total.log10 <= TOTAL_LOG10_THRESHOLD
    report.extras["log10_product_always_large"] = product.log10
    return report


def total_bound(params: BoundParams, table: PrimeTable, zeta_cutoff: int = DEFAULT_ZETA_CUTOFF) -> LogReal:
    """Sum of the three components; raises on invalid parameters."""
    params.check()
    return log_add(product_always_large_bound(params, table), tail_union_bound(params, table, zeta_cutoff))


__all__ = [
    "BoundParams",
    "BoundReport",
    "COMPONENT_LOG10_THRESHOLD",
    "DEFAULT_ZETA_CUTOFF",
    "TOTAL_LOG10_THRESHOLD",
    "bernstein_bound",
    "drift_bound",
    "drift_exponent",
    "euler_lower_tail_bound",
    "log_P_lambda",
    "log_S",
    "product_always_large_bound",
    "product_components",
    "tail_single_bound",
    "tail_union_bound",
    "total_bound",
    "union_sum_ln",
    "verify_bound",
]
