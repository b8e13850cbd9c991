"""Tabulated arithmetic functions and Dirichlet convolution."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BoundsError, ContractError
from .numerics import accurate_sum, compensated_cumsum
from .primes import PrimeTable, factorize, sieve


@dataclass(frozen=True, eq=False)
class ArithmeticSequence:
    """Values of an arithmetic function on 1..limit.

    ``values[n]`` is the value at n; ``values[0]`` is unused and kept at 0.
    """

    limit: int
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.limit + 1,):
            raise ValueError(f"values must have length limit+1={self.limit + 1}")

    def __getitem__(self, n):
        return self.values[n]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ArithmeticSequence):
            return NotImplemented
        return self.limit == other.limit and np.array_equal(self.values, other.values)

    def truncate(self, limit: int) -> "ArithmeticSequence":
        if limit > self.limit:
            raise BoundsError(f"cannot extend sequence from {self.limit} to {limit}")
        return ArithmeticSequence(limit, self.values[: limit + 1].copy())

    def tolist(self) -> list:
        return self.values[1:].tolist()


def _table_for(limit: int, table: PrimeTable | None) -> PrimeTable:
    if table is None:
        return sieve(max(limit, 2))
    if limit > table.limit:
        raise BoundsError(f"limit {limit} exceeds table limit {table.limit}")
    return table


def liouville(limit: int, table: PrimeTable | None = None) -> ArithmeticSequence:
    table = _table_for(limit, table)
    om = table.big_omega[: limit + 1]
    vals = np.where(om % 2 == 0, 1, -1).astype(np.int64)
    vals[0] = 0
    return ArithmeticSequence(limit, vals)


def moebius_abs(limit: int, table: PrimeTable | None = None) -> ArithmeticSequence:
    table = _table_for(limit, table)
    vals = np.ones(limit + 1, dtype=np.int64)
    vals[0] = 0
    for p in table.primes_upto(math.isqrt(limit)):
        vals[p * p :: p * p] = 0
    return ArithmeticSequence(limit, vals)


def constant_one(limit: int) -> ArithmeticSequence:
    vals = np.ones(limit + 1, dtype=np.int64)
    vals[0] = 0
    return ArithmeticSequence(limit, vals)


def dirichlet_convolve(a: ArithmeticSequence, b: ArithmeticSequence, limit: int) -> ArithmeticSequence:
    """(a*b)(n) = sum_{d | n} a(d) b(n/d) for n <= limit."""
    if a.limit < limit or b.limit < limit:
        raise BoundsError("both sequences must extend to the requested limit")
    av, bv = a.values, b.values
    integral = np.issubdtype(av.dtype, np.integer) and np.issubdtype(bv.dtype, np.integer)
    out = np.zeros(limit + 1, dtype=np.int64 if integral else np.float64)
    for d in range(1, limit + 1):
        ad = av[d]
        if ad == 0:
            continue
        m = limit // d
        out[d : d * m + 1 : d] += ad * bv[1 : m + 1]
    return ArithmeticSequence(limit, out)


def check_completely_multiplicative(
    f: ArithmeticSequence, samples: int = 1000, seed: int = 0
) -> None:
    """Spot-check that f is +-1 valued with f(1) = 1 and f(ab) = f(a) f(b).

    Raises ContractError on the first failure found.
    """
    v = f.values
    if f.limit >= 1 and v[1] != 1:
        raise ContractError("f(1) must be 1")
    if not np.all(np.abs(v[1:]) == 1):
        raise ContractError("f must take values in {+1, -1}")
    if f.limit < 4:
        return
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        # log-uniform first factor so both small and large products get tested
        a = int(math.exp(rng.uniform(math.log(2), math.log(f.limit // 2))))
        b = int(rng.integers(2, f.limit // a + 1))
        if v[a * b] != v[a] * v[b]:
            raise ContractError(f"f({a * b}) != f({a}) f({b})")


def convolution_g(
    f: ArithmeticSequence, limit: int | None = None, table: PrimeTable | None = None
) -> ArithmeticSequence:
    """g = f * |mu|; nonnegative when f is completely multiplicative and +-1 valued."""
    limit = f.limit if limit is None else limit
    f = f.truncate(limit)
    check_completely_multiplicative(f)
    return dirichlet_convolve(f, moebius_abs(limit, _table_for(limit, table)), limit)


def divisor_count_prime_power(j: int, m: int) -> int:
    """d_j(p^m) = C(m + j - 1, j - 1)."""
    return math.comb(m + j - 1, j - 1)


def divisor_count(j: int, n: int, table: PrimeTable) -> int:
    """Number of ordered factorisations of n into j positive integers."""
    if j < 1:
        raise ValueError("j must be >= 1")
    out = 1
    for m in factorize(n, table).values():
        out *= divisor_count_prime_power(j, m)
    return out


def divisor_remark_violations(kmax: int = 6, mmax: int = 12) -> list[tuple[int, int]]:
    """(k, m) pairs with d_{2k}(p^{2m}) > d_{2k^2+2k}(p^m); expected empty."""
    bad = []
    for k in range(1, kmax + 1):
        for m in range(1, mmax + 1):
            if divisor_count_prime_power(2 * k, 2 * m) > divisor_count_prime_power(2 * k * k + 2 * k, m):
                bad.append((k, m))
    return bad


def harmonic_partial_sums(f: ArithmeticSequence, xmax: int | None = None) -> np.ndarray:
    """Array s with s[x] = sum_{n<=x} f(n)/n for 1 <= x <= xmax (s[0] = 0)."""
    xmax = f.limit if xmax is None else xmax
    n = np.arange(1, xmax + 1, dtype=np.float64)
    out = np.zeros(xmax + 1)
    out[1:] = compensated_cumsum(f.values[1 : xmax + 1] / n)
    return out


def turan_identity_check(f: ArithmeticSequence, x: int, table: PrimeTable | None = None) -> float:
    """|sum_{n<=x} f(n)/n - sum_{m<=x} g(m)/m sum_{l<=x/m} lambda(l)/l| with g = f*|mu|."""
    if x > f.limit:
        raise BoundsError(f"x={x} exceeds sequence limit {f.limit}")
    table = _table_for(x, table)
    fx = f.truncate(x)
    n = np.arange(1, x + 1, dtype=np.float64)
    lhs = accurate_sum(fx.values[1:] / n)
    g = convolution_g(fx, x, table)
    lam_sums = harmonic_partial_sums(liouville(x, table))
    m = np.arange(1, x + 1)
    rhs = accurate_sum(g.values[1:] / n * lam_sums[x // m])
    return abs(lhs - rhs)
