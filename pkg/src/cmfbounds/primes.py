"""Prime tables, smooth-number enumeration and prime power sums."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

import numpy as np

from .errors import BoundsError, CapacityError, DivergenceError, DomainError
from .numerics import Enclosure, accurate_sum

MAX_SIEVE_LIMIT = 10**8
DEFAULT_SMOOTH_CAP = 10**7


@dataclass(frozen=True, eq=False)
class PrimeTable:
    """All primes up to ``limit`` plus the smallest-prime-factor array.

    ``spf[n]`` is the least prime dividing ``n`` for ``2 <= n <= limit``;
    ``spf[1] == 1`` and ``spf[0] == 0``.
    """

    limit: int
    primes: np.ndarray
    spf: np.ndarray

    def primes_upto(self, bound: float) -> np.ndarray:
        if bound > self.limit:
            raise BoundsError(f"table limit {self.limit} < requested {bound}")
        return self.primes[: np.searchsorted(self.primes, math.floor(bound), side="right")]

    def pi(self, bound: float) -> int:
        return int(self.primes_upto(bound).size)

    def is_prime(self, n: int) -> bool:
        if n > self.limit:
            raise BoundsError(f"{n} exceeds table limit {self.limit}")
        return n >= 2 and int(self.spf[n]) == n

    @cached_property
    def cofactor(self) -> np.ndarray:
        """n // spf[n], with cofactor[1] = 1."""
        n = np.arange(self.limit + 1, dtype=np.int64)
        out = np.ones(self.limit + 1, dtype=np.int64)
        out[2:] = n[2:] // self.spf[2:]
        out[0] = 0
        return out

    @cached_property
    def big_omega(self) -> np.ndarray:
        """Number of prime factors counted with multiplicity, by level."""
        om = np.zeros(self.limit + 1, dtype=np.int16)
        cof = self.cofactor
        remaining = np.arange(2, self.limit + 1)
        done = np.zeros(self.limit + 1, dtype=bool)
        done[0:2] = True
        while remaining.size:
            ready = done[cof[remaining]]
            idx = remaining[ready]
            om[idx] = om[cof[idx]] + 1
            done[idx] = True
            remaining = remaining[~ready]
        return om

    @cached_property
    def omega_levels(self) -> list[np.ndarray]:
        """Indices n >= 2 grouped by big omega, ascending.

        Level j holds every n with Omega(n) = j + 1, so a completely
        multiplicative function can be tabulated level by level from its
        prime values: f(n) = f(spf[n]) * f(cofactor[n]).
        """
        om = self.big_omega[2:]
        order = np.argsort(om, kind="stable")
        counts = np.bincount(om)[1:]
        idx = order + 2
        return np.split(idx, np.cumsum(counts)[:-1])


def sieve(limit: int, max_limit: int = MAX_SIEVE_LIMIT) -> PrimeTable:
    """Smallest-prime-factor sieve over 1..limit."""
    limit = int(limit)
    if not 2 <= limit <= max_limit:
        raise BoundsError(f"sieve limit must be in [2, {max_limit}], got {limit}")
    dtype = np.int32 if limit < 2**31 else np.int64
    spf = np.zeros(limit + 1, dtype=dtype)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            tail = spf[p * p :: p]
            tail[tail == 0] = p
    idx = np.flatnonzero(spf == 0)
    spf[idx] = idx
    spf[0] = 0
    spf[1] = 1
    primes = np.flatnonzero(spf[2:] == np.arange(2, limit + 1)) + 2
    spf.setflags(write=False)
    primes = primes.astype(np.int64)
    primes.setflags(write=False)
    return PrimeTable(limit=limit, primes=primes, spf=spf)


def largest_prime_factor(n: int, table: PrimeTable) -> int:
    if n < 2:
        raise DomainError(f"largest prime factor undefined for n={n}")
    if n > table.limit:
        raise BoundsError(f"{n} exceeds table limit {table.limit}")
    p = 1
    while n > 1:
        p = int(table.spf[n])
        n //= p
    return p


def factorize(n: int, table: PrimeTable) -> dict[int, int]:
    if n > table.limit:
        raise BoundsError(f"{n} exceeds table limit {table.limit}")
    out: dict[int, int] = {}
    while n > 1:
        p = int(table.spf[n])
        out[p] = out.get(p, 0) + 1
        n //= p
    return out


def iter_smooth(primes, upper: float) -> Iterator[tuple[int, int]]:
    """Yield (n, parity_mask) for every 1 <= n <= upper built from ``primes``.

    Bit j of ``parity_mask`` is the parity of the exponent of primes[j] in n.
    Depth-first over nondecreasing prime factors, so every n appears once;
    the order is not sorted. n = 1 is included.
    """
    ps = [int(p) for p in primes]
    upper = math.floor(upper)
    if upper < 1:
        return
    stack = [(1, 0, 0)]
    while stack:
        n, start, mask = stack.pop()
        yield n, mask
        for j in range(start, len(ps)):
            m = n * ps[j]
            if m > upper:
                break
            stack.append((m, j, mask ^ (1 << j)))


def smooth_numbers(
    smoothness: int,
    lower: float,
    upper: float,
    table: PrimeTable,
    cap: int = DEFAULT_SMOOTH_CAP,
) -> list[int]:
    """Integers n in (lower, upper] whose prime factors are all <= smoothness."""
    if smoothness < 2:
        raise DomainError("smoothness must be >= 2")
    ps = table.primes_upto(smoothness)
    out = []
    for n, _ in iter_smooth(ps, upper):
        if n > lower:
            out.append(n)
            if len(out) > cap:
                raise CapacityError(len(out), cap)
    out.sort()
    return out


def prime_power_sum(s: float, limit: int, table: PrimeTable) -> Enclosure:
    """Enclose sum over all primes of p**-s.

    lower is the finite sum over p <= limit; the tail over p > limit is at
    most sum_{n > limit} n**-s <= limit**(1-s)/(s-1).
    """
    if s <= 1:
        raise DivergenceError(f"prime power sum diverges for s={s} <= 1")
    ps = table.primes_upto(limit).astype(np.float64)
    lower = accurate_sum(ps ** (-s))
    tail = math.exp((1.0 - s) * math.log(max(limit, 1))) / (s - 1.0)
    return Enclosure(lower, lower + tail)
