"""Seeded Monte Carlo and exact enumeration over random completely
multiplicative functions.

Signs f(p) come from a counter-based hash of (seed, p), so any prime's sign
is reproducible on its own, independent of how many other primes were drawn.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np

from .arith import ArithmeticSequence
from .bounds import drift_bound
from .errors import BoundsError, DomainError
from .numerics import LN2, accurate_sum, compensated_cumsum
from .primes import PrimeTable, iter_smooth

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
DEFAULT_CAP = 1e12


# -- counter-based signs ---------------------------------------------------

def _splitmix_int(z: int) -> int:
    z = (z + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _splitmix_array(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = z + np.uint64(_GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


def derive_seed(seed: int, index: int) -> int:
    """Independent 64-bit seed for trial ``index`` of a run seeded with ``seed``."""
    return _splitmix_int((_splitmix_int(seed & MASK64) ^ _splitmix_int(index & MASK64)) & MASK64)


def prime_signs(seed: int, primes) -> np.ndarray:
    """f(p) in {+1, -1} as int8 for each p, keyed only by (seed, p)."""
    key = np.uint64(_splitmix_int(seed & MASK64))
    p = np.asarray(primes, dtype=np.uint64)
    h = _splitmix_array(p ^ key)
    return np.where(h >> np.uint64(63), -1, 1).astype(np.int8)


def prime_signs_matrix(seeds: Sequence[int], primes) -> np.ndarray:
    """Rows of ``prime_signs`` for several seeds at once."""
    keys = np.array([_splitmix_int(s & MASK64) for s in seeds], dtype=np.uint64)
    p = np.asarray(primes, dtype=np.uint64)
    h = _splitmix_array(p[None, :] ^ keys[:, None])
    return np.where(h >> np.uint64(63), -1, 1).astype(np.int8)


# -- the random function ---------------------------------------------------

@dataclass(eq=False)
class RandomCMF:
    """A completely multiplicative f with f(p) = +-1.

    ``values`` tabulates f on 0..value_limit (index 0 unused). Signs of primes
    beyond ``prime_limit`` are still available lazily through :meth:`sign`
    when the function was built from a seed.
    """

    seed: int | None
    prime_limit: int
    primes: np.ndarray
    signs: np.ndarray
    value_limit: int
    values: np.ndarray | None
    table: PrimeTable = field(repr=False)

    def sign(self, p: int) -> int:
        i = int(np.searchsorted(self.primes, p))
        if i < self.primes.size and self.primes[i] == p:
            return int(self.signs[i])
        if self.seed is None:
            raise BoundsError(f"no sign stored for p={p}")
        return int(prime_signs(self.seed, [p])[0])

    def as_sequence(self) -> ArithmeticSequence:
        if self.values is None:
            raise BoundsError("function values were not tabulated")
        return ArithmeticSequence(self.value_limit, self.values.astype(np.int64))

    def __call__(self, n: int) -> int:
        if self.values is not None and n <= self.value_limit:
            return int(self.values[n])
        out = 1
        while n > 1:
            if n > self.table.limit:
                raise BoundsError(f"cannot factor {n} beyond table limit")
            p = int(self.table.spf[n])
            out *= self.sign(p)
            n //= p
        return out


def _tabulate(table: PrimeTable, primes: np.ndarray, signs: np.ndarray, value_limit: int) -> np.ndarray:
    by_index = np.zeros(value_limit + 1, dtype=np.int8)
    keep = primes <= value_limit
    by_index[primes[keep]] = signs[keep]
    vals = np.zeros(value_limit + 1, dtype=np.int8)
    if value_limit >= 1:
        vals[1] = 1
    spf, cof = table.spf, table.cofactor
    for level in table.omega_levels:
        if value_limit < table.limit:
            level = level[level <= value_limit]
        if level.size == 0:
            continue
        vals[level] = by_index[spf[level]] * vals[cof[level]]
    return vals


def _check_limits(table: PrimeTable, prime_limit: int, value_limit: int) -> None:
    if prime_limit > table.limit or value_limit > table.limit:
        raise BoundsError(f"limits ({prime_limit}, {value_limit}) exceed table limit {table.limit}")


def sample_cmf(seed: int, prime_limit: int, value_limit: int, table: PrimeTable) -> RandomCMF:
    _check_limits(table, prime_limit, value_limit)
    primes = table.primes_upto(max(prime_limit, value_limit))
    signs = prime_signs(seed, primes)
    vals = _tabulate(table, primes, signs, value_limit)
    return RandomCMF(seed, prime_limit, primes, signs, value_limit, vals, table)


def cmf_from_signs(
    signs: Mapping[int, int] | Callable[[int], int],
    prime_limit: int,
    value_limit: int,
    table: PrimeTable,
    default: int = 1,
) -> RandomCMF:
    """Deterministic f from explicit prime values; unspecified primes get ``default``."""
    _check_limits(table, prime_limit, value_limit)
    primes = table.primes_upto(max(prime_limit, value_limit))
    if callable(signs):
        s = np.array([signs(int(p)) for p in primes], dtype=np.int8)
    else:
        s = np.array([signs.get(int(p), default) for p in primes], dtype=np.int8)
    if not np.all(np.abs(s) == 1):
        raise DomainError("prime values must be +1 or -1")
    vals = _tabulate(table, primes, s, value_limit)
    return RandomCMF(None, prime_limit, primes, s, value_limit, vals, table)


def liouville_cmf(limit: int, table: PrimeTable) -> RandomCMF:
    return cmf_from_signs({}, limit, limit, table, default=-1)


# -- single-function quantities -------------------------------------------

def partial_sum(f: RandomCMF, x: int) -> float:
    """sum_{n<=x} f(n)/n."""
    if x > f.value_limit:
        raise BoundsError(f"x={x} exceeds tabulated range {f.value_limit}")
    n = np.arange(1, x + 1, dtype=np.float64)
    return accurate_sum(f.values[1 : x + 1] / n)


def euler_product(f: RandomCMF, x: int) -> float:
    """prod_{p<=x} (1 - f(p)/p)^-1."""
    if x > max(f.prime_limit, f.value_limit):
        raise BoundsError(f"x={x} exceeds prime range {f.prime_limit}")
    m = np.searchsorted(f.primes, x, side="right")
    p = f.primes[:m].astype(np.float64)
    return math.exp(accurate_sum(-np.log1p(-f.signs[:m] / p)))


def rankin_tail(x: int, cap: float, table: PrimeTable, eps_grid: Sequence[float] | None = None) -> float:
    """Upper bound for sum_{n > cap, P(n) <= x} 1/n.

    For 0 < eps < 1 each such n has (n/cap)^eps >= 1, so the sum is at most
    cap^-eps * prod_{p<=x} (1 - p^(eps-1))^-1. Minimised over ``eps_grid``.
    """
    if x < 2 or cap <= x:
        raise DomainError("need x >= 2 and cap > x")
    grid = eps_grid or [j / 10 for j in range(1, 10)]
    ps = table.primes_upto(x).astype(np.float64)
    best = math.inf
    for eps in grid:
        ln_val = -eps * math.log(cap) + accurate_sum(-np.log1p(-(ps ** (eps - 1.0))))
        best = min(best, math.exp(ln_val))
    return best


@lru_cache(maxsize=64)
def _smooth_buckets(x: int, cap: float, table: PrimeTable) -> tuple[np.ndarray, np.ndarray]:
    """Primes <= x and, per exponent-parity pattern, sum of 1/n over
    x-smooth n in (x, cap]."""
    ps = table.primes_upto(x)
    if ps.size > 16:
        raise DomainError(f"too many primes below {x} for bucketed enumeration")
    groups: list[list[float]] = [[] for _ in range(1 << ps.size)]
    for n, mask in iter_smooth(ps, cap):
        if n > x:
            groups[mask].append(1.0 / n)
    weights = np.array([math.fsum(g) for g in groups])
    return ps, weights


def _parity_characters(neg_masks: np.ndarray, nbits: int) -> np.ndarray:
    """chi[t, b] = (-1)^popcount(b & neg_masks[t])."""
    b = np.arange(1 << nbits, dtype=np.uint32)
    bits = np.bitwise_count(neg_masks[:, None].astype(np.uint32) & b[None, :])
    return 1.0 - 2.0 * (bits & 1)


def _neg_mask(signs: np.ndarray) -> np.ndarray:
    """Bitmask of primes with f(p) = -1, one row per trial."""
    signs = np.atleast_2d(signs)
    weights = (1 << np.arange(signs.shape[1])).astype(np.uint32)
    return ((signs < 0).astype(np.uint32) * weights).sum(axis=1).astype(np.uint32)


def smooth_tail(f: RandomCMF, x: int, cap: float = DEFAULT_CAP) -> tuple[float, float]:
    """(sum of f(n)/n over x-smooth n in (x, cap], certificate for the rest)."""
    ps, weights = _smooth_buckets(int(x), float(cap), f.table)
    signs = np.array([f.sign(int(p)) for p in ps], dtype=np.int8)
    chi = _parity_characters(_neg_mask(signs), ps.size)[0]
    return accurate_sum(weights * chi), rankin_tail(x, cap, f.table)


# -- reports ---------------------------------------------------------------

@dataclass
class ExperimentReport:
    name: str
    seed: int | None
    trials: int
    stats: dict
    passed: bool
    tolerance: str
    flags: list[str] = field(default_factory=list)
    rows: list[tuple[int, int, float]] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "experiment": self.name,
            "seed": self.seed,
            "trials": self.trials,
            "stats": self.stats,
            "pass": self.passed,
            "tolerance": self.tolerance,
            "flags": self.flags,
        }


def decomposition_residual(f: RandomCMF, x: int, cap: float = DEFAULT_CAP) -> ExperimentReport:
    """Check sum_{n<=x} f(n)/n == Euler product - smooth tail up to the certificate."""
    s = partial_sum(f, x)
    e = euler_product(f, x)
    tail, cert = smooth_tail(f, x, cap)
    residual = abs(s - (e - tail))
    return ExperimentReport(
        name="decomposition",
        seed=f.seed,
        trials=1,
        stats={
            "x": x,
            "cap": cap,
            "partial_sum": s,
            "euler_product": e,
            "smooth_tail": tail,
            "residual": residual,
            "truncation_bound": cert,
        },
        passed=residual <= cert + 1e-9,
        tolerance="residual <= truncation_bound + 1e-9",
    )


@dataclass(frozen=True)
class PositivityResult:
    first_violation: int | None
    min_value: float
    argmin: int


def positivity_scan(f: RandomCMF, x_max: int) -> PositivityResult:
    """Stream sum_{n<=x} f(n)/n for x = 1..x_max."""
    if x_max > f.value_limit:
        raise BoundsError(f"x_max={x_max} exceeds tabulated range {f.value_limit}")
    n = np.arange(1, x_max + 1, dtype=np.float64)
    sums = compensated_cumsum(f.values[1 : x_max + 1] / n)
    bad = np.flatnonzero(sums <= 0.0)
    i = int(np.argmin(sums))
    return PositivityResult(int(bad[0]) + 1 if bad.size else None, float(sums[i]), i + 1)


def positivity_trials(
    trials: int, x_max: int, seed: int, table: PrimeTable, threads: int = 1
) -> ExperimentReport:
    """positivity_scan over ``trials`` functions with seeds derive_seed(seed, i)."""
    seeds = [derive_seed(seed, i) for i in range(trials)]

    def one(s: int) -> PositivityResult:
        return positivity_scan(sample_cmf(s, x_max, x_max, table), x_max)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(one, seeds))
    else:
        results = [one(s) for s in seeds]
    violations = [(i, r.first_violation) for i, r in enumerate(results) if r.first_violation is not None]
    mins = [r.min_value for r in results]
    worst = int(np.argmin(mins)) if results else 0
    return ExperimentReport(
        name="positivity",
        seed=seed,
        trials=trials,
        stats={
            "x_max": x_max,
            "violations": len(violations),
            "first_violations": violations[:10],
            "min_value": mins[worst] if results else None,
            "min_trial": worst,
            "min_argmin": results[worst].argmin if results else None,
        },
        passed=not violations,
        tolerance="no partial sum <= 0",
        rows=[(i, s, r.min_value) for i, (s, r) in enumerate(zip(seeds, results))],
    )


def _mean_stderr(values: np.ndarray) -> tuple[float, float]:
    mean = accurate_sum(values) / values.size
    if values.size < 2:
        return mean, math.nan
    var = accurate_sum((values - mean) ** 2) / (values.size - 1)
    return mean, math.sqrt(var / values.size)


def tail_samples(x: int, trials: int, seed: int, cap: float, table: PrimeTable) -> tuple[list[int], np.ndarray]:
    """S_x for trial functions derive_seed(seed, i), i < trials."""
    ps, weights = _smooth_buckets(int(x), float(cap), table)
    seeds = [derive_seed(seed, i) for i in range(trials)]
    out = np.empty(trials)
    chunk = max(1, (1 << 22) // (1 << ps.size))
    for start in range(0, trials, chunk):
        block = seeds[start : start + chunk]
        masks = _neg_mask(prime_signs_matrix(block, ps))
        out[start : start + len(block)] = _parity_characters(masks, ps.size) @ weights
    return seeds, out


def moment_bound_ln(x: int, k: int, sigma: float, table: PrimeTable) -> float:
    """ln of x^-(k(2-sigma)) prod_{p<=x} ((1-p^-s/2)^-2k + (1+p^-s/2)^-2k)/2,
    an upper bound for E[S_x^(2k)]."""
    ps = table.primes_upto(x).astype(np.float64)
    q = ps ** (-sigma / 2.0)
    factors = np.logaddexp(-2 * k * np.log1p(-q), -2 * k * np.log1p(q)) - LN2
    return accurate_sum(factors) - k * (2.0 - sigma) * math.log(x)


def empirical_moment(
    x: int,
    k: int,
    trials: int,
    seed: int,
    cap: float = DEFAULT_CAP,
    table: PrimeTable | None = None,
    sigma: float = 1.5,
) -> ExperimentReport:
    """Monte Carlo E[S_x^(2k)] against the moment bound at (sigma, R = x)."""
    if not 2 <= x <= 30:
        raise DomainError("empirical_moment needs 2 <= x <= 30")
    if k not in (1, 2):
        raise DomainError("empirical_moment needs k in {1, 2}")
    if trials < 1:
        raise DomainError("trials must be >= 1")
    if table is None:
        from .primes import sieve

        table = sieve(max(x, 2))
    seeds, s = tail_samples(x, trials, seed, cap, table)
    powers = s ** (2 * k)
    mean, se = _mean_stderr(powers)
    bound = math.exp(moment_bound_ln(x, k, sigma, table))
    flags = []
    if trials < 2:
        flags.append("insufficient_sample")
        passed = False
    else:
        passed = mean - 3 * se <= bound
    return ExperimentReport(
        name="moment",
        seed=seed,
        trials=trials,
        stats={"x": x, "k": k, "sigma": sigma, "cap": cap, "mean": mean, "stderr": se, "bound": bound},
        passed=passed,
        tolerance="mean - 3*stderr <= bound",
        flags=flags,
        rows=[(i, sd, float(v)) for i, (sd, v) in enumerate(zip(seeds, powers))],
    )


# -- maximal and concentration inequalities --------------------------------

_EXACT_MAX_N = 30


def _walk_stats(signs: np.ndarray, steps: np.ndarray, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-row indicator of max|S_k| >= 3 alpha and per-(row, k) |S_k| >= alpha."""
    walks = np.cumsum(signs * steps[None, :], axis=1)
    absw = np.abs(walks)
    slack = 1e-12 * max(1.0, alpha)
    return absw.max(axis=1) >= 3 * alpha - slack, absw >= alpha - slack


def etemadi_empirical(
    n: int | None = None,
    alpha: float = 1.0,
    trials: int = 100_000,
    seed: int = 0,
    mode: str = "exact",
    steps: Sequence[float] | None = None,
) -> ExperimentReport:
    """Compare P(max_k |S_k| >= 3 alpha) with 3 max_k P(|S_k| >= alpha).

    S_k sums independent symmetric signs times ``steps`` (unit steps if not
    given). ``mode='exact'`` enumerates all 2^n sign patterns.
    """
    if steps is None:
        if n is None:
            raise DomainError("give n or steps")
        steps_arr = np.ones(n)
    else:
        steps_arr = np.asarray(steps, dtype=np.float64)
        n = steps_arr.size
    if n < 1:
        raise DomainError("n must be >= 1")
    if mode == "exact":
        if n > _EXACT_MAX_N:
            raise DomainError(f"exact mode limited to n <= {_EXACT_MAX_N}")
        total = 1 << n
        lhs_count = 0
        rhs_counts = np.zeros(n, dtype=np.int64)
        shifts = np.arange(n, dtype=np.int64)
        for start in range(0, total, 1 << 16):
            idx = np.arange(start, min(total, start + (1 << 16)), dtype=np.int64)
            signs = (((idx[:, None] >> shifts) & 1) * 2 - 1).astype(np.float64)
            hit_max, hit_k = _walk_stats(signs, steps_arr, alpha)
            lhs_count += int(hit_max.sum())
            rhs_counts += hit_k.sum(axis=0)
        lhs = lhs_count / total
        rhs = 3 * int(rhs_counts.max()) / total
        stats = {"n": n, "alpha": alpha, "lhs": lhs, "rhs": rhs}
        return ExperimentReport("etemadi", None, total, stats, lhs <= rhs, "lhs <= rhs (exact)")
    if mode != "mc":
        raise DomainError(f"unknown mode {mode!r}")
    if trials < 2:
        raise DomainError("Monte Carlo mode needs trials >= 2")
    rng = np.random.Generator(np.random.Philox(key=seed & MASK64))
    lhs_count = 0
    rhs_counts = np.zeros(n, dtype=np.int64)
    chunk = max(1, (1 << 22) // n)
    for start in range(0, trials, chunk):
        m = min(chunk, trials - start)
        signs = rng.integers(0, 2, size=(m, n), dtype=np.int8) * 2.0 - 1.0
        hit_max, hit_k = _walk_stats(signs, steps_arr, alpha)
        lhs_count += int(hit_max.sum())
        rhs_counts += hit_k.sum(axis=0)
    lhs = lhs_count / trials
    q = int(rhs_counts.max()) / trials
    rhs = 3 * q
    se = math.sqrt(lhs * (1 - lhs) / trials + 9 * q * (1 - q) / trials)
    stats = {"n": n, "alpha": alpha, "lhs": lhs, "rhs": rhs, "stderr": se}
    return ExperimentReport("etemadi", seed, trials, stats, lhs <= rhs + 3 * se, "lhs <= rhs + 3*stderr")


def exact_walk_tail(n: int, t: float) -> float:
    """P(X_1 + ... + X_n >= t) for independent fair +-1 steps."""
    hits = sum(math.comb(n, j) for j in range(n + 1) if 2 * j - n >= t)
    return hits / 2**n


def bernstein_violations(n_max: int = 20, ts: Sequence[float] = (1, 2, 3)) -> list[tuple[int, float, float, float]]:
    """(n, t, exact, bound) where the Bernstein bound for n unit steps falls
    below the exact tail; expected empty."""
    from .bounds import bernstein_bound

    bad = []
    for n in range(1, n_max + 1):
        for t in ts:
            exact = exact_walk_tail(n, t)
            bound = bernstein_bound(float(n), 1.0, float(t)).value
            if bound < exact:
                bad.append((n, t, exact, bound))
    return bad


def drift_empirical(
    x: int,
    Y: int,
    ell: float,
    trials: int,
    seed: int,
    table: PrimeTable,
) -> ExperimentReport:
    """Frequency of inf_{y<=Y} prod_{x<p<=x+y} (1 - f(p)/p)^-1 <= ell."""
    if x + Y > table.limit:
        raise BoundsError("table too small for the prime window")
    ps = table.primes_upto(x + Y)
    ps = ps[ps > x]
    pf = ps.astype(np.float64)
    threshold = math.log(ell)
    hits = 0
    chunk = max(1, (1 << 23) // max(1, ps.size))
    for start in range(0, trials, chunk):
        block = [derive_seed(seed, i) for i in range(start, min(trials, start + chunk))]
        signs = prime_signs_matrix(block, ps)
        logs = np.cumsum(-np.log1p(-signs / pf[None, :]), axis=1)
        hits += int((logs.min(axis=1) <= threshold).sum())
    freq = hits / trials
    se = math.sqrt(max(freq * (1 - freq), 0.0) / trials)
    bound = drift_bound(x, ell).value
    return ExperimentReport(
        name="drift",
        seed=seed,
        trials=trials,
        stats={"x": x, "Y": Y, "ell": ell, "frequency": freq, "stderr": se, "bound": bound},
        passed=freq <= bound + 3 * se,
        tolerance="frequency <= bound + 3*stderr",
    )
