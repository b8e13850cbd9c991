"""Random descent over (lambda, delta, k, sigma, R, ell) for the total bound."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .bounds import BoundParams, product_always_large_bound, tail_union_bound
from .errors import CmfBoundsError, DomainError
from .numerics import INFEASIBLE, LogReal, log_add
from .primes import PrimeTable

OPTIMIZER_ZETA_CUTOFF = 10**5

DEFAULT_STEPS = {
    "lam": 0.3,
    "delta": 0.02,
    "k": 0.2,
    "sigma": 0.3,
    "R": 0.3,
    "ell": 5e-4,
}

_EDGE = 1e-9


def objective(params: BoundParams, table: PrimeTable, zeta_cutoff: int = OPTIMIZER_ZETA_CUTOFF) -> LogReal:
    """Total failure-probability bound, or INFEASIBLE for invalid parameters."""
    if not params.valid:
        return INFEASIBLE
    if 10 * params.lam > table.limit or params.R > table.limit:
        return INFEASIBLE
    try:
        return log_add(
            product_always_large_bound(params, table),
            tail_union_bound(params, table, zeta_cutoff),
        )
    except CmfBoundsError:
        return INFEASIBLE


@dataclass
class SearchSpec:
    initial: BoundParams
    iterations: int = 2000
    seed: int = 1
    step_scales: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_STEPS))
    shrink_factor: float = 0.5
    patience: int = 50
    free_ell: bool = False
    lam_cap: float = 1e4
    R_cap: int = 10**5

    def __post_init__(self):
        if self.iterations < 1:
            raise DomainError("iterations must be >= 1")
        if any(v <= 0 for v in self.step_scales.values()):
            raise DomainError("step scales must be positive")
        if not 0 < self.shrink_factor < 1:
            raise DomainError("shrink_factor must be in (0, 1)")

    @property
    def coordinates(self) -> list[str]:
        coords = ["lam", "delta", "k", "sigma", "R"]
        return coords + ["ell"] if self.free_ell else coords


def _logit(u: float) -> float:
    return math.log(u / (1.0 - u))


def _expit(v: float) -> float:
    return 1.0 / (1.0 + math.exp(-v))


def _perturb(params: BoundParams, coords: list[str], z: np.ndarray, scales: dict, spec: SearchSpec) -> BoundParams:
    new = {}
    for c, zi in zip(coords, z.tolist()):
        s = scales[c] * zi
        if c == "lam":
            new["lam"] = min(spec.lam_cap, params.lam * math.exp(s))
        elif c == "R":
            new["R"] = int(min(spec.R_cap, max(2, round(params.R * math.exp(s)))))
        elif c == "k":
            k = max(1, round(params.k * math.exp(s)))
            if k == params.k and zi != 0:
                k = max(1, params.k + (1 if zi > 0 else -1))
            new["k"] = int(k)
        elif c == "sigma":
            u = _expit(_logit(params.sigma - 1.0) + s)
            new["sigma"] = 1.0 + min(1.0 - _EDGE, max(_EDGE, u))
        elif c == "delta":
            new["delta"] = min(1.0 - _EDGE, max(_EDGE, params.delta + s))
        elif c == "ell":
            new["ell"] = min(1.0 - _EDGE, max(0.5 + _EDGE, params.ell + s))
    return replace(params, **new)


@dataclass
class DescentResult:
    best: BoundParams
    best_value: LogReal
    trace: list[tuple[int, float]]

    @property
    def accepted_steps(self) -> int:
        return len(self.trace) - 1


def random_descent(
    spec: SearchSpec, table: PrimeTable, zeta_cutoff: int = OPTIMIZER_ZETA_CUTOFF
) -> DescentResult:
    """Accept a proposal only if it strictly lowers the objective.

    Odd iterations move one randomly chosen coordinate, even iterations move
    all of them. Step scales shrink after ``patience`` rejections in a row.
    The trace starts with (0, initial value) and records each acceptance.
    """
    best = spec.initial
    best_val = objective(best, table, zeta_cutoff)
    if best_val.ln == math.inf:
        raise DomainError("initial parameters are infeasible")
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    scales = dict(spec.step_scales)
    coords = spec.coordinates
    trace = [(0, best_val.log10)]
    rejections = 0
    for it in range(1, spec.iterations + 1):
        if it % 2 == 1:
            moved = [coords[int(rng.integers(len(coords)))]]
        else:
            moved = coords
        z = rng.standard_normal(len(moved))
        cand = _perturb(best, moved, z, scales, spec)
        val = objective(cand, table, zeta_cutoff)
        if val.ln < best_val.ln:
            best, best_val = cand, val
            trace.append((it, val.log10))
            rejections = 0
        else:
            rejections += 1
            if rejections >= spec.patience:
                scales = {c: v * spec.shrink_factor for c, v in scales.items()}
                rejections = 0
    return DescentResult(best, best_val, trace)
