import math

import numpy as np
import pytest

from cmfbounds.asymptotics import (
    DEFAULT_C1,
    AsymptoticConstants,
    asym_product_bound,
    asym_tail_bound,
    c0_ratios,
    c1_threshold,
    estimate_C0,
    implied_constant,
    loglog_sum_diagnostic,
    prime_sum_upper,
    tail_cutoff,
    large_x_bound,
    growth_schedule,
)
from cmfbounds.bounds import tail_single_bound
from cmfbounds.errors import ConstraintError, DomainError
from cmfbounds.primes import sieve

GRID = (1e20, 1e50, 1e100)


@pytest.fixture(scope="module")
def C0(small_table):
    return estimate_C0(small_table)


def test_c0_single_lambda(small_table):
    ps = [p for p in range(2, 101) if all(p % d for d in range(2, p))]
    assert len(ps) == 25
    product = math.prod((p + 1) / p for p in ps)
    assert estimate_C0(small_table, [10]) == pytest.approx(product / math.log(10), rel=1e-13)


def test_c0_is_max_ratio(small_table, C0):
    ratios = c0_ratios(small_table, [1e2, 1e3, 1e4])
    assert C0 == max(ratios)
    assert max(ratios) / min(ratios) < 1.5


def test_c0_empty_grid(small_table):
    with pytest.raises(DomainError):
        estimate_C0(small_table, [])


def test_constants_validation():
    with pytest.raises(DomainError):
        AsymptoticConstants(C0=-1.0)
    assert AsymptoticConstants(2.0).c == pytest.approx(1 / 8)


def test_product_bound_closed_form():
    r = asym_product_bound(0.05, 1e300, AsymptoticConstants(C0=3.0))
    assert r.lam == pytest.approx(math.exp(10 / 3), rel=1e-15)
    assert r.bound.ln == pytest.approx(r.lam * (math.log(0.5) + 0.05), rel=1e-12)


def test_product_bound_vacuous_when_lambda_small():
    r = asym_product_bound(0.9, 1e300, AsymptoticConstants(C0=3.0))
    assert r.vacuous and r.bound.ln >= 0


def test_product_bound_nonincreasing(C0):
    consts = AsymptoticConstants(C0)
    vals = [asym_product_bound(d, 1e100, consts).bound.ln for d in (0.1, 0.05, 0.02)]
    assert vals == sorted(vals, reverse=True)


def test_product_bound_constraints(C0):
    consts = AsymptoticConstants(C0)
    with pytest.raises(ConstraintError) as exc:
        asym_product_bound(1e-4, 1e6, consts)
    assert exc.value.constraint == "delta>=1/log x"
    with pytest.raises(ConstraintError) as exc:
        asym_product_bound(0.08, 1e6, AsymptoticConstants(C0=0.5))
    assert exc.value.constraint == "lambda<=x/10"


def test_tail_bound_example(small_table):
    got = asym_tail_bound(1e6, 0.5, 1, 1.6, small_table).ln
    assert got == pytest.approx(2 * math.log(2) - 0.4 * math.log(1e6) + 16, rel=1e-14)


def test_tail_bound_doubling(small_table):
    for k, sigma in ((3, 1.7), (40, 1.55), (1000, 1.9)):
        a = asym_tail_bound(1e30, 0.01, k, sigma, small_table).ln
        b = asym_tail_bound(2e30, 0.01, k, sigma, small_table).ln
        shift = -k * (2 - sigma) * math.log(2)
        assert abs((b - a) - shift) <= 1e-12 * abs(shift) + 1e-12 * abs(a)


def test_tail_bound_half_exponent_variant(small_table):
    full = asym_tail_bound(1e10, 0.1, 4, 1.8, small_table, exponent="full").ln
    half = asym_tail_bound(1e10, 0.1, 4, 1.8, small_table, exponent="half").ln
    assert half - full == pytest.approx(4 * (1 - 0.9) * math.log(1e10), rel=1e-12)
    with pytest.raises(DomainError):
        asym_tail_bound(1e10, 0.1, 4, 1.8, small_table, exponent="other")


def test_tail_bound_sigma_range(small_table):
    with pytest.raises(ConstraintError):
        asym_tail_bound(1e10, 0.1, 4, 1.4, small_table)


def test_cutoff_satisfies_moment_condition():
    for k in (1, 2, 7, 48, 1000, 10**5, 10**6):
        for sigma in (1.51, 1.7, 1.99):
            R = tail_cutoff(k, sigma)
            assert 2 * R**sigma > k * k


def test_tail_relaxes_single_bound(small_table):
    for k in (2, 3, 5, 8):
        for sigma in (1.55, 1.7, 1.9):
            R = tail_cutoff(k, sigma)
            if R < 2:
                continue
            single = tail_single_bound(1e8, 0.1, k, sigma, R, small_table)
            assert asym_tail_bound(1e8, 0.1, k, sigma, small_table).ln >= single.ln


def test_prime_sum_upper_exact_part(small_table):
    ps = small_table.primes_upto(1000).astype(float)
    assert prime_sum_upper(0.8, 1000, small_table) == pytest.approx(math.fsum(ps**-0.8), rel=1e-14)


def test_prime_sum_upper_beyond_table():
    small = sieve(10**4)
    big = sieve(10**6)
    exact = prime_sum_upper(0.8, 10**6, big)
    assert prime_sum_upper(0.8, 10**6, small) >= exact


def test_loglog_diagnostic_runs(small_table):
    lhs, rhs, ok = loglog_sum_diagnostic(1.9, 1e4, small_table)
    assert ok == (lhs <= rhs) and lhs > 0


@pytest.mark.parametrize("x", GRID)
def test_schedule_identities(x):
    s = growth_schedule(x, 40)
    L, LL = math.log(x), math.log(math.log(x))
    assert s.delta * L == pytest.approx(LL, rel=1e-14)
    assert s.sigma < 2
    assert (s.sigma > 1.5) == (40 * LL / L < 0.5)
    assert s.k == round(math.exp(L / LL))


def test_schedule_at_googol():
    s = growth_schedule(1e100)
    assert math.log(1e100) == pytest.approx(230.2585, abs=1e-4)
    assert math.log(math.log(1e100)) == pytest.approx(5.4392, abs=1e-4)
    assert math.log(s.k) == pytest.approx(42.33, abs=0.01)


def test_schedule_floor():
    with pytest.raises(DomainError):
        growth_schedule(1e5)


def test_c1_threshold_and_default():
    for x in GRID:
        LL = math.log(math.log(x))
        C1 = c1_threshold(x)
        k = 1.0
        assert 2 * k * LL - C1 * k * LL / 2 + 100 * k == pytest.approx(-C1 * k * LL / 3)
    assert DEFAULT_C1 >= c1_threshold(1e20)
    assert DEFAULT_C1 - 1 < c1_threshold(1e20)


def test_bound_at_googol(small_table, C0):
    r = large_x_bound(1e100, AsymptoticConstants(C0, 40.0), small_table)
    assert math.isfinite(r.total.ln) and r.total.ln < -1e5
    assert r.implied_C is not None and r.implied_C > 0


def test_bound_nonincreasing_in_x(small_table, C0):
    vals = [large_x_bound(x, AsymptoticConstants(C0), small_table).total.ln for x in GRID]
    assert vals == sorted(vals, reverse=True)


def test_default_c1_display_holds(small_table, C0):
    for x in GRID:
        assert large_x_bound(x, AsymptoticConstants(C0), small_table).display_holds


def test_implied_constant_round_trip():
    x, C = 1e100, 3.0
    L = math.log(x)
    ln_bound = -math.exp(L / (C * math.log(L)))
    assert implied_constant(x, ln_bound) == pytest.approx(C, rel=1e-12)
    assert implied_constant(x, -0.5) is None


def test_to_dict_plain_types(small_table, C0):
    d = large_x_bound(1e100, AsymptoticConstants(C0, 5.0), small_table).to_dict()
    for key in ("x", "k", "delta", "sigma", "log10_product_bound", "log10_tail_bound", "log10_total", "implied_C"):
        assert key in d
    assert type(d["log10_moment_tail_bound"]) is float
    assert not any(isinstance(v, np.generic) for v in d.values())
