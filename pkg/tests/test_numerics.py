import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmfbounds.errors import DivergenceError
from cmfbounds.numerics import (
    INFEASIBLE,
    ONE,
    ZERO,
    Enclosure,
    LogReal,
    accurate_sum,
    avg_power_factor,
    avg_power_factors,
    compensated_cumsum,
    format_log10,
    log_add,
    log_sum,
    zeta,
)

finite_ln = st.floats(min_value=-690.0, max_value=690.0, allow_nan=False)


def test_log_add_identity():
    assert log_add(LogReal(0.0), ZERO).ln == 0.0
    assert log_add(ZERO, ZERO) == ZERO


def test_log_add_ten_equal_terms():
    term = LogReal.from_log10(-46)
    total = ZERO
    for _ in range(10):
        total = log_add(total, term)
    assert total.log10 == pytest.approx(-45, abs=1e-12)


def test_log_add_two_plus_three():
    assert log_add(LogReal.from_value(2), LogReal.from_value(3)).value == pytest.approx(5, rel=1e-15)


def test_log_add_handles_infeasible():
    assert log_add(INFEASIBLE, ONE) == INFEASIBLE


@given(finite_ln, finite_ln)
def test_log_add_commutes_and_dominates(a, b):
    x, y = LogReal(a), LogReal(b)
    assert log_add(x, y) == log_add(y, x)
    assert log_add(x, y).ln >= max(a, b)


@given(finite_ln, finite_ln, finite_ln)
def test_log_add_associative(a, b, c):
    x, y, z = LogReal(a), LogReal(b), LogReal(c)
    left = log_add(log_add(x, y), z).ln
    right = log_add(x, log_add(y, z)).ln
    assert abs(left - right) <= 1e-12 * max(1.0, abs(left))


@given(finite_ln)
def test_zero_is_identity(a):
    assert log_add(LogReal(a), ZERO).ln == a


@given(st.floats(-300, 300), st.floats(-300, 300))
def test_mul_round_trip(e1, e2):
    a, b = LogReal.from_log10(e1), LogReal.from_log10(e2)
    prod = (a * b).ln
    expected = mpmath.mpf(10) ** e1 * mpmath.mpf(10) ** e2
    assert abs(mpmath.exp(prod) / expected - 1) <= 1e-12


def test_logreal_operators():
    a, b = LogReal.from_value(6.0), LogReal.from_value(2.0)
    assert (a / b).value == pytest.approx(3.0)
    assert (b**3).value == pytest.approx(8.0)
    assert (a + b).value == pytest.approx(8.0)
    assert ZERO.is_zero and not ONE.is_zero
    with pytest.raises(ValueError):
        LogReal.from_value(-1.0)


def test_log_sum_matches_fsum():
    vals = [1e-300, 2.5, 1e5, 3e-7]
    assert log_sum(LogReal.from_value(v) for v in vals).value == pytest.approx(math.fsum(vals), rel=1e-14)
    assert log_sum([]) == ZERO


def test_format_log10():
    assert format_log10(-45.5) == "3.2e-46"
    assert format_log10(2.0) == "1.0e+2"
    assert format_log10(-0.0000001) == "1.0e+0"
    assert format_log10(float("-inf")) == "0"


def test_accurate_sum_beats_naive():
    vals = np.array([1.0, 1e100, 1.0, -1e100] * 1000)
    assert accurate_sum(vals) == 2000.0


def test_compensated_cumsum_against_fsum():
    rng = np.random.default_rng(3)
    vals = rng.standard_normal(10**5) / np.arange(1, 10**5 + 1)
    cs = compensated_cumsum(vals, block=977)
    for i in (0, 976, 977, 5000, 10**5 - 1):
        assert cs[i] == pytest.approx(math.fsum(vals[: i + 1]), rel=1e-13, abs=1e-15)


def test_zeta_contains_pi_squared_over_six():
    enc = zeta(2.0, 10**6)
    assert math.pi**2 / 6 in enc
    assert enc.width < 1e-12


def test_zeta_width_at_sigma_142():
    mpmath.mp.dps = 30
    enc = zeta(1.42, 10**7)
    T = 10**7
    analytic = (T ** (-0.42) - (T + 1) ** (-0.42)) / 0.42
    assert enc.width <= analytic * (1 + 1e-6) + 1e-15
    assert enc.width < 1e-8
    assert float(mpmath.zeta(1.42)) in enc


def test_zeta_three_small_cutoff():
    enc = zeta(3.0, 10)
    assert float(mpmath.zeta(3)) in enc


def test_zeta_width_decreases():
    widths = [zeta(1.5, T).width for T in (10**2, 10**4, 10**6)]
    assert widths[0] > widths[1] > widths[2]


@pytest.mark.parametrize("sigma", [1.0, 0.5])
def test_zeta_divergence(sigma):
    with pytest.raises(DivergenceError):
        zeta(sigma, 100)


def test_enclosure_rejects_inverted():
    with pytest.raises(ValueError):
        Enclosure(2.0, 1.0)


def test_avg_power_factor_examples():
    assert avg_power_factor(2, 1).ln == pytest.approx(0.0, abs=1e-15)
    assert avg_power_factor(2, 2).ln == pytest.approx(math.log(1.25), rel=1e-14)
    mpmath.mp.dps = 40
    oracle = mpmath.log(((mpmath.mpf(4) / 3) ** 700 + (mpmath.mpf(2) / 3) ** 700) / 2)
    assert avg_power_factor(3, 700).ln == pytest.approx(float(oracle), rel=1e-13)


def test_avg_power_factor_at_least_one():
    for p in (2, 3, 5, 7, 11, 13, 47, 97):
        for lam in (1, 2, 10, 700):
            assert avg_power_factor(p, lam).ln >= -1e-15


def test_avg_power_factor_gaussian_cap():
    for lam in (1, 2, 10, 70):
        for p in (11 * lam, 23 * lam + 1, 1000 * lam):
            assert avg_power_factor(p, lam).ln <= lam**2 / (2 * p**2)


def test_avg_power_factors_vectorised_agrees():
    ps = np.array([2, 3, 5, 101, 7919])
    vec = avg_power_factors(ps, 700.0)
    for p, v in zip(ps, vec):
        assert v == pytest.approx(avg_power_factor(int(p), 700.0).ln, rel=1e-14)


@settings(max_examples=50)
@given(st.integers(2, 10**6), st.floats(1.0, 1e6))
def test_avg_power_factor_stable(p, lam):
    v = avg_power_factor(p, lam).ln
    assert math.isfinite(v) and v >= -1e-12
