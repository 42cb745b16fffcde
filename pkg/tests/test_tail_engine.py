from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from posseries.errors import DomainError, NotApplicable
from posseries.logscale import mb_integrand, mb_start
from posseries.series_core import MB
from posseries.tail_engine import (
    TowerMagnitude,
    crossing_threshold,
    euler_constant,
    iterated_log,
    mb_antiderivative,
    mb_tail_integral,
    sum_with_tail_bracket,
    terms_needed_for_tail,
)

mpmath = pytest.importorskip("mpmath")


def _log10_iter(t: TowerMagnitude, j: int) -> float:
    """log10 applied j times to the value of t, without leaving binary64."""
    if j <= t.height:
        return t.down_to(j)
    x = t.top
    for _ in range(j - t.height):
        x = math.log10(x)
    return x


# -- iterated logs and antiderivatives -------------------------------------------


def test_iterated_log_examples():
    assert iterated_log(2, math.exp(math.e)) == pytest.approx(1.0, abs=1e-15)
    assert iterated_log(1, 2) == pytest.approx(0.6931471805599453)
    assert math.exp(iterated_log(1, 2)) == pytest.approx(2.0)
    assert iterated_log(2, 2) == pytest.approx(-0.36651292058166435)
    assert iterated_log(0, 7.5) == 7.5
    with pytest.raises(DomainError):
        iterated_log(3, 2)
    with pytest.raises(DomainError):
        iterated_log(-1, 2)


def test_iterated_log_vectorised():
    x = np.array([16.0, 100.0, 1e6])
    assert np.allclose(iterated_log(3, x), np.log(np.log(np.log(x))))


def test_antiderivative_examples():
    ee = math.exp(math.e)
    assert mb_antiderivative(2, 2, ee) == pytest.approx(-1.0, abs=1e-14)
    assert mb_antiderivative(1, 1, ee) == pytest.approx(1.0, abs=1e-14)
    assert mb_antiderivative(0, 1, 10.0) == pytest.approx(math.log(10))
    assert mb_antiderivative(0, 2, 4.0) == pytest.approx(-0.25)


def test_antiderivative_fd_at_100():
    h, x = 1e-3, 100.0
    fd = (mb_antiderivative(2, 2, x + h) - mb_antiderivative(2, 2, x - h)) / (2 * h)
    exact = 1 / (x * math.log(x) * math.log(math.log(x)) ** 2)
    assert fd == pytest.approx(exact, rel=1e-6)


@settings(max_examples=80)
@given(st.integers(0, 3), st.floats(0.3, 3.0), st.floats(0.0, 1.0))
def test_antiderivative_duality(k, s, u):
    lo = math.log(mb_start(k) + 2.0)
    x = math.exp(lo + u * (math.log(1e8) - lo))
    h = 1e-5 * x
    fd = (mb_antiderivative(k, s, x + h) - mb_antiderivative(k, s, x - h)) / (2 * h)
    assert fd == pytest.approx(mb_integrand(k, s, x), rel=1e-6)


@pytest.mark.parametrize("k,s,x", [(0, 2, 10.0), (1, 2, 50.0), (2, 2, 100.0), (3, 1.5, 1000.0), (2, 1, 20.0)])
def test_antiderivative_matches_quadrature(k, s, x):
    mpmath.mp.dps = 30
    X = 1e8 * x
    f = lambda t: 1 / _mb_mp(k, s, t)  # noqa: E731
    ref = mpmath.quad(f, [x * 10.0**j for j in range(9)])
    got = mb_antiderivative(k, s, X) - mb_antiderivative(k, s, x)
    assert got == pytest.approx(float(ref), rel=1e-10)
    if s > 1:
        assert mb_tail_integral(k, s, x) - mb_tail_integral(k, s, X) == pytest.approx(float(ref), rel=1e-10)


def _mb_mp(k, s, t):
    out, y = mpmath.mpf(t), mpmath.mpf(t)
    for j in range(1, k + 1):
        y = mpmath.log(y)
        out *= y ** (s if j == k else 1)
    if k == 0:
        out = mpmath.mpf(t) ** s
    return out


# -- sum brackets ----------------------------------------------------------------------


def _mb22_oracle():
    """Sum of MB(2,2) by direct mpmath summation plus an Euler-Maclaurin tail."""
    mpmath.mp.dps = 30
    f = lambda t: 1 / (t * mpmath.log(t) * mpmath.log(mpmath.log(t)) ** 2)  # noqa: E731
    N = 2000
    head = mpmath.fsum(f(n) for n in range(3, N))
    tail = 1 / mpmath.log(mpmath.log(N)) + f(N) / 2 - mpmath.diff(f, N) / 12 + mpmath.diff(f, N, 3) / 720
    return float(head + tail)


def test_mb22_bracket_against_independent_oracle():
    b = sum_with_tail_bracket(MB(2, 2), 10**6)
    oracle = _mb22_oracle()
    assert oracle in b
    assert b.width < 1e-6
    # the true sum sits near 38.40677, not in [38.42, 38.44]
    assert oracle == pytest.approx(38.40677, abs=1e-5)


def test_mb02_bracket_contains_zeta2():
    b = sum_with_tail_bracket(MB(0, 2), 10**4)
    assert math.pi**2 / 6 in b
    assert b.width <= 1e-8
    assert b.direct_terms == 10**4


def test_bracket_nested_mb12():
    coarse = sum_with_tail_bracket(MB(1, 2), 10**6)
    fine = sum_with_tail_bracket(MB(1, 2), 10**7)
    assert coarse.lower <= fine.lower <= fine.upper <= coarse.upper


@pytest.mark.parametrize("k,s", [(0, 1.5), (0, 3), (1, 1.5), (2, 3), (3, 2)])
def test_bracket_containment_grid(k, s):
    n0 = mb_start(k)
    prev = None
    for N in (n0 + 100, n0 + 1000, n0 + 10**4, n0 + 10**5):
        b = sum_with_tail_bracket(MB(k, s), N)
        if prev is not None:
            assert prev.lower <= b.lower and b.upper <= prev.upper
        prev = b


def test_bracket_errors():
    with pytest.raises(NotApplicable):
        sum_with_tail_bracket(MB(2, 1), 100)
    with pytest.raises(ValueError):
        sum_with_tail_bracket(MB(2, 2), 2)
    with pytest.raises(NotApplicable):
        sum_with_tail_bracket("harmonic", 100)


# -- Euler constants ----------------------------------------------------------------


def test_euler_gamma_harmonic():
    est = euler_constant(0, 1, 10**4)
    assert est.gamma_f == pytest.approx(float(mpmath.euler), abs=1e-8)
    assert est.residual_bound < 1e-13


def test_euler_gamma_expansion_oracle():
    N = 10**4
    H = math.fsum(1 / np.arange(1, N + 1))
    oracle = H - math.log(N) - 1 / (2 * N) + 1 / (12 * N * N)
    assert euler_constant(0, 1, N).gamma_f == pytest.approx(oracle, abs=1 / (120 * N**4) + 1e-15)


def test_euler_constant_zeta2():
    # D_N = sum 1/n^2 - (1 - 1/N) tends to zeta(2) - 1
    est = euler_constant(0, 2, 10**5)
    assert est.gamma_f == pytest.approx(math.pi**2 / 6 - 1, abs=1e-12)


@pytest.mark.parametrize("k,s", [(0, 1), (0, 2), (1, 1), (1, 2), (2, 1), (2, 2), (3, 1), (0, 0.5)])
def test_euler_constant_range_and_samples(k, s):
    n0 = mb_start(k)
    est = euler_constant(k, s, n0 + 10**5, sample_points=[n0 + 10, n0 + 100, n0 + 1000, n0 + 10**4])
    assert est.in_range
    assert 0 < est.gamma_f <= mb_integrand(k, s, float(n0))
    assert est.samples and est.samples_ok
    assert est.anchor == n0


def test_euler_constant_dual_n():
    a = euler_constant(1, 1, 10**5)
    b = euler_constant(1, 1, 10**6)
    assert abs(a.gamma_f - b.gamma_f) <= mb_integrand(1, 1, 1e5)


def test_euler_constant_domain():
    with pytest.raises(DomainError):
        euler_constant(2, 2, 3)
    with pytest.raises(DomainError):
        euler_constant(0, -1, 100)


# -- inversions ------------------------------------------------------------------------


def test_terms_needed_mb22():
    est = terms_needed_for_tail(MB(2, 2), 0.005)
    assert est.value.height == 2
    assert est.value.top == pytest.approx(86.50, abs=0.01)
    log10N = est.value.log10
    assert log10N == pytest.approx(math.exp(200) / math.log(10), rel=1e-12)
    assert abs(log10N / 3.14e86 - 1) < 0.01


def test_terms_needed_mb02():
    est = terms_needed_for_tail(MB(0, 2), 1e-3)
    assert est.value.height == 0
    assert 999 <= est.value.top <= 1000
    assert est.low.top <= est.value.top <= est.high.top


def test_terms_needed_mb22_ordinary_size():
    tau = 0.38
    est = terms_needed_for_tail(MB(2, 2), tau)
    assert est.value.height == 0
    N_hi = math.ceil(est.high.top)
    N_lo = math.floor(est.low.top)
    total = sum_with_tail_bracket(MB(2, 2), 3 * 10**6)
    terms = mb_integrand(2, 2, np.arange(3, N_hi + 1, dtype=float))
    S = np.cumsum(terms)
    tail_hi = total.upper - S[N_hi - 3]
    tail_lo = total.lower - S[N_lo - 1 - 3]
    assert tail_hi < tau < tail_lo


@pytest.mark.parametrize("k,s", [(2, 2), (1, 2), (1, 1.5), (0, 3)])
@pytest.mark.parametrize("tau", [1e-3, 3e-3, 0.01, 0.05, 0.1, 0.3])
def test_inversion_round_trip(k, s, tau):
    if tau >= MB(k, s).term(mb_start(k)):
        pytest.skip("tau above the first term")
    t = terms_needed_for_tail(MB(k, s), tau).high
    # L_k(N) from the tower: ln N = ln 10 * log10 N, iterated
    if k == 0:
        Lk = _log10_iter(t, 0)
    elif k == 1:
        Lk = math.log(10) * _log10_iter(t, 1)
    else:
        Lk = math.log(10) * _log10_iter(t, 2) + math.log(math.log(10))
    tail = Lk ** (1 - s) / (s - 1)
    assert tail == pytest.approx(tau, rel=1e-3)


def test_terms_needed_errors():
    with pytest.raises(NotApplicable):
        terms_needed_for_tail(MB(2, 1), 0.1)
    with pytest.raises(ValueError):
        terms_needed_for_tail(MB(0, 2), 2.0)
    with pytest.raises(ValueError):
        terms_needed_for_tail(MB(0, 2), -1.0)


def _brute_crossing(k, s, T):
    n0 = mb_start(k)
    n = np.arange(n0, n0 + 2 * 10**6, dtype=float)
    S = np.cumsum(mb_integrand(k, s, n))
    return int(n[np.argmax(S >= T)])


def test_crossing_harmonic():
    est = crossing_threshold(MB(0, 1), 10)
    assert est.exact and est.value.top == 12367
    assert _brute_crossing(0, 1, 10) == 12367
    assert 12367 == round(math.exp(10 - float(mpmath.euler)))


def test_crossing_mb11():
    est = crossing_threshold(MB(1, 1), 3)
    oracle = _brute_crossing(1, 1, 3)
    assert est.exact and est.value.top == oracle == 8718


def test_crossing_mb21_tower():
    est = crossing_threshold(MB(2, 1), 10)
    assert est.value.height == 2
    assert abs(est.value.top - 89.8) <= 0.5
    assert est.low <= est.value <= est.high
    assert est.top_width < 1e-4


def test_crossing_nested_calibrations():
    coarse = crossing_threshold(MB(2, 1), 10, N0=10**5)
    fine = crossing_threshold(MB(2, 1), 10, N0=10**6)
    assert coarse.low <= fine.low <= fine.high <= coarse.high


def test_crossing_errors():
    with pytest.raises(NotApplicable):
        crossing_threshold(MB(2, 2), 10)


# -- tower magnitudes ----------------------------------------------------------------


def test_tower_normalisation():
    t = TowerMagnitude.from_value(1e20)
    assert t.height == 1 and t.top == pytest.approx(20)
    assert TowerMagnitude.from_level(1, 3.0) == TowerMagnitude(0, 1000.0)
    assert TowerMagnitude.from_level(2, 86.5).height == 2
    assert TowerMagnitude.from_level(0, 1e300) == TowerMagnitude(1, 300.0)


def test_tower_parse_round_trip():
    t = TowerMagnitude.from_level(2, 89.84)
    assert str(t) == "10^^2@89.84"
    assert TowerMagnitude.parse(str(t)) == t
    with pytest.raises(ValueError):
        TowerMagnitude.parse("10^^x@1")


def test_tower_down_to():
    t = TowerMagnitude.from_level(2, 20.0)
    assert t.down_to(2) == 20.0
    assert t.down_to(1) == 1e20
    with pytest.raises(OverflowError):
        t.down_to(0)
    with pytest.raises(ValueError):
        t.down_to(3)


finite_pos = st.floats(1e-3, 1e300, allow_nan=False)


@settings(max_examples=200)
@given(finite_pos, finite_pos)
def test_tower_ordering_matches_values(a, b):
    ta, tb = TowerMagnitude.from_value(a), TowerMagnitude.from_value(b)
    assert (ta < tb) == (a < b) or math.isclose(a, b, rel_tol=1e-12)


@settings(max_examples=200)
@given(st.floats(1, 300), st.floats(1, 300))
def test_tower_ordering_height_two(x, y):
    # exp10 is increasing, so ordering of the exponents carries over
    assume(not math.isclose(x, y, rel_tol=1e-9))
    ta, tb = TowerMagnitude.from_level(2, x), TowerMagnitude.from_level(2, y)
    assert (ta < tb) == (x < y)
    level = min(ta.height, tb.height)
    if max(ta.height, tb.height) == level:
        assert (ta.down_to(level) < tb.down_to(level)) == (x < y)


def test_tower_exp_iterate():
    t = TowerMagnitude.from_exp_iterate(2, 200.0)
    assert t.height == 2
    assert t.top == pytest.approx(math.log10(math.exp(200) / math.log(10)), rel=1e-12)
    assert TowerMagnitude.from_exp_iterate(1, 2.0) == TowerMagnitude.from_value(math.exp(2))
