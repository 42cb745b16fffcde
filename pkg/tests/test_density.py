from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from posseries.density import (
    BLOCKS,
    BUILTIN_SETS,
    DECREASING,
    EVENS,
    INCONCLUSIVE,
    INCREASING,
    NATURALS,
    POW2,
    PRIMES,
    SQUARES,
    STABILIZING,
    IndexSet,
    counting_profile,
    default_checkpoints,
    estimate_density_limit,
    fit_trend,
    harmonic_profile,
    tail_extreme_profile,
    weighted_counting_profile,
)
from posseries.errors import InvalidWeight, PreconditionViolated
from posseries.series_core import EULER_GAMMA

CPS = default_checkpoints()


def _sieve_count(N: int) -> int:
    is_p = bytearray([1]) * (N + 1)
    is_p[0:2] = b"\x00\x00"
    for p in range(2, math.isqrt(N) + 1):
        if is_p[p]:
            is_p[p * p :: p] = bytearray(len(range(p * p, N + 1, p)))
    return sum(is_p)


def test_default_checkpoints_schedule():
    assert CPS[0] == 100 and CPS[-1] == 10**6
    assert len(CPS) == 13
    assert all(b > a for a, b in zip(CPS, CPS[1:]))


@pytest.mark.parametrize("name", sorted(BUILTIN_SETS))
def test_enumerator_predicate_count_agree(name):
    S = BUILTIN_SETS[name]
    N = 2 * 10**5
    members = S.members(N)
    assert np.all(np.diff(members) > 0)
    assert np.all(S.contains(members))
    assert np.array_equal(members, np.flatnonzero(S.mask(N)))
    for c in (1, 10, 99, 1000, 12345, N):
        assert S.count(c) == int(np.sum(members <= c))
    assert S.counts([10, 1000, N]).tolist() == [S.count(10), S.count(1000), S.count(N)]


def test_block_set_members():
    assert BLOCKS.members(2000).tolist() == [11, 101, 102, 1001, 1002, 1003]
    assert 103 not in BLOCKS and 1003 in BLOCKS


def test_iteration_over_set():
    it = iter(POW2)
    assert [next(it) for _ in range(12)] == [2**j for j in range(12)]


def test_counting_examples():
    assert counting_profile(EVENS, [10, 100, 1000]).values == [0.5, 0.5, 0.5]
    assert counting_profile(SQUARES, [100]).values == [0.1]
    assert _sieve_count(10**6) == 78498
    assert counting_profile(PRIMES, [10**6]).values == [0.078498]


def test_counting_checkpoint_validation():
    with pytest.raises(ValueError):
        counting_profile(EVENS, [100, 10])
    with pytest.raises(ValueError):
        counting_profile(EVENS, [])


def test_harmonic_squares():
    prof = harmonic_profile(SQUARES, CPS)
    oracle = math.fsum(1 / j**2 for j in range(1, 1001)) / math.log(1e6)
    assert prof.last == pytest.approx(oracle, rel=1e-14)
    assert prof.last == pytest.approx(0.119, abs=0.002)
    assert prof.trend == DECREASING
    assert all(v * math.log(n) < math.pi**2 / 6 for n, v in prof.as_rows())


def test_harmonic_evens():
    prof = harmonic_profile(EVENS, CPS)
    N = 10**6
    closed = 0.5 * (math.log(N / 2) + EULER_GAMMA) / math.log(N)
    assert prof.last == pytest.approx(closed, abs=1e-6)
    assert prof.last == pytest.approx(0.4958, abs=1e-4)
    assert prof.trend == STABILIZING
    assert prof.limit_estimate == pytest.approx(0.5, abs=0.01)


def test_harmonic_naturals():
    H = math.fsum(1 / np.arange(1, 1001))
    assert harmonic_profile(NATURALS, [1000]).values[0] == pytest.approx(H / math.log(1000))
    assert harmonic_profile(NATURALS, [1000]).values[0] == pytest.approx(1.0837, abs=1e-4)


def test_weighted_examples():
    prof = weighted_counting_profile(PRIMES, lambda n: n / np.log(n), [10**4, 10**5, 10**6])
    assert prof.last == pytest.approx(78498 / (1e6 / math.log(1e6)))
    assert prof.last == pytest.approx(1.0845, abs=1e-4)
    assert weighted_counting_profile(EVENS, lambda n: n, [10, 100]).values == [0.5, 0.5]
    sq = weighted_counting_profile(SQUARES, np.sqrt, [10**3, 10**4, 10**6 - 1])
    assert sq.values[1] == 1.0
    assert all(0.97 < v <= 1 for v in sq.values)


def test_weight_must_increase():
    with pytest.raises(InvalidWeight):
        weighted_counting_profile(EVENS, lambda n: 1 / n, [10, 100])
    with pytest.raises(InvalidWeight):
        weighted_counting_profile(EVENS, lambda n: np.ones_like(n), [10, 100])


def test_estimate_limit_examples():
    assert estimate_density_limit(counting_profile(SQUARES, CPS)) == (0.0, DECREASING)
    lim, trend = estimate_density_limit(counting_profile(EVENS, CPS))
    assert trend == STABILIZING and lim == pytest.approx(0.5, abs=1e-4)
    primes = counting_profile(PRIMES, default_checkpoints(10**3, 10**6))
    assert estimate_density_limit(primes) == (0.0, DECREASING)


def test_estimate_limit_precondition():
    with pytest.raises(PreconditionViolated):
        estimate_density_limit(counting_profile(EVENS, [100, 200, 300, 400]))
    with pytest.raises(PreconditionViolated):
        estimate_density_limit(counting_profile(EVENS, [100, 10**5]))


def test_fit_trend_templates():
    N = np.array(CPS, dtype=float)
    assert fit_trend(N, 3 / np.sqrt(N)).trend == DECREASING
    assert fit_trend(N, 0.7 / np.log(N)).trend == DECREASING
    assert fit_trend(N, 0.3 + 0.0 * N).trend == STABILIZING
    assert fit_trend(N, np.log(N)).trend == INCREASING
    assert fit_trend(N, np.zeros_like(N)).trend == DECREASING
    rng = np.random.default_rng(1)
    assert fit_trend(N, rng.random(len(N))).trend == INCONCLUSIVE


def test_fit_trend_input_checks():
    with pytest.raises(ValueError):
        fit_trend([10], [1.0])
    assert fit_trend([10, 100, 1000, 10**4], [1, -1, 1, -1]).trend == INCONCLUSIVE


def test_tail_proxies():
    prof = counting_profile(SQUARES, CPS)
    lo = tail_extreme_profile(prof, "lower")
    hi = tail_extreme_profile(prof, "upper")
    assert lo.notion == "lower-proxy" and hi.notion == "upper-proxy"
    assert all(a <= v <= b for a, v, b in zip(lo.values, prof.values, hi.values))
    with pytest.raises(ValueError):
        tail_extreme_profile(prof, "middle")


@pytest.mark.parametrize("S", [SQUARES, PRIMES, POW2], ids=lambda s: s.name)
def test_zero_density_implies_zero_harmonic(S):
    nat = counting_profile(S, CPS)
    har = harmonic_profile(S, CPS)
    assert nat.trend == DECREASING
    assert har.trend == DECREASING


def test_natural_profile_bounds():
    for S in BUILTIN_SETS.values():
        prof = counting_profile(S, CPS)
        assert all(0 <= v <= 1 for v in prof.values)


def _random_set(seed: int, density: float, N: int) -> IndexSet:
    rng = np.random.default_rng(seed)
    mask = np.zeros(N + 1, dtype=bool)
    mask[1:] = rng.random(N) < density
    return IndexSet.from_mask(mask, f"rand{seed}")


@settings(max_examples=30)
@given(st.integers(0, 2**31), st.floats(0.01, 0.9), st.floats(0.0, 1.0))
def test_inclusion_monotone(seed, p, q):
    N = 5000
    S = _random_set(seed, p, N)
    # T = S union an independent random set, so S is a subset of T
    T = S | _random_set(seed + 1, q, N)
    cps = [10, 100, 1000, N]
    for prof in (counting_profile, harmonic_profile):
        a, b = prof(S, cps).values, prof(T, cps).values
        assert all(x <= y for x, y in zip(a, b))


@settings(max_examples=30)
@given(st.integers(0, 2**31), st.floats(0.0, 1.0))
def test_complement_sums_to_one(seed, p):
    N = 3000
    S = _random_set(seed, p, N)
    cps = [1, 7, 100, 999, N]
    a = S.counts(cps)
    b = S.complement().counts(cps)
    assert (a + b).tolist() == cps


def test_complement_of_builtins_exact():
    for S in (EVENS, SQUARES, PRIMES):
        for N in (1, 17, 1000, 10**5):
            assert S.count(N) + S.complement().count(N) == N


def test_finite_and_predicate_sets():
    F = IndexSet.finite([5, 3, 3, 9, 0, -2])
    assert F.members(100).tolist() == [3, 5, 9]
    assert F.count(4) == 1
    P = IndexSet.from_predicate(lambda n: n % 3 == 0, "mult3")
    assert P.count(30) == 10
    loop = IndexSet.from_predicate(lambda n: int(n) % 3 == 0, "mult3-loop")
    assert loop.count(30) == 10
    assert (F & P).members(100).tolist() == [3, 9]
