from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from posseries.errors import GuardExceeded, InputTooLarge
from posseries.primes import build_table
from posseries.progressions import (
    MAX_COUNT_3AP,
    MAX_LONGEST_AP,
    block_indices,
    block_structure_check,
    count_3aps,
    count_3aps_pairs,
    find_eps_progression,
    longest_ap,
    minimax_line,
    three_ap_growth,
)

PRIMES_100 = build_table(100).primes.tolist()


def _brute_longest(xs) -> int:
    members = set(xs)
    best = min(len(xs), 1)
    for a, b in itertools.combinations(sorted(xs), 2):
        d, n = b - a, 2
        while a + n * d in members:
            n += 1
        best = max(best, n)
    return best


def _brute_3aps(xs) -> int:
    return sum(1 for a, b, c in itertools.combinations(sorted(xs), 3) if b - a == c - b)


def _grid_minimax(c, r_lo, r_hi, steps=20001):
    """Best uniform line by scanning the slope; the intercept is then explicit."""
    c = np.asarray(c, dtype=float)
    k = np.arange(1, len(c) + 1, dtype=float)
    r = np.linspace(r_lo, r_hi, steps)[:, None]
    d = c[None, :] - k[None, :] * r
    err = (d.max(axis=1) - d.min(axis=1)) / 2
    i = int(np.argmin(err))
    return float(err[i]), float(r[i, 0])


def _sets(max_size=40, hi=120):
    return st.lists(st.integers(0, hi), min_size=0, max_size=max_size, unique=True).map(sorted)


# -- exact APs -------------------------------------------------------------------------


def test_longest_ap_examples():
    w = longest_ap([3, 5, 7, 11])
    assert w.length == 3 and w.max_residual == 0
    assert w.values in ([3.0, 5.0, 7.0], [3.0, 7.0, 11.0])
    w = longest_ap(list(range(1, 21)))
    assert w.length == 20 and w.difference == 1
    assert longest_ap([]).length == 0 and longest_ap([7]).length == 1


def test_longest_ap_primes_100():
    w = longest_ap(PRIMES_100)
    assert w.length == _brute_longest(PRIMES_100)
    assert all(v in PRIMES_100 for v in w.values)
    assert np.all(np.diff(w.values) == w.difference)


@settings(max_examples=80)
@given(_sets())
def test_longest_ap_matches_brute(xs):
    w = longest_ap(xs)
    assert w.length == _brute_longest(xs)
    if w.length >= 2:
        assert w.indices == sorted(w.indices)
        assert [xs[i] for i in w.indices] == w.values
        assert np.all(w.residuals() == 0)


def test_longest_ap_input_checks():
    with pytest.raises(ValueError):
        longest_ap([3, 2, 5])
    with pytest.raises(ValueError):
        longest_ap([1, 1, 2])
    with pytest.raises(InputTooLarge):
        longest_ap(range(MAX_LONGEST_AP + 1))


def test_count_3aps_examples():
    assert count_3aps([1, 2, 3, 4, 5]) == 4
    assert count_3aps([1, 2, 4, 8]) == 0
    assert count_3aps([]) == 0


@settings(max_examples=100)
@given(_sets(60, 300))
def test_count_3aps_two_implementations(xs):
    assert count_3aps(xs) == count_3aps_pairs(xs) == _brute_3aps(xs)


def test_count_3aps_random_sets():
    rng = np.random.default_rng(7)
    for _ in range(100):
        size = int(rng.integers(0, 501))
        xs = np.unique(rng.integers(0, 5000, size)).tolist()
        assert count_3aps(xs) == count_3aps_pairs(xs)


def test_count_3aps_primes_and_growth():
    primes = build_table(10**4).primes.tolist()
    assert count_3aps(primes) == count_3aps_pairs(primes)
    g = three_ap_growth(primes, [10**3, 3 * 10**3, 10**4])
    assert g.counts[-1] == count_3aps(primes)
    assert g.counts[0] == count_3aps([p for p in primes if p <= 1000])
    assert g.constant > 0 and math.isfinite(g.model(1e4))


def test_count_3aps_guard():
    with pytest.raises(InputTooLarge):
        count_3aps(range(MAX_COUNT_3AP + 1))


@settings(max_examples=50)
@given(_sets(30, 200), st.integers(0, 200))
def test_adding_an_element_is_monotone(xs, extra):
    assume(extra not in xs)
    ys = sorted(xs + [extra])
    assert longest_ap(ys).length >= longest_ap(xs).length
    assert count_3aps(ys) >= count_3aps(xs)


# -- minimax fits ---------------------------------------------------------------------


def test_minimax_near_linear_example():
    a, r, err = minimax_line([1.0, 2.1, 2.9, 4.05])
    assert (a, r, err) == pytest.approx((0.0625, 0.975, 0.0875), abs=1e-12)
    g_err, _ = _grid_minimax([1.0, 2.1, 2.9, 4.05], 0.5, 1.5)
    assert err <= g_err + 1e-12


@settings(max_examples=60)
@given(st.lists(st.floats(-50, 50), min_size=3, max_size=9))
def test_minimax_optimal_against_grid(c):
    a, r, err = minimax_line(c)
    k = np.arange(1, len(c) + 1)
    assert np.max(np.abs(np.asarray(c) - a - k * r)) == pytest.approx(err, abs=1e-9)
    g_err, _ = _grid_minimax(c, r - 1.0, r + 1.0)
    assert g_err >= err - 1e-9


def test_minimax_short_inputs():
    assert minimax_line([4.0]) == (3.0, 1.0, 0.0)
    a, r, err = minimax_line([2.0, 5.0])
    assert (a + r, a + 2 * r, err) == (2.0, 5.0, 0.0)


# -- epsilon progressions -------------------------------------------------------------


def test_eps_progression_examples():
    w = find_eps_progression([1.0, 2.1, 2.9, 4.05], 4, 0.2)
    assert w is not None and w.indices == [0, 1, 2, 3]
    assert w.max_residual < 0.11
    assert w.difference == pytest.approx(1.01, abs=0.05)
    w = find_eps_progression([5, 8, 11], 3, 1e-12)
    assert w.max_residual == 0 and w.difference == 3 and w.base == 2
    assert find_eps_progression([0, 10, 0, 10, 0, 10], 4, 0.5) is None
    _, _, err = minimax_line([0, 10, 0, 10])
    assert err >= 2.5 - 1e-12


def test_eps_progression_subsequence():
    seq = [0, 100, 1, -50, 2, 7, 3]
    assert find_eps_progression(seq, 4, 0.01) is None
    w = find_eps_progression(seq, 4, 0.01, mode="subsequence")
    assert w.indices == [0, 2, 4, 6] and w.max_residual == 0


@settings(max_examples=50)
@given(st.lists(st.integers(-20, 20), min_size=3, max_size=25), st.integers(3, 5))
def test_small_eps_matches_exact_windows(seq, L):
    assume(len(seq) >= L)
    w = find_eps_progression(seq, L, 1e-9)
    exact = [s for s in range(len(seq) - L + 1) if len(set(np.diff(seq[s : s + L]).tolist())) == 1]
    if exact:
        assert w is not None and w.indices[0] == exact[0] and w.max_residual == 0
    else:
        assert w is None


@settings(max_examples=40)
@given(st.lists(st.floats(-5, 5), min_size=4, max_size=30), st.floats(0.01, 3.0))
def test_witness_invariant(seq, eps):
    for mode in ("window", "subsequence"):
        w = find_eps_progression(seq, 4, eps, mode=mode, span=4)
        if w is not None:
            assert w.max_residual < eps
            assert np.all(w.residuals() <= w.max_residual + 1e-12)
            assert all(b > a for a, b in zip(w.indices, w.indices[1:]))


def test_eps_progression_guards():
    with pytest.raises(ValueError):
        find_eps_progression([1, 2, 3], 2, 0.1)
    with pytest.raises(ValueError):
        find_eps_progression([1, 2, 3], 3, 0.0)
    with pytest.raises(ValueError):
        find_eps_progression([1, 2, 3], 3, 0.1, mode="other")
    with pytest.raises(GuardExceeded):
        find_eps_progression(list(range(300)), 201, 0.1)
    with pytest.raises(GuardExceeded):
        find_eps_progression(list(range(201)), 3, 0.1, mode="subsequence")


# -- block counterexample -------------------------------------------------------------


def test_block_indices():
    assert block_indices(3) == [11, 101, 102, 1001, 1002, 1003]


def test_block_structure_small():
    rep = block_structure_check(5)
    assert rep.blocks_ok
    assert rep.longest.length == 5 and rep.longest.difference == 1
    assert rep.longest.length == _brute_longest(block_indices(5))


def test_block_structure_ten():
    rep = block_structure_check(10)
    assert rep.blocks_ok and rep.longest.length == 10
    assert rep.max_3ap_difference == 4
    oracle = math.fsum(1 / v for v in block_indices(10))
    assert rep.partial_sum == pytest.approx(oracle, rel=1e-15)
    assert rep.partial_sum < 0.12
    lo, hi = rep.bracket
    assert hi - lo < 1e-9
    # each block sums to less than b / 10^b
    assert math.fsum(b / 10**b for b in range(11, 200)) <= rep.tail_bound * (1 + 1e-12)


def test_block_structure_guard():
    with pytest.raises(GuardExceeded):
        block_structure_check(15)
    with pytest.raises(GuardExceeded):
        block_structure_check(0)
