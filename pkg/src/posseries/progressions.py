"""Arithmetic progressions in integer sets and epsilon-progressions in real strings.

Witnesses index their elements k = 1..n, so ``base`` is the intercept at
k = 0 and the k-th element is approximately ``base + k * difference``.
Positions refer to 0-based offsets into the input.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import GuardExceeded, InputTooLarge

MAX_LONGEST_AP = 5000
MAX_COUNT_3AP = 20_000
MAX_WINDOW = 200
MAX_SUBSEQUENCE = 200
DEFAULT_SPAN = 16
MAX_NODES = 2_000_000
MAX_BLOCK = 14


@dataclass
class APWitness:
    length: int
    base: float
    difference: float
    indices: list[int]
    max_residual: float = 0.0
    values: list[float] = field(default_factory=list)

    def residuals(self) -> np.ndarray:
        k = np.arange(1, self.length + 1, dtype=float)
        return np.abs(np.asarray(self.values, dtype=float) - self.base - k * self.difference)

    def to_json(self) -> dict:
        return {
            "length": self.length,
            "base": self.base,
            "difference": self.difference,
            "indices": list(self.indices),
            "max_residual": self.max_residual,
        }


def _as_sorted_ints(values: Sequence[int], guard: int) -> np.ndarray:
    x = np.asarray(list(values), dtype=np.int64)
    if len(x) > guard:
        raise InputTooLarge(f"{len(x)} elements exceed the guard of {guard}")
    if len(x) > 1 and np.any(np.diff(x) <= 0):
        raise ValueError("input must be sorted and distinct")
    return x


# -- exact progressions -------------------------------------------------------------


def longest_ap(values: Sequence[int]) -> APWitness:
    """A longest arithmetic progression contained in a sorted set of integers.

    L[i, j] is the length of the longest AP ending in x_i, x_j; column j is
    filled from columns i < j by looking up the predecessor 2 x_i - x_j.
    """
    x = _as_sorted_ints(values, MAX_LONGEST_AP)
    m = len(x)
    if m == 0:
        return APWitness(0, 0.0, 0.0, [], 0.0, [])
    if m == 1:
        return APWitness(1, float(x[0]), 0.0, [0], 0.0, [float(x[0])])
    L = np.zeros((m, m), dtype=np.int16)
    best, best_pair = 2, (0, 1)
    for j in range(1, m):
        i = np.arange(j)
        prev = 2 * x[:j] - x[j]
        p = np.searchsorted(x, prev)
        found = (p < i) & (x[np.minimum(p, m - 1)] == prev)
        col = np.full(j, 2, dtype=np.int16)
        col[found] = L[p[found], i[found]] + 1
        L[:j, j] = col
        top = int(np.argmax(col))
        if col[top] > best:
            best, best_pair = int(col[top]), (top, j)
    i, j = best_pair
    d = int(x[j] - x[i])
    pos = [j, i]
    lookup = {int(v): k for k, v in enumerate(x)}
    while len(pos) < best:
        pos.append(lookup[int(x[pos[-1]]) - d])
    pos.reverse()
    vals = [float(x[k]) for k in pos]
    return APWitness(best, vals[0] - d, float(d), pos, 0.0, vals)


def count_3aps(values: Sequence[int]) -> int:
    """Number of triples x < y < z in the set with y - x = z - y."""
    return int(three_aps_by_top(values).sum())


def three_aps_by_top(values: Sequence[int]) -> np.ndarray:
    """counts[k] = number of 3-APs whose largest element is x_k."""
    x = _as_sorted_ints(values, MAX_COUNT_3AP)
    m = len(x)
    counts = np.zeros(m, dtype=np.int64)
    for j in range(1, m - 1):
        prev = 2 * x[j] - x[j + 1 :]
        p = np.searchsorted(x, prev)
        hit = (p < j) & (x[np.minimum(p, m - 1)] == prev)
        np.add.at(counts, np.flatnonzero(hit) + j + 1, 1)
    return counts


def count_3aps_pairs(values: Sequence[int]) -> int:
    """Same count by checking the midpoint of every pair; the slow reference."""
    xs = sorted(set(int(v) for v in values))
    members = set(xs)
    return sum(1 for a, c in itertools.combinations(xs, 2) if (a + c) % 2 == 0 and (a + c) // 2 in members)


@dataclass
class ThreeAPGrowth:
    limits: list[int]
    counts: list[int]
    constant: float

    def model(self, n: float) -> float:
        return self.constant * n * n / math.log(n) ** 3


def three_ap_growth(elements: Sequence[int], limits: Sequence[int]) -> ThreeAPGrowth:
    """3-AP counts of {x <= n} at each limit with a least-squares C in C n^2 / ln^3 n."""
    x = np.asarray(list(elements), dtype=np.int64)
    by_top = three_aps_by_top(x)
    cum = np.cumsum(by_top)
    counts = [int(cum[np.searchsorted(x, n, side="right") - 1]) if n >= x[0] else 0 for n in limits]
    f = np.array([n * n / math.log(n) ** 3 for n in limits])
    c = np.array(counts, dtype=float)
    return ThreeAPGrowth(list(limits), counts, float(c @ f / (f @ f)))


# -- minimax line fits -------------------------------------------------------------


def _triple_errors(k: np.ndarray, c: np.ndarray, tri: np.ndarray) -> np.ndarray:
    """Signed half-deviation of the middle point from the chord of each triple."""
    i, j, l = tri[:, 0], tri[:, 1], tri[:, 2]
    span = k[l] - k[i]
    h = (c[j] * span - c[i] * (k[l] - k[j]) - c[l] * (k[j] - k[i])) / span
    return h / 2


def minimax_line(c: Sequence[float]) -> tuple[float, float, float]:
    """(a, r, err) minimising max_k |c_k - a - k r| over k = 1..n.

    On a discrete set the best uniform line is fixed by a critical triple, and
    its error equals the largest triple error; all triples are enumerated.
    """
    c = np.asarray(c, dtype=float)
    n = len(c)
    k = np.arange(1, n + 1, dtype=float)
    if n == 1:
        return float(c[0] - 1.0), 1.0, 0.0
    if n == 2:
        r = c[1] - c[0]
        return float(c[0] - r), float(r), 0.0
    tri = np.array(list(itertools.combinations(range(n), 3)))
    e = _triple_errors(k, c, tri)
    t = int(np.argmax(np.abs(e)))
    i, _, l = tri[t]
    r = (c[l] - c[i]) / (k[l] - k[i])
    a = c[i] - k[i] * r + e[t]
    return float(a), float(r), float(abs(e[t]))


def _witness(c: np.ndarray, positions: list[int]) -> APWitness:
    vals = c[positions]
    a, r, _ = minimax_line(vals)
    k = np.arange(1, len(vals) + 1, dtype=float)
    res = float(np.max(np.abs(vals - a - k * r)))
    return APWitness(len(vals), a, r, list(positions), res, [float(v) for v in vals])


def find_eps_progression(seq: Sequence[float], L: int, epsilon: float, mode: str = "window", span: int = DEFAULT_SPAN) -> APWitness | None:
    """First L-term epsilon-progression in ``seq``, or None.

    ``window`` scans contiguous strings; ``subsequence`` backtracks over index
    choices with consecutive gaps at most ``span``, pruning any prefix whose
    best fit already reaches epsilon.
    """
    if L < 3:
        raise ValueError("L must be >= 3")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    c = np.asarray(seq, dtype=float)
    if mode == "window":
        if L > MAX_WINDOW:
            raise GuardExceeded(f"window length {L} exceeds {MAX_WINDOW}")
        for s in range(len(c) - L + 1):
            _, _, err = minimax_line(c[s : s + L])
            if err < epsilon:
                return _witness(c, list(range(s, s + L)))
        return None
    if mode == "subsequence":
        if len(c) > MAX_SUBSEQUENCE:
            raise GuardExceeded(f"subsequence search is limited to {MAX_SUBSEQUENCE} values")
        found = _backtrack(c, L, epsilon, span)
        return None if found is None else _witness(c, found)
    raise ValueError("mode must be 'window' or 'subsequence'")


def _backtrack(c: np.ndarray, L: int, eps: float, span: int) -> list[int] | None:
    nodes = 0

    def extend(chosen: list[int], err: float) -> list[int] | None:
        nonlocal nodes
        if len(chosen) == L:
            return chosen
        last = chosen[-1]
        m = len(chosen)
        k = np.arange(1, m + 2, dtype=float)
        for nxt in range(last + 1, min(len(c), last + span + 1)):
            nodes += 1
            if nodes > MAX_NODES:
                raise GuardExceeded(f"subsequence search visited more than {MAX_NODES} nodes")
            new_err = err
            if m >= 2:
                vals = c[chosen + [nxt]]
                tri = np.array([(i, j, m) for i, j in itertools.combinations(range(m), 2)])
                new_err = max(err, float(np.max(np.abs(_triple_errors(k, vals, tri)))))
            if new_err < eps:
                out = extend(chosen + [nxt], new_err)
                if out is not None:
                    return out
        return None

    for first in range(len(c) - L + 1):
        out = extend([first], 0.0)
        if out is not None:
            return out
    return None


# -- block counterexample -------------------------------------------------------------


@dataclass
class BlockStructure:
    n_max: int
    blocks_ok: bool
    longest: APWitness
    max_3ap_difference: int
    partial_sum: float
    tail_bound: float

    @property
    def bracket(self) -> tuple[float, float]:
        return self.partial_sum, self.partial_sum + self.tail_bound

    def to_json(self) -> dict:
        return {
            "n_max": self.n_max,
            "blocks_ok": self.blocks_ok,
            "longest_ap": self.longest.to_json(),
            "max_3ap_difference": self.max_3ap_difference,
            "partial_sum": self.partial_sum,
            "bracket": list(self.bracket),
        }


def block_indices(n_max: int) -> list[int]:
    return [10**b + j for b in range(1, n_max + 1) for j in range(1, b + 1)]


def block_structure_check(n_max: int) -> BlockStructure:
    """Check the index set {10^b + j : 1 <= j <= b <= n_max}.

    Each block is an exact AP of difference 1; every 3-AP in the union stays
    inside one block, so the largest difference is floor((n_max - 1) / 2).
    The series over the set is bracketed by its partial sum plus
    sum_{b > n_max} b / 10^b.
    """
    if not 1 <= n_max <= MAX_BLOCK:
        raise GuardExceeded(f"n_max must lie in [1, {MAX_BLOCK}]")
    idx = block_indices(n_max)
    blocks_ok = all(
        longest_ap([10**b + j for j in range(1, b + 1)]).length == b
        and (b == 1 or longest_ap([10**b + j for j in range(1, b + 1)]).difference == 1)
        for b in range(1, n_max + 1)
    )
    members = set(idx)
    max_d = 0
    for a, c in itertools.combinations(idx, 2):
        if (a + c) % 2 == 0 and (a + c) // 2 in members:
            max_d = max(max_d, (c - a) // 2)
    total = math.fsum(1.0 / v for v in idx)
    x, n = 0.1, n_max
    tail = ((n + 1) * x ** (n + 1) - n * x ** (n + 2)) / (1 - x) ** 2
    return BlockStructure(n_max, blocks_ok, longest_ap(idx), max_d, total, tail)
