"""Prime sieve, prime counting and the two classical prime bounds.

The table is a plain boolean sieve with a full prefix-count array; at the
default limit of 1.5e6 that is a few megabytes, which is cheaper than
maintaining block-boundary counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import LimitExceeded, TableTooSmall

MAX_LIMIT = 10**8
DEFAULT_LIMIT = 1_500_000

CHEBYSHEV_LOW = 7 / 8
CHEBYSHEV_HIGH = 9 / 8


def sieve(limit: int) -> np.ndarray:
    """Boolean primality array of length ``limit + 1``."""
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    return is_prime


@dataclass(frozen=True, eq=False)
class PrimeTable:
    limit: int
    is_prime: np.ndarray = field(repr=False)
    counts: np.ndarray = field(repr=False)
    primes: np.ndarray = field(repr=False)

    def pi(self, n):
        """Prime counting function; accepts scalars or integer arrays."""
        if np.any(np.asarray(n) > self.limit):
            raise TableTooSmall(f"pi({np.max(n)}) needs a table beyond {self.limit}")
        out = self.counts[np.asarray(n)]
        return int(out) if np.ndim(out) == 0 else out

    def nth_prime(self, k: int) -> int:
        """p_k with p_1 = 2."""
        if k < 1:
            raise ValueError("k must be >= 1")
        if k > len(self.primes):
            raise TableTooSmall(f"p_{k} is beyond the table limit {self.limit}")
        return int(self.primes[k - 1])

    def __contains__(self, n) -> bool:
        n = int(n)
        if n > self.limit:
            raise TableTooSmall(f"{n} is beyond the table limit {self.limit}")
        return bool(n >= 0 and self.is_prime[n])


def build_table(limit: int = DEFAULT_LIMIT) -> PrimeTable:
    if limit < 2:
        raise ValueError("limit must be >= 2")
    if limit > MAX_LIMIT:
        raise LimitExceeded(f"limit {limit} exceeds the guard {MAX_LIMIT}")
    is_prime = sieve(limit)
    counts = np.cumsum(is_prime, dtype=np.int64)
    table = PrimeTable(limit, is_prime, counts, np.flatnonzero(is_prime))
    # cheap self-checks against well-known values
    if limit >= 10:
        assert table.pi(10) == 4
    if limit >= 100:
        assert table.pi(100) == 25
    if limit >= 13:
        assert table.nth_prime(1) == 2 and table.nth_prime(6) == 13
    return table


_shared: PrimeTable | None = None


def shared_table(limit: int) -> PrimeTable:
    """Process-wide table grown geometrically to cover ``limit``."""
    global _shared
    if _shared is None or _shared.limit < limit:
        size = max(limit, 2 * (_shared.limit if _shared else 0), 1 << 16)
        _shared = build_table(min(size, MAX_LIMIT) if limit <= MAX_LIMIT else limit)
    return _shared


def is_prime_array(n: np.ndarray) -> np.ndarray:
    n = np.asarray(n, dtype=np.int64)
    if n.size == 0:
        return np.zeros(0, dtype=bool)
    table = shared_table(int(n.max()))
    out = np.zeros(n.shape, dtype=bool)
    ok = n >= 0
    out[ok] = table.is_prime[n[ok]]
    return out


# -- scans -------------------------------------------------------------------


@dataclass
class ChebyshevScan:
    n_min: int
    n_max: int
    violations: np.ndarray
    checkpoints: list[int]
    ratios: list[float]

    @property
    def largest_violation(self) -> int | None:
        return int(self.violations.max()) if len(self.violations) else None


def chebyshev_ratio(table: PrimeTable, n) -> np.ndarray:
    """pi(n) / (n / ln n)."""
    n = np.asarray(n, dtype=np.int64)
    return table.counts[n] * np.log(n) / n


def chebyshev_scan(table: PrimeTable, n_min: int, n_max: int, checkpoints=None) -> ChebyshevScan:
    """All n in [n_min, n_max] where 7/8 < pi(n)/(n/ln n) < 9/8 fails.

    The inequality is asymptotic: it fails for many n below 2e4, so nothing
    here asserts it globally.
    """
    if not 2 <= n_min < n_max <= table.limit:
        raise ValueError(f"need 2 <= n_min < n_max <= {table.limit}")
    n = np.arange(n_min, n_max + 1, dtype=np.int64)
    r = chebyshev_ratio(table, n)
    bad = n[(r <= CHEBYSHEV_LOW) | (r >= CHEBYSHEV_HIGH)]
    if checkpoints is None:
        checkpoints = decade_points(n_min, n_max)
    checkpoints = [int(c) for c in checkpoints if n_min <= c <= n_max]
    ratios = [float(x) for x in chebyshev_ratio(table, checkpoints)]
    return ChebyshevScan(n_min, n_max, bad, checkpoints, ratios)


def dusart_bounds(k):
    """(lower, upper) bounds on the k-th prime, valid for k >= 6."""
    k = np.asarray(k, dtype=float)
    base = np.log(k) + np.log(np.log(k))
    return k * (base - 1), k * base


@dataclass
class DusartScan:
    k_min: int
    k_max: int
    violations: list[tuple[int, int, float, float]]


def dusart_scan(table: PrimeTable, k_max: int, k_min: int = 6) -> DusartScan:
    if k_min < 6:
        raise ValueError("the bounds are only claimed for k >= 6")
    if k_max > len(table.primes):
        raise TableTooSmall(f"p_{k_max} is beyond the table limit {table.limit}")
    k = np.arange(k_min, k_max + 1)
    pk = table.primes[k - 1]
    lo, hi = dusart_bounds(k)
    bad = np.flatnonzero((pk < lo) | (pk > hi))
    return DusartScan(
        k_min, k_max, [(int(k[i]), int(pk[i]), float(lo[i]), float(hi[i])) for i in bad]
    )


@dataclass
class ReciprocalComparison:
    checkpoints: list[int]
    prime_sums: list[float]
    comparison_sums: list[float]

    @property
    def differences(self) -> list[float]:
        return [a - b for a, b in zip(self.prime_sums, self.comparison_sums)]


def prime_reciprocal_comparison(table: PrimeTable, checkpoints) -> ReciprocalComparison:
    """Sum of 1/p for p <= N against sum_{k=6}^{pi(N)} 1/(k(ln k + ln ln k)).

    Both sums are accumulated with ``math.fsum`` between checkpoints.
    """
    checkpoints = [int(c) for c in checkpoints]
    if checkpoints and max(checkpoints) > table.limit:
        raise TableTooSmall(f"checkpoint {max(checkpoints)} is beyond {table.limit}")
    kmax = table.pi(max(checkpoints)) if checkpoints else 0
    k = np.arange(6, max(kmax, 6) + 1, dtype=float)
    comp_terms = 1.0 / (k * (np.log(k) + np.log(np.log(k))))
    recip = 1.0 / table.primes.astype(float)

    p_sums, c_sums = [], []
    p_parts, c_parts = [], []
    p_done = c_done = 0
    for N in checkpoints:
        np_upto = table.pi(N)
        p_parts.append(math.fsum(recip[p_done:np_upto]))
        p_done = np_upto
        kk = max(np_upto - 5, 0)  # number of comparison terms with k in [6, pi(N)]
        c_parts.append(math.fsum(comp_terms[c_done:kk]))
        c_done = max(c_done, kk)
        p_sums.append(math.fsum(p_parts))
        c_sums.append(math.fsum(c_parts))
    return ReciprocalComparison(checkpoints, p_sums, c_sums)


def decade_points(lo: int, hi: int, per_decade: int = 3) -> list[int]:
    """Log-spaced integer checkpoints from ``lo`` to ``hi`` inclusive."""
    a, b = math.log10(lo), math.log10(hi)
    count = max(2, int(round((b - a) * per_decade)) + 1)
    pts = sorted({int(round(10**x)) for x in np.linspace(a, b, count)})
    return [p for p in pts if lo <= p <= hi]
