"""Index sets and finite-N density profiles.

A limit such as d(A) = lim |A ∩ [1, N]| / N is never observable, so every
notion here is sampled at checkpoints and summarised by a trend verdict from
:func:`fit_trend`. Lower and upper densities are tail infima and suprema of
the natural profile, not separate numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator, Sequence

import numpy as np
from scipy.optimize import nnls

from . import primes as _primes
from .errors import InvalidWeight, PreconditionViolated

DECREASING = "decreasing-to-zero"
STABILIZING = "stabilizing"
INCREASING = "increasing"
INCONCLUSIVE = "inconclusive"
TRENDS = (DECREASING, STABILIZING, INCREASING, INCONCLUSIVE)

NOTIONS = ("natural", "lower-proxy", "upper-proxy", "harmonic", "weight-phi")

TREND_TOLERANCE = 0.10

_MAX_BLOCK = 18  # 10**18 + 18 still fits in int64


def default_checkpoints(lo: int = 100, hi: int = 10**6, per_decade: int = 3) -> list[int]:
    return _primes.decade_points(lo, hi, per_decade)


# -- index sets ----------------------------------------------------------------


class IndexSet:
    """A subset of the positive integers.

    ``contains`` is a vectorised predicate over int64 arrays. ``count`` and
    ``enumerate`` are optional closed forms; when absent they fall back to the
    predicate, so supplying them gives an independent second path that the
    consistency checks compare against.
    """

    def __init__(
        self,
        name: str,
        contains: Callable[[np.ndarray], np.ndarray],
        count: Callable[[int], int] | None = None,
        enumerate: Callable[[int], np.ndarray] | None = None,
    ):
        self.name = name
        self._contains = contains
        self._count = count
        self._enumerate = enumerate

    def __repr__(self):
        return f"IndexSet({self.name!r})"

    def __eq__(self, other):
        return isinstance(other, IndexSet) and other.name == self.name

    def __hash__(self):
        return hash(("IndexSet", self.name))

    def contains(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        out = np.asarray(self._contains(idx), dtype=bool)
        return out & (idx >= 1)

    def __contains__(self, n) -> bool:
        return bool(self.contains(np.array([int(n)]))[0])

    def mask(self, N: int) -> np.ndarray:
        """Boolean array m of length N + 1 with m[n] = (n in S); m[0] is False."""
        m = self.contains(np.arange(N + 1, dtype=np.int64))
        m[0] = False
        return m

    def members(self, N: int) -> np.ndarray:
        """Sorted members <= N (the enumerator)."""
        if self._enumerate is not None:
            out = np.asarray(self._enumerate(N), dtype=np.int64)
            return out[(out >= 1) & (out <= N)]
        return np.flatnonzero(self.mask(N))

    def count(self, N: int) -> int:
        if self._count is not None:
            return int(self._count(N))
        return int(self.mask(N).sum())

    def counts(self, checkpoints: Sequence[int]) -> np.ndarray:
        checkpoints = np.asarray(checkpoints, dtype=np.int64)
        cum = np.cumsum(self.mask(int(checkpoints.max())))
        return cum[checkpoints]

    def __iter__(self) -> Iterator[int]:
        lo, hi = 0, 1024
        while True:
            for n in self.members(hi):
                if n > lo:
                    yield int(n)
            if hi >= 2**62:
                return
            lo, hi = hi, hi * 4

    def complement(self) -> IndexSet:
        inner = self
        return IndexSet(
            f"not({self.name})",
            lambda n: ~inner.contains(n),
            count=(lambda N: N - inner.count(N)) if self._count else None,
        )

    def __and__(self, other: IndexSet) -> IndexSet:
        a, b = self, other
        return IndexSet(f"and({a.name},{b.name})", lambda n: a.contains(n) & b.contains(n))

    def __or__(self, other: IndexSet) -> IndexSet:
        a, b = self, other
        return IndexSet(f"or({a.name},{b.name})", lambda n: a.contains(n) | b.contains(n))

    @classmethod
    def from_mask(cls, mask: np.ndarray, name: str = "mask") -> IndexSet:
        """Set materialised on [1, len(mask) - 1]; nothing beyond the horizon."""
        mask = np.asarray(mask, dtype=bool).copy()
        mask[0] = False
        horizon = len(mask) - 1
        cum = np.cumsum(mask)

        def contains(n):
            out = np.zeros(n.shape, dtype=bool)
            ok = (n >= 0) & (n <= horizon)
            out[ok] = mask[n[ok]]
            return out

        return cls(name, contains, count=lambda N: int(cum[min(N, horizon)]))

    @classmethod
    def finite(cls, elements, name: str | None = None) -> IndexSet:
        elems = np.unique(np.asarray(list(elements), dtype=np.int64))
        elems = elems[elems >= 1]
        return cls(
            name or "{" + ",".join(map(str, elems[:6])) + ("...}" if len(elems) > 6 else "}"),
            lambda n: np.isin(n, elems),
            count=lambda N: int(np.searchsorted(elems, N, side="right")),
            enumerate=lambda N: elems[elems <= N],
        )

    @classmethod
    def from_predicate(cls, pred: Callable, name: str) -> IndexSet:
        """Wrap a predicate; vectorised calls are tried first, then a per-index loop."""

        def contains(n):
            try:
                out = np.asarray(pred(n), dtype=bool)
                if out.shape == n.shape:
                    return out
            except Exception:
                pass
            return np.fromiter((bool(pred(int(k))) for k in n), dtype=bool, count=len(n))

        return cls(name, contains)


def _isqrt_array(n: np.ndarray) -> np.ndarray:
    r = np.floor(np.sqrt(np.maximum(n, 0).astype(float))).astype(np.int64)
    r -= (r * r > n).astype(np.int64)
    r += ((r + 1) * (r + 1) <= n).astype(np.int64)
    return r


def _block_contains(n: np.ndarray) -> np.ndarray:
    out = np.zeros(n.shape, dtype=bool)
    for b in range(1, _MAX_BLOCK + 1):
        off = n - 10**b
        out |= (off >= 1) & (off <= b)
    return out


def _block_members(N: int) -> np.ndarray:
    out = []
    for b in range(1, _MAX_BLOCK + 1):
        if 10**b + 1 > N:
            break
        out.extend(range(10**b + 1, min(10**b + b, N) + 1))
    return np.array(out, dtype=np.int64)


def _pow2_count(N: int) -> int:
    return N.bit_length() if N >= 1 else 0


NATURALS = IndexSet("all", lambda n: np.ones(n.shape, dtype=bool), count=lambda N: max(N, 0))
EVENS = IndexSet("evens", lambda n: n % 2 == 0, count=lambda N: N // 2)
ODDS = IndexSet("odds", lambda n: n % 2 == 1, count=lambda N: (N + 1) // 2)
SQUARES = IndexSet(
    "squares",
    lambda n: _isqrt_array(n) ** 2 == n,
    count=lambda N: math.isqrt(N),
    enumerate=lambda N: np.arange(1, math.isqrt(N) + 1, dtype=np.int64) ** 2,
)
POW2 = IndexSet(
    "pow2",
    lambda n: (n > 0) & ((n & (n - 1)) == 0),
    count=_pow2_count,
    enumerate=lambda N: 2 ** np.arange(_pow2_count(N), dtype=np.int64),
)
PRIMES = IndexSet(
    "primes",
    _primes.is_prime_array,
    count=lambda N: _primes.shared_table(max(N, 2)).pi(N) if N >= 2 else 0,
    enumerate=lambda N: _primes.shared_table(max(N, 2)).primes,
)
BLOCKS = IndexSet("blocks", _block_contains, enumerate=_block_members)

BUILTIN_SETS = {s.name: s for s in (NATURALS, EVENS, ODDS, SQUARES, POW2, PRIMES, BLOCKS)}


# -- trend classification ---------------------------------------------------------


@dataclass(frozen=True)
class TrendFit:
    trend: str
    limit: float | None
    residual: float
    template: str


def _tail_window(N: np.ndarray) -> np.ndarray:
    """Indices of the last two decades of checkpoints, if that holds >= 4 points."""
    idx = np.flatnonzero(N >= N[-1] / 100.0)
    if len(idx) >= 4:
        return idx
    return np.arange(len(N))


def _weighted_fit(design: np.ndarray, v: np.ndarray, nonneg: bool):
    scale = max(float(np.max(np.abs(v))), 1e-300)
    w = np.maximum(np.abs(v), 1e-9 * scale)
    A = design / w[:, None]
    b = v / w
    if nonneg:
        coef, _ = nnls(A, b)
    else:
        coef = np.linalg.lstsq(A, b, rcond=None)[0]
    rel = np.abs(design @ coef - v) / w
    return coef, float(rel.max())


_ZERO_TEMPLATES = {
    "c/log N": lambda N: 1 / np.log(N),
    "c*loglog N/log N": lambda N: np.log(np.log(N)) / np.log(N),
    "c/sqrt N": lambda N: 1 / np.sqrt(N),
    "c*log N/N": lambda N: np.log(N) / N,
    "c/N": lambda N: 1 / N,
}
_GROWTH_TEMPLATES = {
    "c*log N": np.log,
    "c*sqrt N": np.sqrt,
    "c*N": lambda N: N,
}


def fit_trend(checkpoints, values, tol: float = TREND_TOLERANCE) -> TrendFit:
    """Classify the tail behaviour of ``values`` sampled at ``checkpoints``.

    Three model families are fitted with weighted least squares so that the
    error is relative at every point:

    * zero limit: nonnegative combination of decaying templates
      (1/log N, log log N/log N, 1/sqrt N, log N/N, 1/N);
    * growth: nonnegative combination of log N, sqrt N and N;
    * stabilizing: L + c/log N with L > 0.

    The first family whose worst relative error is below ``tol`` wins, in the
    order listed, except that a stabilizing fit with a clearly positive limit
    and a smaller error overrides the zero-limit family. When nothing fits, a
    window maximum at least sqrt(N_last / N_first) times the last value still
    counts as decreasing to zero (staircase profiles). Only the tail window
    (last two decades) is used, so that finite transients below a threshold
    crossing do not dominate.
    """
    N = np.asarray(checkpoints, dtype=float)
    v = np.asarray(values, dtype=float)
    if len(N) != len(v) or len(N) < 2:
        raise ValueError("need matching checkpoint/value lists of length >= 2")
    if np.any(N < 2):
        keep = N >= 2
        N, v = N[keep], v[keep]
    w = _tail_window(N)
    N, v = N[w], v[w]

    if np.all(v == 0):
        return TrendFit(DECREASING, 0.0, 0.0, "zero")
    if np.any(v < 0):
        return TrendFit(INCONCLUSIVE, None, math.inf, "negative values")

    names = list(_ZERO_TEMPLATES)
    design = np.column_stack([_ZERO_TEMPLATES[k](N) for k in names])
    coef, err_zero = _weighted_fit(design, v, nonneg=True)
    sdesign = np.column_stack([np.ones_like(N), 1 / np.log(N)])
    scoef, err_stab = _weighted_fit(sdesign, v, nonneg=False)
    stab_ok = err_stab < tol and scoef[0] > tol * float(v.max())

    # a clearly positive intercept that fits better beats the decaying mix
    if err_zero < tol and not (stab_ok and err_stab < err_zero):
        used = "+".join(k for k, c in zip(names, coef) if c > 0)
        return TrendFit(DECREASING, 0.0, err_zero, used)

    if v[-1] > v[0] * (1 + tol):
        gnames = list(_GROWTH_TEMPLATES)
        gdesign = np.column_stack([_GROWTH_TEMPLATES[k](N) for k in gnames])
        gcoef, err_grow = _weighted_fit(gdesign, v, nonneg=True)
        if err_grow < tol:
            used = "+".join(k for k, c in zip(gnames, gcoef) if c > 0)
            return TrendFit(INCREASING, math.inf, err_grow, used)

    if stab_ok:
        return TrendFit(STABILIZING, float(scoef[0]), err_stab, "L+c/log N")

    # staircase profiles fit no smooth template; accept them when the tail
    # supremum falls across the window at least like N^(-1/2)
    if N[-1] >= 10 * N[0]:
        drop = float(v.max()) / max(float(v[-1]), 1e-300)
        if drop >= math.sqrt(N[-1] / N[0]):
            return TrendFit(DECREASING, 0.0, min(err_zero, err_stab), "envelope N^-1/2")

    return TrendFit(INCONCLUSIVE, None, min(err_zero, err_stab), "none")


# -- profiles -----------------------------------------------------------------------


@dataclass
class DensityProfile:
    notion: str
    checkpoints: list[int]
    values: list[float]
    trend: str = INCONCLUSIVE
    limit_estimate: float | None = None
    set_name: str = ""
    template: str = ""

    def __post_init__(self):
        if self.notion not in NOTIONS:
            raise ValueError(f"unknown density notion {self.notion!r}")

    @property
    def last(self) -> float:
        return self.values[-1]

    def as_rows(self):
        return list(zip(self.checkpoints, self.values))


def _check_checkpoints(checkpoints, minimum=1) -> list[int]:
    cps = [int(c) for c in checkpoints]
    if not cps:
        raise ValueError("empty checkpoint list")
    if any(b <= a for a, b in zip(cps, cps[1:])):
        raise ValueError("checkpoints must be strictly increasing")
    if cps[0] < minimum:
        raise ValueError(f"checkpoints must be >= {minimum}")
    return cps


def _classified(profile: DensityProfile) -> DensityProfile:
    if len(profile.checkpoints) >= 2:
        fit = fit_trend(profile.checkpoints, profile.values)
        profile.trend, profile.limit_estimate, profile.template = fit.trend, fit.limit, fit.template
    return profile


def counting_profile(S: IndexSet, checkpoints) -> DensityProfile:
    """values[i] = |S ∩ [1, N_i]| / N_i."""
    cps = _check_checkpoints(checkpoints)
    counts = S.counts(cps)
    values = [int(c) / n for c, n in zip(counts, cps)]
    return _classified(DensityProfile("natural", cps, values, set_name=S.name))


def harmonic_profile(S: IndexSet, checkpoints) -> DensityProfile:
    """values[i] = (1 / ln N_i) * sum_{k <= N_i, k in S} 1/k."""
    cps = _check_checkpoints(checkpoints, minimum=2)
    sums = _reciprocal_sums(S.mask(cps[-1]), cps)
    values = [s / math.log(n) for s, n in zip(sums, cps)]
    return _classified(DensityProfile("harmonic", cps, values, set_name=S.name))


def _reciprocal_sums(mask: np.ndarray, cps: Sequence[int]) -> list[float]:
    parts, out, done = [], [], 0
    for N in cps:
        k = np.flatnonzero(mask[done + 1 : N + 1]) + done + 1
        parts.append(math.fsum(1.0 / k))
        out.append(math.fsum(parts))
        done = N
    return out


def weighted_counting_profile(S: IndexSet, phi: Callable, checkpoints) -> DensityProfile:
    """values[i] = |S ∩ [1, N_i]| / phi(N_i) for an increasing weight phi."""
    cps = _check_checkpoints(checkpoints)
    probe = np.unique(np.concatenate([cps, np.geomspace(cps[0], cps[-1], 200).astype(np.int64)]))
    try:
        w = np.asarray(phi(probe.astype(float)), dtype=float)
    except Exception:
        w = np.array([phi(float(n)) for n in probe])
    if np.any(~np.isfinite(w)) or np.any(w <= 0) or np.any(np.diff(w) <= 0):
        raise InvalidWeight("weight must be positive and increasing on the sampled range")
    weights = dict(zip(probe.tolist(), w.tolist()))
    counts = S.counts(cps)
    values = [int(c) / weights[n] for c, n in zip(counts, cps)]
    return _classified(DensityProfile("weight-phi", cps, values, set_name=S.name))


def tail_extreme_profile(profile: DensityProfile, which: str) -> DensityProfile:
    """Lower (tail infimum) or upper (tail supremum) proxy of a natural profile."""
    v = np.asarray(profile.values, dtype=float)
    if which == "lower":
        tail = np.minimum.accumulate(v[::-1])[::-1]
        notion = "lower-proxy"
    elif which == "upper":
        tail = np.maximum.accumulate(v[::-1])[::-1]
        notion = "upper-proxy"
    else:
        raise ValueError("which must be 'lower' or 'upper'")
    out = replace(profile, notion=notion, values=tail.tolist())
    return _classified(out)


def estimate_density_limit(profile: DensityProfile) -> tuple[float | None, str]:
    """Extrapolated limit and trend verdict; evidence only, never a proof."""
    cps = profile.checkpoints
    if len(cps) < 4 or cps[-1] < 100 * cps[0]:
        raise PreconditionViolated("need >= 4 checkpoints spanning >= 2 decades")
    fit = fit_trend(cps, profile.values)
    return fit.limit, fit.trend
