"""Integral-comparison machinery for the De Morgan-Bertrand family.

For a positive decreasing f and the closed-form antiderivative F,

    int_{N+1}^oo f  <=  sum_{n > N} f(n)  <=  int_N^oo f,

which gives certified sum brackets, and the running difference
D_n = sum_{start}^n f - int_{start}^n f decreases to the generalized Euler
constant with D_n - gamma_f in (0, f(n)).

Answers such as 10^(10^86) do not fit in binary64, so inversions return a
:class:`TowerMagnitude`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NotApplicable
from .logscale import iterated_log, mb_integrand, mb_log_derivative, mb_start
from .series_core import MB, EULER_GAMMA, RunningSum, SeriesSpec, compensated_cumsum

__all__ = [
    "TowerMagnitude",
    "TowerEstimate",
    "SumBracket",
    "EulerConstantEstimate",
    "iterated_log",
    "mb_antiderivative",
    "mb_tail_integral",
    "sum_with_tail_bracket",
    "euler_constant",
    "terms_needed_for_tail",
    "crossing_threshold",
]

TOWER_CEILING = 1e15
TOWER_FLOOR = 15.0
LOG10E = math.log10(math.e)
CALIBRATION_POINT = 10**6
_SUM_CHUNK = 1 << 20
_EXP_LIMIT = 700.0


# -- tower magnitudes ------------------------------------------------------------


@dataclass(frozen=True, order=True)
class TowerMagnitude:
    """exp10 applied ``height`` times to ``top``.

    Normalised so that height 0 holds plain values below 1e15 and, for
    height >= 1, 15 <= top < 1e15. Under that normalisation the dataclass
    ordering on (height, top) is the numeric ordering.
    """

    height: int
    top: float

    @classmethod
    def from_level(cls, level: int, value: float) -> TowerMagnitude:
        """The number exp10^level(value), normalised."""
        h, x = int(level), float(value)
        if h < 0 or not math.isfinite(x):
            raise ValueError("need level >= 0 and a finite value")
        while x >= TOWER_CEILING:
            x, h = math.log10(x), h + 1
        while h >= 1 and x < TOWER_FLOOR:
            x, h = 10.0**x, h - 1
        return cls(h, x)

    @classmethod
    def from_value(cls, value: float) -> TowerMagnitude:
        return cls.from_level(0, value)

    @classmethod
    def from_exp_iterate(cls, k: int, y: float) -> TowerMagnitude:
        """The number exp^(k)(y), i.e. natural exponentials applied k times."""
        while k > 0 and y < _EXP_LIMIT:
            y, k = math.exp(y), k - 1
        if k == 0:
            return cls.from_value(y)
        # log10^(j) of exp^(k)(y) is exp^(k-j)(y) log10 e + log10 log10 e
        # up to terms below binary64 resolution once y >= 700
        if k == 1:
            return cls.from_level(1, y * LOG10E)
        return cls.from_level(k, y * LOG10E + math.log10(LOG10E))

    def down_to(self, level: int) -> float:
        """The log10-iterate at ``level``: value = exp10^level(down_to(level))."""
        if not 0 <= level <= self.height:
            raise ValueError(f"level must be in [0, {self.height}]")
        x = self.top
        for _ in range(self.height - level):
            if x > 308.25:
                raise OverflowError(f"{self} does not fit binary64 at level {level}")
            x = 10.0**x
        return x

    @property
    def log10(self) -> float:
        """log10 of the value (needs height >= 1 or a positive plain value)."""
        if self.height == 0:
            return math.log10(self.top)
        return self.down_to(1)

    def __str__(self):
        return f"10^^{self.height}@{self.top:.2f}"

    def to_json(self) -> dict:
        return {"height": self.height, "top": self.top}

    @classmethod
    def parse(cls, text: str) -> TowerMagnitude:
        m = re.fullmatch(r"\s*10\^\^(\d+)@([-+0-9.eE]+)\s*", text)
        if not m:
            raise ValueError(f"not a tower magnitude: {text!r}")
        return cls.from_level(int(m.group(1)), float(m.group(2)))


@dataclass
class TowerEstimate:
    """A magnitude together with a certified bracket [low, high]."""

    value: TowerMagnitude
    low: TowerMagnitude
    high: TowerMagnitude
    notes: list[str] = field(default_factory=list)
    exact: bool = False

    @property
    def top_width(self) -> float:
        """Bracket width in the top value; infinite when the ends differ in height."""
        if self.low.height != self.high.height:
            return math.inf
        return self.high.top - self.low.top


# -- antiderivatives --------------------------------------------------------------


def _check_mb(k: int, s: float):
    if k < 0:
        raise DomainError("k must be >= 0")


def mb_antiderivative(k: int, s: float, x):
    """F with F' = MB(k, s) integrand.

    k = 0: x^(1-s)/(1-s), or ln x when s = 1.
    k >= 1: L_k(x)^(1-s)/(1-s), or L_{k+1}(x) when s = 1.
    """
    _check_mb(k, s)
    if s == 1:
        return iterated_log(k + 1, x)
    # L_k(x) must be positive for a real power
    iterated_log(k + 1, x)
    Lk = np.asarray(iterated_log(k, x), dtype=float)
    out = Lk ** (1 - s) / (1 - s)
    return float(out) if np.ndim(out) == 0 else out


def mb_tail_integral(k: int, s: float, x):
    """int_x^oo of the integrand; requires s > 1."""
    if s <= 1:
        raise NotApplicable(f"the integral diverges for s = {s} <= 1")
    return -mb_antiderivative(k, s, x)


def _direct_sum(k: int, s: float, lo: int, hi: int) -> float:
    acc = RunningSum()
    for a in range(lo, hi + 1, _SUM_CHUNK):
        b = min(a + _SUM_CHUNK - 1, hi)
        acc.add(mb_integrand(k, s, np.arange(a, b + 1, dtype=float)))
    return acc.value


def _mb_of(spec) -> MB:
    if isinstance(spec, MB):
        return spec
    if isinstance(spec, tuple) and len(spec) == 2:
        return MB(*spec)
    raise NotApplicable(f"only the MB family has closed-form antiderivatives, got {spec!r}")


# -- brackets ------------------------------------------------------------------------


@dataclass(frozen=True)
class SumBracket:
    lower: float
    upper: float
    direct_terms: int
    method: str = ""

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ValueError("bracket with lower > upper")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def __contains__(self, x) -> bool:
        return self.lower <= x <= self.upper

    def within(self, lo: float, hi: float) -> bool:
        return lo <= self.lower and self.upper <= hi


def sum_with_tail_bracket(spec, N_direct: int) -> SumBracket:
    """Certified enclosure of the full sum of a convergent MB series.

    S_N + int_{N+1}^oo f <= sum <= S_N + int_N^oo f, widened outward by a few
    ulps for the floating-point evaluation of S_N and F.
    """
    mb = _mb_of(spec)
    if not mb.convergent:
        raise NotApplicable(f"{mb.canonical()} diverges; no finite sum to bracket")
    start = mb.start
    N = int(N_direct)
    if N < start:
        raise ValueError(f"N_direct must be >= the start index {start}")
    S = _direct_sum(mb.k, mb.s, start, N)
    hi = S + mb_tail_integral(mb.k, mb.s, N)
    lo = S + mb_tail_integral(mb.k, mb.s, N + 1)
    pad = 8 * math.ulp(abs(hi)) + 8 * math.ulp(mb_tail_integral(mb.k, mb.s, N))
    return SumBracket(lo - pad, hi + pad, N - start + 1, "direct fsum + integral comparison")


# -- generalized Euler constants -------------------------------------------------


@dataclass
class EulerConstantEstimate:
    gamma_f: float
    residual_bound: float
    anchor: int
    f_anchor: float
    samples: list[tuple[int, float, float, bool]] = field(default_factory=list)
    method: str = ""

    @property
    def samples_ok(self) -> bool:
        return all(ok for *_, ok in self.samples)

    @property
    def in_range(self) -> bool:
        """0 < gamma_f <= f(anchor)."""
        return 0 < self.gamma_f <= self.f_anchor


def euler_constant(k: int, s: float, N: int, sample_points=(), refine: bool = True) -> EulerConstantEstimate:
    """gamma_f for the MB(k, s) integrand, anchored at its start index.

    The sum-minus-integral difference D_N exceeds gamma_f by E_f(N) in
    (0, f(N)). With ``refine`` the estimate subtracts the Euler-Maclaurin
    end correction f(N)/2 + f'(N)/12; for f = 1/x the harmonic expansion
    gives a remainder below 1/(120 N^4) instead of f(N).

    Each sample point n reports (n, E_f(n), f(n), 0 < E_f(n) < f(n)).
    """
    if s <= 0:
        raise DomainError("the integrand must be decreasing (s > 0)")
    anchor = mb_start(k)
    if N <= anchor:
        raise DomainError(f"N must exceed the start index {anchor}")
    pts = sorted({int(n) for n in sample_points if anchor <= int(n) < N} | {N})
    F0 = mb_antiderivative(k, s, float(anchor))
    acc = RunningSum()
    D = {}
    done = anchor - 1
    for n in pts:
        acc.add(mb_integrand(k, s, np.arange(done + 1, n + 1, dtype=float)))
        done = n
        D[n] = acc.value - (mb_antiderivative(k, s, float(n)) - F0)

    fN = mb_integrand(k, s, float(N))
    DN = D[N]
    if refine and k == 0 and s == 1:
        gamma = DN - 1 / (2 * N) + 1 / (12 * N * N)
        residual = 1 / (120 * float(N) ** 4) + 4 * math.ulp(acc.value)
        method = "harmonic expansion"
    elif refine:
        gamma = DN - fN / 2 - fN * mb_log_derivative(k, s, float(N)) / 12
        residual = fN
        method = "Euler-Maclaurin end correction"
    else:
        gamma = DN - fN / 2
        residual = fN / 2
        method = "midpoint of (D_N - f(N), D_N)"

    samples = []
    for n in pts:
        if n == N:
            continue
        E = D[n] - gamma
        fn = mb_integrand(k, s, float(n))
        samples.append((n, E, fn, 0 < E < fn))
    return EulerConstantEstimate(gamma, residual, anchor, mb_integrand(k, s, float(anchor)), samples, method)


# -- inversions ------------------------------------------------------------------------


def terms_needed_for_tail(spec, tau: float) -> TowerEstimate:
    """How far to sum before the remaining tail drops below ``tau``.

    Solves int_N^oo f = tau analytically. Summing through index N then leaves
    a tail below tau, while the tail after N - 1 terms still exceeds
    int_N^oo f = tau, so the answer lies in [N - 1, N].
    """
    mb = _mb_of(spec)
    if not mb.convergent:
        raise NotApplicable(f"{mb.canonical()} diverges; every tail is infinite")
    if tau <= 0:
        raise ValueError("tau must be positive")
    first = mb.term(mb.start)
    if tau >= first:
        raise ValueError(f"tau = {tau} is not below the first-term magnitude {first}")
    s, k = mb.s, mb.k
    # int_N^oo f = L_k(N)^(1-s) / (s-1)  (with L_0(N) = N)
    y = (tau * (s - 1)) ** (-1 / (s - 1))
    top = TowerMagnitude.from_exp_iterate(k, y)
    notes = []
    if top.height == 0:
        hi = top.top
        low, high = TowerMagnitude.from_value(max(hi - 1, mb.start)), top
        value = TowerMagnitude.from_value(hi - 0.5)
    else:
        low = high = value = top
        notes.append("N - 1 and N coincide at this tower height")
    return TowerEstimate(value, low, high, notes)


def _partial_sum_crossing(k: int, s: float, T: float, N0: int):
    """(first N <= N0 with S_N >= T or None, S_N0)."""
    start = mb_start(k)
    acc = RunningSum()
    lo = start
    while lo <= N0:
        hi = min(lo + _SUM_CHUNK - 1, N0)
        vals = mb_integrand(k, s, np.arange(lo, hi + 1, dtype=float))
        prefix = compensated_cumsum(vals) + acc.value
        hit = np.flatnonzero(prefix >= T)
        if len(hit):
            return lo + int(hit[0]), None
        acc.add(vals)
        lo = hi + 1
    return None, acc.value


def crossing_threshold(spec, T: float, N0: int = CALIBRATION_POINT) -> TowerEstimate:
    """First index N with S_N >= T for a divergent MB series.

    Below N0 the crossing is found by direct summation. Beyond it the partial
    sums are calibrated as S_N = F(N) + C with C = S_N0 - F(N0); since D_n
    decreases by less than f(N0) after N0, S_N lies in
    (F(N) + C - f(N0), F(N) + C], and both ends are inverted analytically.
    """
    mb = _mb_of(spec)
    k, s = mb.k, mb.s
    if mb.convergent:
        raise NotApplicable(f"{mb.canonical()} converges; thresholds above its sum are never crossed")
    hit, S0 = _partial_sum_crossing(k, s, T, N0)
    if hit is not None:
        t = TowerMagnitude.from_value(hit)
        return TowerEstimate(t, t, t, ["crossing found by direct summation"], exact=True)
    if s <= 0:
        raise NotApplicable("calibration needs a decreasing integrand (s > 0)")

    C = S0 - mb_antiderivative(k, s, float(N0))
    f0 = mb_integrand(k, s, float(N0))

    def invert(target: float) -> TowerMagnitude:
        if s == 1:
            return TowerMagnitude.from_exp_iterate(k + 1, target)
        base = (target * (1 - s)) ** (1 / (1 - s))
        return TowerMagnitude.from_exp_iterate(k, base)

    low = invert(T - C)
    high = invert(T - C + f0)
    value = invert(T - C + f0 / 2)
    notes = [
        f"calibrated at N0 = {N0}: C = {C!r}, calibration error f(N0) = {f0:.3e}",
    ]
    return TowerEstimate(value, low, high, notes)
