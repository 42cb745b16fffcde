"""Convergence-in-density diagnostics.

x_n -> x in density when every exceptional set A(eps) = {n : |x_n - x| >= eps}
has zero density. Finite data can only be consistent or inconsistent with
that, so :func:`d_lim_diagnostic` reports a verdict per epsilon and a witness
whenever it calls a sequence inconsistent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .density import (
    DECREASING,
    INCONCLUSIVE,
    INCREASING,
    STABILIZING,
    DensityProfile,
    IndexSet,
    counting_profile,
    default_checkpoints,
    fit_trend,
    harmonic_profile,
    tail_extreme_profile,
)
from .errors import BoundViolated, PreconditionViolated
from .series_core import RunningSum, SeriesSpec, compensated_cumsum, dense_terms

CONSISTENT = "consistent-with-density-limit"
INCONSISTENT = "inconsistent"
VERDICTS = (CONSISTENT, INCONSISTENT, INCONCLUSIVE)

MODES = ("natural", "lower", "harmonic")
DEFAULT_EPSILONS = (1.0, 0.1, 0.01)

Values = Callable[[np.ndarray], np.ndarray] | np.ndarray


def dense_values(values: Values, horizon: int) -> np.ndarray:
    """x[0..horizon] from a vectorised rule or an array indexed by n."""
    if callable(values):
        n = np.arange(horizon + 1, dtype=np.int64)
        x = np.asarray(values(n), dtype=float)
        if x.shape != n.shape:
            x = np.array([float(values(int(k))) for k in n])
    else:
        x = np.asarray(values, dtype=float)
        if len(x) < horizon + 1:
            raise ValueError(f"value array covers n <= {len(x) - 1}, need {horizon}")
        x = x[: horizon + 1]
    return x


def series_values(spec: SeriesSpec, horizon: int, rule=lambda n, a: n * a) -> np.ndarray:
    """x_n = rule(n, a_n) for n <= horizon (a_n = 0 where the series has no term)."""
    a = dense_terms(spec, horizon)
    n = np.arange(horizon + 1, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        x = np.asarray(rule(n, a), dtype=float)
    x[0] = 0.0
    return np.where(a > 0, x, 0.0)


@dataclass
class ExceptionalSet:
    epsilon: float
    target: float
    carrier: IndexSet
    horizon: int

    def members(self) -> np.ndarray:
        return self.carrier.members(self.horizon)

    def __len__(self):
        return self.carrier.count(self.horizon)


def exceptional_set(values: Values, target: float, epsilon: float, horizon: int) -> ExceptionalSet:
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    x = dense_values(values, horizon)
    mask = np.abs(x - target) >= epsilon
    mask[0] = False
    carrier = IndexSet.from_mask(mask, f"A({epsilon:g})")
    return ExceptionalSet(float(epsilon), float(target), carrier, horizon)


# -- diagnostic -------------------------------------------------------------------


@dataclass
class EpsilonResult:
    epsilon: float
    profile: DensityProfile
    status: str  # zero | classical | positive | inconclusive


@dataclass
class DiagnosticReport:
    mode: str
    target: float
    epsilons: list[float]
    profiles: list[DensityProfile]
    verdict: str
    witness: tuple[float, int, float] | None = None
    statuses: list[str] = field(default_factory=list)
    envelope: list[float] = field(default_factory=list)
    envelope_trend: str = INCONCLUSIVE

    @property
    def checkpoints(self) -> list[int]:
        return self.profiles[0].checkpoints if self.profiles else []

    @property
    def consistent(self) -> bool:
        return self.verdict == CONSISTENT

    def rows(self) -> list[dict]:
        out = []
        for eps, prof, status in zip(self.epsilons, self.profiles, self.statuses):
            for N, v in zip(prof.checkpoints, prof.values):
                out.append(
                    {
                        "mode": self.mode,
                        "epsilon": eps,
                        "checkpoint": N,
                        "value": v,
                        "verdict": status,
                    }
                )
        return out


def envelope(x: np.ndarray, target: float, checkpoints: Sequence[int]) -> list[float]:
    """max |x_n - target| over each interval (N_{i-1}, N_i]."""
    d = np.abs(x - target)
    d[0] = 0.0
    out, lo = [], 1
    for N in checkpoints:
        seg = d[lo : N + 1]
        out.append(float(seg.max()) if len(seg) else 0.0)
        lo = N + 1
    return out


def _profile(mask: np.ndarray, name: str, checkpoints, mode: str) -> DensityProfile:
    S = IndexSet.from_mask(mask, name)
    if mode == "natural":
        return counting_profile(S, checkpoints)
    if mode == "lower":
        return tail_extreme_profile(counting_profile(S, checkpoints), "lower")
    if mode == "harmonic":
        return harmonic_profile(S, checkpoints)
    raise ValueError(f"mode must be one of {MODES}")


def d_lim_diagnostic(
    values: Values,
    target: float = 0.0,
    epsilons: Sequence[float] = DEFAULT_EPSILONS,
    checkpoints: Sequence[int] | None = None,
    mode: str = "natural",
) -> DiagnosticReport:
    """Check whether x_n -> target in the chosen density notion.

    For each epsilon the profile of A(eps) must fit a zero-limit template. An
    epsilon whose profile has not yet turned down is excused when the
    per-interval envelope of |x_n - target| itself decays to zero (ordinary
    convergence, so A(eps) is finite beyond the horizon). A profile that
    stabilizes at a positive level or grows, with no such excuse, is a witness
    of inconsistency.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    eps_list = [float(e) for e in epsilons]
    if not eps_list or any(e <= 0 for e in eps_list):
        raise ValueError("epsilons must be positive")
    cps = list(checkpoints) if checkpoints is not None else default_checkpoints()
    if any(b <= a for a, b in zip(cps, cps[1:])):
        raise ValueError("checkpoints must be strictly increasing")
    horizon = cps[-1]
    x = dense_values(values, horizon)
    dev = np.abs(x - target)

    env = envelope(x, target, cps)
    env_trend = fit_trend(cps, env).trend if len(cps) >= 2 else INCONCLUSIVE

    profiles, statuses, witness = [], [], None
    for eps in eps_list:
        mask = dev >= eps
        mask[0] = False
        prof = _profile(mask, f"A({eps:g})", cps, mode)
        if prof.trend == DECREASING:
            status = "zero"
        elif env_trend == DECREASING:
            status = "classical"
        elif prof.trend in (STABILIZING, INCREASING):
            status = "positive"
            if witness is None:
                witness = (eps, prof.checkpoints[-1], prof.values[-1])
        else:
            status = "inconclusive"
        profiles.append(prof)
        statuses.append(status)

    if "positive" in statuses:
        verdict = INCONSISTENT
    elif "inconclusive" in statuses:
        verdict = INCONCLUSIVE
    else:
        verdict = CONSISTENT
    return DiagnosticReport(mode, float(target), eps_list, profiles, verdict, witness, statuses, env, env_trend)


# -- Koopman-von Neumann ----------------------------------------------------------


@dataclass
class KvNRow:
    epsilon: float
    checkpoint: int
    cesaro: float
    density: float
    bound: float
    holds: bool


@dataclass
class KvNReport:
    direction: str
    rows: list[KvNRow]
    cesaro_trend: str
    diagnostic: DiagnosticReport | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def all_hold(self) -> bool:
        return all(r.holds for r in self.rows)

    def cesaro_at(self, N: int) -> float:
        for r in self.rows:
            if r.checkpoint == N:
                return r.cesaro
        raise KeyError(N)


def _cesaro_and_counts(x: np.ndarray, cps, eps_list):
    acc = RunningSum()
    totals, lo = [], 1
    for N in cps:
        totals.append(acc.add(x[lo : N + 1]))
        lo = N + 1
    counts = {}
    for eps in eps_list:
        cum = np.cumsum(x >= eps)
        cum -= int(x[0] >= eps)
        counts[eps] = [int(cum[N]) for N in cps]
    return totals, counts


def kvn_forward_check(values: Values, checkpoints=None, epsilons=DEFAULT_EPSILONS) -> KvNReport:
    """Cesaro mean -> 0 implies density limit 0, via
    |A(eps) ∩ [1, n]| / n <= (1 / (eps n)) sum_{k <= n} a_k.

    The inequality is checked as eps * count <= sum, which compares two
    correctly rounded quantities and so is exact.
    """
    cps = list(checkpoints) if checkpoints is not None else default_checkpoints()
    x = dense_values(values, cps[-1])
    if np.any(x[1:] < 0):
        raise PreconditionViolated("values must be nonnegative")
    eps_list = [float(e) for e in epsilons]
    totals, counts = _cesaro_and_counts(x, cps, eps_list)
    rows = []
    for eps in eps_list:
        for N, tot, c in zip(cps, totals, counts[eps]):
            rows.append(KvNRow(eps, N, tot / N, c / N, tot / (eps * N), eps * c <= tot))
    trend = fit_trend(cps, [t / N for t, N in zip(totals, cps)]).trend if len(cps) >= 2 else INCONCLUSIVE
    return KvNReport("forward", rows, trend)


def kvn_converse_check(values: Values, bound: float, checkpoints=None, epsilons=DEFAULT_EPSILONS) -> KvNReport:
    """For bounded sequences, density limit 0 implies Cesaro mean -> 0, via
    (1/n) sum a_k <= (|A(eps) ∩ [1, n]| / n) * sup a + eps.

    Raises BoundViolated when a sampled value exceeds ``bound``. The report
    also carries the density diagnostic and flags a Cesaro trend that fails
    to vanish, which is what happens for unbounded sequences.
    """
    cps = list(checkpoints) if checkpoints is not None else default_checkpoints()
    x = dense_values(values, cps[-1])
    if np.any(x[1:] < 0):
        raise PreconditionViolated("values must be nonnegative")
    top = float(x[1:].max()) if len(x) > 1 else 0.0
    if top > bound:
        raise BoundViolated(f"value {top} exceeds the declared bound {bound}")
    eps_list = [float(e) for e in epsilons]
    totals, counts = _cesaro_and_counts(x, cps, eps_list)
    rows = []
    for eps in eps_list:
        for N, tot, c in zip(cps, totals, counts[eps]):
            rhs = (c / N) * bound + eps
            rows.append(KvNRow(eps, N, tot / N, c / N, rhs, tot / N <= rhs * (1 + 1e-12)))
    cesaro = [t / N for t, N in zip(totals, cps)]
    trend = fit_trend(cps, cesaro).trend if len(cps) >= 2 else INCONCLUSIVE
    diag = d_lim_diagnostic(x, 0.0, eps_list, cps, "natural")
    notes = []
    if diag.consistent and trend != DECREASING:
        notes.append(f"density limit is 0 but the Cesaro means are {trend}: the converse needs boundedness")
    return KvNReport("converse", rows, trend, diag, notes)


# -- identities used by the Salat-Toma and Olivier arguments ------------------------


def cesaro_identity(spec: SeriesSpec, checkpoints: Sequence[int]) -> list[tuple[int, float, float]]:
    """(N, (a_1 + 2a_2 + ... + N a_N)/N, S_N - (S_1 + ... + S_{N-1})/N)."""
    horizon = max(checkpoints)
    a = dense_terms(spec, horizon)
    n = np.arange(horizon + 1, dtype=float)
    S = compensated_cumsum(a)
    out = []
    for N in checkpoints:
        left = math.fsum(n[1 : N + 1] * a[1 : N + 1]) / N
        right = S[N] - math.fsum(S[1:N]) / N
        out.append((int(N), left, right))
    return out


def olivier_reduction(spec: SeriesSpec, checkpoints: Sequence[int]) -> list[tuple[int, float, float]]:
    """(N, (N+1) a_N / 2, Cesaro mean of k a_k at N); for decreasing a the first
    never exceeds the second."""
    horizon = max(checkpoints)
    a = dense_terms(spec, horizon)
    n = np.arange(horizon + 1, dtype=float)
    out = []
    for N in checkpoints:
        out.append((int(N), (N + 1) * a[N] / 2, math.fsum(n[1 : N + 1] * a[1 : N + 1]) / N))
    return out
