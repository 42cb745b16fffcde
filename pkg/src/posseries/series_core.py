"""Series families, term streams and the stream transforms.

A :class:`SeriesSpec` is an immutable description; :func:`make_stream` turns
it into a :class:`TermStream`, a single-owner cursor over ``(n, a_n)`` pairs.
Streams are produced in numpy chunks internally, so ``take``/``upto`` are the
fast paths and plain iteration is a convenience.

Partial sums are always accumulated with error compensation: ``math.fsum``
per chunk and an exact sum of the chunk results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from . import primes as _primes
from .density import IndexSet, NATURALS, _block_members
from .errors import DomainError, InvalidSpec
from .logscale import MAX_K, mb_integrand, mb_start

CHUNK = 1 << 16
EULER_GAMMA = 0.57721566490153286061

Chunk = tuple[np.ndarray, np.ndarray]


def _num(x: float) -> str:
    x = float(x)
    return str(int(x)) if x.is_integer() else repr(x)


# -- compensated accumulation ---------------------------------------------------


class RunningSum:
    """Running sum of float arrays, exact up to one rounding per ``add``."""

    def __init__(self):
        self._parts: list[float] = []

    def add(self, values) -> float:
        self._parts.append(math.fsum(np.asarray(values, dtype=float)))
        if len(self._parts) > 64:
            self._parts = [math.fsum(self._parts)]
        return self.value

    @property
    def value(self) -> float:
        return math.fsum(self._parts)


def compensated_cumsum(x, block: int = 512) -> np.ndarray:
    """Prefix sums whose block offsets are exact; only in-block error remains."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n == 0:
        return x.copy()
    rows = -(-n // block)
    padded = np.zeros(rows * block)
    padded[:n] = x
    padded = padded.reshape(rows, block)
    inner = np.cumsum(padded, axis=1)
    offsets = np.empty(rows)
    acc = RunningSum()
    for i in range(rows):
        offsets[i] = acc.value
        acc.add(padded[i])
    return (inner + offsets[:, None]).ravel()[:n]


# -- specs -------------------------------------------------------------------------


class SeriesSpec:
    """Base class; concrete specs are frozen dataclasses."""

    start: int = 1

    def canonical(self) -> str:
        raise NotImplementedError

    def __str__(self):
        return self.canonical()

    @property
    def closed_form(self) -> bool:
        return hasattr(self, "terms")

    def term(self, n: int) -> float:
        """Single term at index n (closed-form specs only)."""
        if not self.closed_form:
            raise NotImplementedError(f"{self.canonical()} has no random access")
        if n < self.start:
            raise DomainError(f"index {n} is below the start index {self.start}")
        return float(self.terms(np.array([n], dtype=float))[0])


@dataclass(frozen=True)
class MB(SeriesSpec):
    """1 / (n ln n ... L_{k-1}(n) L_k(n)^s), starting where L_k(n) > 0."""

    k: int
    s: float

    def __post_init__(self):
        if not isinstance(self.k, (int, np.integer)) or self.k < 0:
            raise InvalidSpec(f"MB needs an integer k >= 0, got {self.k!r}")
        if self.k > MAX_K:
            raise InvalidSpec(f"MB k={self.k} is beyond the supported range 0..{MAX_K}")
        if not math.isfinite(float(self.s)):
            raise InvalidSpec("MB needs a finite real s")
        object.__setattr__(self, "s", float(self.s))

    @property
    def start(self) -> int:
        return mb_start(self.k)

    @property
    def convergent(self) -> bool:
        return self.s > 1

    def terms(self, n):
        return mb_integrand(self.k, self.s, np.asarray(n, dtype=float))

    def canonical(self):
        return f"mb:k={self.k},s={_num(self.s)}"


@dataclass(frozen=True)
class Harmonic(SeriesSpec):
    def terms(self, n):
        return 1.0 / np.asarray(n, dtype=float)

    def canonical(self):
        return "harmonic"


@dataclass(frozen=True)
class PrimeReciprocal(SeriesSpec):
    """1/p over the primes; index labels are the primes themselves."""

    start = 2

    def canonical(self):
        return "prime-recip"


@dataclass(frozen=True)
class OlivierCounterexample(SeriesSpec):
    """a_n = ln n / n on squares, 1/n^2 otherwise; starts at 2 to keep a_n > 0."""

    start = 2

    def terms(self, n):
        n = np.asarray(n, dtype=float)
        sq = _is_square(n)
        return np.where(sq, np.log(n) / n, 1.0 / (n * n))

    def canonical(self):
        return "olivier"


@dataclass(frozen=True)
class SquareWeighted(SeriesSpec):
    """a_n = (ln n)^p / n on squares, 1/n^2 otherwise; starts at 2."""

    p: float
    start = 2

    def __post_init__(self):
        object.__setattr__(self, "p", float(self.p))

    def terms(self, n):
        n = np.asarray(n, dtype=float)
        sq = _is_square(n)
        return np.where(sq, np.log(n) ** self.p / n, 1.0 / (n * n))

    def canonical(self):
        return f"sqw:p={_num(self.p)}"


@dataclass(frozen=True)
class BlockCounterexample(SeriesSpec):
    """Terms 1/(10^b + 1), ..., 1/(10^b + b) for b = 1, 2, ...; labels 10^b + j."""

    start = 11

    def canonical(self):
        return "blocks"


@dataclass(frozen=True)
class AbelTransformOf(SeriesSpec):
    inner: SeriesSpec

    @property
    def start(self):
        return self.inner.start

    def canonical(self):
        return f"abel({self.inner.canonical()})"


@dataclass(frozen=True)
class RestrictedTo(SeriesSpec):
    inner: SeriesSpec
    S: IndexSet

    @property
    def start(self):
        return self.inner.start

    def canonical(self):
        return f"restrict({self.inner.canonical()},{self.S.name})"


@dataclass(frozen=True)
class BlockPermuted(SeriesSpec):
    """Reverse consecutive blocks of the inner stream.

    ``blocks`` is either a constant block length or ``"growing"`` (block j has
    length j).
    """

    inner: SeriesSpec
    blocks: int | str = "growing"

    def __post_init__(self):
        if self.blocks != "growing" and not (isinstance(self.blocks, int) and self.blocks >= 1):
            raise InvalidSpec("block rule must be a positive length or 'growing'")

    @property
    def start(self):
        return self.inner.start

    def length_rule(self) -> Callable[[int], int]:
        if self.blocks == "growing":
            return lambda j: j
        length = int(self.blocks)
        return lambda j: length

    def canonical(self):
        return f"perm({self.inner.canonical()},{self.blocks})"


@dataclass(frozen=True)
class Custom(SeriesSpec):
    """User term rule n -> a_n; positivity is only checked at emission time."""

    rule: Callable = field(compare=False)
    name: str = "custom"
    start: int = 1

    def terms(self, n):
        n = np.asarray(n, dtype=float)
        try:
            out = np.asarray(self.rule(n), dtype=float)
            if out.shape == n.shape:
                return out
        except Exception:
            pass
        return np.array([float(self.rule(int(k))) for k in n])

    def canonical(self):
        return f"custom:{self.name}"


def _is_square(n: np.ndarray) -> np.ndarray:
    r = np.round(np.sqrt(n))
    return r * r == n


# -- streams ----------------------------------------------------------------------


class TermStream:
    """Ordered producer of (n, a_n) with strictly increasing n and a_n > 0.

    Not safe to share while iterating; hand it over whole instead.
    """

    def __init__(self, spec: SeriesSpec, chunks: Iterator[Chunk]):
        self.spec = spec
        self._chunks = chunks
        self._idx = np.zeros(0, dtype=np.int64)
        self._val = np.zeros(0)
        self._pos = 0
        self.cursor = spec.start - 1  # last emitted index
        self.exhausted = False
        self._error: InvalidSpec | None = None

    def _fill(self) -> bool:
        # a bad term truncates the buffer; the error surfaces once it is reached
        if self._error is not None:
            raise self._error
        try:
            idx, val = next(self._chunks)
        except StopIteration:
            self.exhausted = True
            return False
        bad = ~(val > 0)
        if np.any(bad):
            i = int(np.flatnonzero(bad)[0])
            self._error = InvalidSpec(f"{self.spec.canonical()} produced a_{idx[i]} = {float(val[i])!r} <= 0")
            idx, val = idx[:i], val[:i]
        self._idx = np.concatenate([self._idx[self._pos :], idx])
        self._val = np.concatenate([self._val[self._pos :], val])
        self._pos = 0
        return True

    def __iter__(self):
        return self

    def __next__(self) -> tuple[int, float]:
        while self._pos >= len(self._idx):
            if not self._fill():
                raise StopIteration
        n, a = int(self._idx[self._pos]), float(self._val[self._pos])
        self._pos += 1
        self.cursor = n
        return n, a

    def _emit(self, stop: int) -> Chunk:
        idx, val = self._idx[self._pos : stop], self._val[self._pos : stop]
        self._pos = stop
        if len(idx):
            self.cursor = int(idx[-1])
        return idx, val

    def take(self, count: int) -> Chunk:
        """Next ``count`` terms (fewer if the stream ends)."""
        while len(self._idx) - self._pos < count and self._fill():
            pass
        return self._emit(min(self._pos + count, len(self._idx)))

    def upto(self, N: int) -> Chunk:
        """All remaining terms with index <= N."""
        while (len(self._idx) == self._pos or self._idx[-1] <= N) and self._fill():
            pass
        stop = self._pos + int(np.searchsorted(self._idx[self._pos :], N, side="right"))
        return self._emit(stop)

    def chunks(self) -> Iterator[Chunk]:
        """Drain the stream chunk by chunk (used by transforms)."""
        while True:
            if self._pos < len(self._idx):
                yield self._emit(len(self._idx))
            elif not self._fill():
                return


def make_stream(spec: SeriesSpec) -> TermStream:
    return TermStream(spec, _chunks(spec))


def _chunks(spec: SeriesSpec) -> Iterator[Chunk]:
    if isinstance(spec, PrimeReciprocal):
        return _prime_chunks()
    if isinstance(spec, BlockCounterexample):
        return _block_chunks()
    if isinstance(spec, AbelTransformOf):
        return _abel_chunks(make_stream(spec.inner))
    if isinstance(spec, RestrictedTo):
        return _restrict_chunks(make_stream(spec.inner), spec.S)
    if isinstance(spec, BlockPermuted):
        return _permute_chunks(make_stream(spec.inner), spec.length_rule())
    if spec.closed_form:
        return _closed_form_chunks(spec)
    raise InvalidSpec(f"cannot stream {spec!r}")


def _closed_form_chunks(spec: SeriesSpec) -> Iterator[Chunk]:
    lo = spec.start
    while True:
        idx = np.arange(lo, lo + CHUNK, dtype=np.int64)
        yield idx, np.asarray(spec.terms(idx), dtype=float)
        lo += CHUNK


def _prime_chunks() -> Iterator[Chunk]:
    lo = 2
    while True:
        hi = lo + 4 * CHUNK
        table = _primes.shared_table(hi)
        p = table.primes[(table.primes >= lo) & (table.primes < hi)].astype(np.int64)
        yield p, 1.0 / p
        lo = hi


def _block_chunks() -> Iterator[Chunk]:
    idx = _block_members(10**18 + 18)
    yield idx, 1.0 / idx.astype(float)


def _abel_chunks(inner: TermStream) -> Iterator[Chunk]:
    total = RunningSum()
    for idx, val in inner.chunks():
        prefix = compensated_cumsum(val) + total.value
        total.add(val)
        yield idx, val / prefix


def _restrict_chunks(inner: TermStream, S: IndexSet) -> Iterator[Chunk]:
    for idx, val in inner.chunks():
        keep = S.contains(idx)
        if np.any(keep):
            yield idx[keep], val[keep]


def _permute_chunks(inner: TermStream, length_rule: Callable[[int], int]) -> Iterator[Chunk]:
    j = 1
    while True:
        lengths, need = [], 0
        while need < CHUNK:
            L = int(length_rule(j))
            if L < 1:
                raise InvalidSpec(f"block length rule gave {L} for block {j}")
            lengths.append(L)
            need += L
            j += 1
        idx, val = inner.take(need)
        if len(idx) == 0:
            return
        out = np.empty_like(val)
        pos = 0
        for L in lengths:
            seg = val[pos : pos + L]
            out[pos : pos + len(seg)] = seg[::-1]
            pos += L
            if pos >= len(val):
                break
        yield idx, out
        if len(idx) < need:
            return


def abel_transform(stream: TermStream) -> TermStream:
    """b_n = a_n / S_n with S_n the running sum including a_n."""
    return TermStream(AbelTransformOf(stream.spec), _abel_chunks(stream))


def restrict_to(stream: TermStream, S: IndexSet) -> TermStream:
    """Keep terms whose index lies in S; index labels are preserved."""
    return TermStream(RestrictedTo(stream.spec, S), _restrict_chunks(stream, S))


def apply_block_permutation(stream: TermStream, block_len_rule) -> TermStream:
    """Reverse consecutive blocks; index n then carries a_{phi(n)}.

    ``block_len_rule`` maps the 1-based block number to its length; an int
    means a constant length.
    """
    if isinstance(block_len_rule, int):
        spec = BlockPermuted(stream.spec, block_len_rule)
        rule = spec.length_rule()
    else:
        spec = BlockPermuted(stream.spec, "growing")
        rule = block_len_rule
    return TermStream(spec, _permute_chunks(stream, rule))


def block_permutation(n_terms: int, block_len_rule) -> np.ndarray:
    """The positional bijection phi on 0..n_terms-1 used by block permutation."""
    if isinstance(block_len_rule, int):
        length = block_len_rule
        block_len_rule = lambda j: length  # noqa: E731
    perm = np.empty(n_terms, dtype=np.int64)
    pos, j = 0, 1
    while pos < n_terms:
        end = min(pos + int(block_len_rule(j)), n_terms)
        perm[pos:end] = np.arange(end - 1, pos - 1, -1)  # a truncated last block is reversed as is
        pos, j = end, j + 1
    return perm


# -- partial sums -------------------------------------------------------------------


@dataclass
class PartialSumTrace:
    checkpoints: list[int]
    sums: list[float]
    cesaro: list[float] | None = None


def partial_sums(stream: TermStream, checkpoints: Sequence[int], with_cesaro_of=None) -> PartialSumTrace:
    """S_N at each checkpoint; optionally the Cesaro means (1/N) sum_{k<=N} x_k.

    ``with_cesaro_of`` is a rule ``x(n, a_n)`` over numpy arrays, e.g.
    ``lambda n, a: n * a``.
    """
    cps = [int(c) for c in checkpoints]
    if any(b <= a for a, b in zip(cps, cps[1:])):
        raise ValueError("checkpoints must be strictly increasing")
    total, xtotal = RunningSum(), RunningSum()
    sums, ces = [], []
    for N in cps:
        idx, val = stream.upto(N)
        sums.append(total.add(val))
        if with_cesaro_of is not None:
            x = np.asarray(with_cesaro_of(idx.astype(float), val), dtype=float)
            ces.append(xtotal.add(x) / N)
    return PartialSumTrace(cps, sums, ces if with_cesaro_of is not None else None)


def dense_terms(spec: SeriesSpec, N: int) -> np.ndarray:
    """Array a[0..N] holding a_n, with zeros where the series has no term."""
    out = np.zeros(N + 1)
    if spec.closed_form:
        lo = spec.start
        if lo <= N:
            out[lo:] = spec.terms(np.arange(lo, N + 1, dtype=float))
            if np.any(~(out[lo:] > 0)):
                raise InvalidSpec(f"{spec.canonical()} produced a nonpositive term")
        return out
    idx, val = make_stream(spec).upto(N)
    out[idx] = val
    return out


# -- harmonic numbers ----------------------------------------------------------------

DIRECT_HARMONIC_LIMIT = 10**6


def harmonic_direct(n: int) -> float:
    return math.fsum(1.0 / np.arange(1, n + 1, dtype=float))


def harmonic_expansion(n: int) -> float:
    """ln n + gamma + 1/(2n) - 1/(12 n^2); the remainder lies in (0, 1/(120 n^4))."""
    return math.log(n) + EULER_GAMMA + 1 / (2 * n) - 1 / (12 * n * n)


def harmonic_number(n: int) -> tuple[float, float]:
    """(H_n, 1/(120 n^4)).

    H_n is summed directly for n <= 1e6 and taken from the expansion above
    that; the second value bounds the expansion remainder either way.
    """
    if n < 1:
        raise DomainError("harmonic numbers need n >= 1")
    bound = 1 / (120 * float(n) ** 4)
    if n <= DIRECT_HARMONIC_LIMIT:
        return harmonic_direct(n), bound
    return harmonic_expansion(n), bound


def harmonic_epsilon(n: int) -> float | None:
    """eps_n solved from H_n = expansion + eps_n / (120 n^4).

    Returns None when the remainder is below the resolution of H_n in binary64.
    """
    if n < 1:
        raise DomainError("harmonic numbers need n >= 1")
    h = harmonic_direct(n)
    bound = 1 / (120 * float(n) ** 4)
    if bound < 1e3 * math.ulp(h):
        return None
    return (h - harmonic_expansion(n)) / bound
