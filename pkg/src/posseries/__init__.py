"""Positive series: certified sums, density diagnostics and classical tests."""

from .density import IndexSet, counting_profile, fit_trend, harmonic_profile
from .errors import ParseError, PreconditionViolated, ResourceGuard, SeriesError
from .parsing import parse_expression, parse_series, parse_set
from .series_core import (
    MB,
    AbelTransformOf,
    BlockCounterexample,
    BlockPermuted,
    Custom,
    Harmonic,
    OlivierCounterexample,
    PrimeReciprocal,
    RestrictedTo,
    SquareWeighted,
    make_stream,
    partial_sums,
)
from .tail_engine import TowerMagnitude, crossing_threshold, euler_constant, sum_with_tail_bracket, terms_needed_for_tail

__version__ = "0.1.0"
