"""Limits in density: n a_n -> 0 for convergent series even when n a_n does not.

Run: python3 demos/density_limits.py
"""

from __future__ import annotations

import numpy as np

from posseries.classical_tests import harmonic_density_check, salat_toma_check
from posseries.density import EVENS, SQUARES, default_checkpoints, harmonic_profile
from posseries.density_limits import d_lim_diagnostic, kvn_converse_check, kvn_forward_check, series_values
from posseries.series_core import OlivierCounterexample, SquareWeighted

cps = default_checkpoints(100, 10**6)
x = series_values(OlivierCounterexample(), 10**6)
print("x_n = n a_n for the Olivier counterexample at n = 1000^2:", round(float(x[10**6]), 4))
rep = d_lim_diagnostic(x, 0.0, [1.0, 0.1], cps)
for eps, prof in zip(rep.epsilons, rep.profiles):
    print(f"  |A({eps})| / N at 1e6 = {prof.last:.3g}  ({prof.trend})")
print("  verdict:", rep.verdict, "| envelope trend:", rep.envelope_trend)

print("Salat-Toma check on SquareWeighted(2):", salat_toma_check(SquareWeighted(2), cps).verdict)
print("harmonic-density check on SquareWeighted(2):", harmonic_density_check(SquareWeighted(2), cps).verdict)
print(f"harmonic profile at 1e6: squares {harmonic_profile(SQUARES, cps).last:.4f}, evens {harmonic_profile(EVENS, cps).last:.4f}")

N = 10**4
sq = np.zeros(N + 1)
j = np.arange(1, 101)
sq[j * j] = 1.0
small = default_checkpoints(100, N)
print("KvN forward bound on the squares indicator holds:", kvn_forward_check(sq, small, [0.5]).all_hold)
sq[j * j] = j * j
conv = kvn_converse_check(sq, float(N), small)
print(f"unbounded converse example: Cesaro mean at 1e4 = {conv.cesaro_at(N)}, density verdict {conv.diagnostic.verdict}")
