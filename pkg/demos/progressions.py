"""Arithmetic progressions, epsilon-progressions and the block series.

Run: python3 demos/progressions.py
"""

from __future__ import annotations

from posseries.primes import build_table
from posseries.progressions import block_structure_check, count_3aps, find_eps_progression, longest_ap

primes = build_table(10**4).primes.tolist()
w = longest_ap([p for p in primes if p <= 100])
print("longest AP among primes <= 100:", w.values)
print("3-APs among primes <= 1e4:", count_3aps(primes))

w = find_eps_progression([1.0, 2.1, 2.9, 4.05], 4, 0.2)
print(f"best line through (1, 2.1, 2.9, 4.05): a = {w.base:.4f}, r = {w.difference:.4f}, max residual {w.max_residual:.4f}")

b = block_structure_check(10)
print(f"block index set up to 10^10: longest AP {b.longest.length} with difference {b.longest.difference:g}")
print(f"largest 3-AP difference {b.max_3ap_difference}; sum over the set in [{b.bracket[0]:.10f}, {b.bracket[1]:.10f}]")
