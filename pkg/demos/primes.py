"""Chebyshev and Dusart bounds, and the slow growth of the prime reciprocal sum.

Run: python3 demos/primes.py
"""

from __future__ import annotations

from posseries.primes import build_table, chebyshev_scan, dusart_scan, prime_reciprocal_comparison

table = build_table()
window = chebyshev_scan(table, 20_000, 10**6)
below = chebyshev_scan(table, 2, 19_999)
print(f"7/8 < pi(n)/(n/ln n) < 9/8 fails {len(window.violations)} times on [2e4, 1e6]")
print(f"below 2e4 it fails {len(below.violations)} times, last at n = {below.largest_violation}")
print(f"ratio at 1e6: {window.ratios[-1]:.6f}")
print("Dusart violations for 6 <= k <= 1e5:", len(dusart_scan(table, 10**5).violations))

cmp = prime_reciprocal_comparison(table, [10**3, 10**4, 10**5, 10**6])
for N, p, d in zip(cmp.checkpoints, cmp.prime_sums, cmp.differences):
    print(f"N = {N:>7}: sum 1/p = {p:.6f}, minus comparison sum = {d:.6f}")
