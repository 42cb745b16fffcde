"""How slowly does the MB(2, s) family converge or diverge?

Run: python3 demos/hardy_numbers.py
"""

from __future__ import annotations

from posseries import MB, crossing_threshold, euler_constant, sum_with_tail_bracket, terms_needed_for_tail

spec = MB(2, 2)
print(f"first term of {spec.canonical()}: a_3 = {spec.terms([3])[0]:.4f}")
for N in (10**4, 10**6):
    b = sum_with_tail_bracket(spec, N)
    print(f"sum after {N:>8} direct terms lies in [{b.lower:.10f}, {b.upper:.10f}]")

est = terms_needed_for_tail(spec, 0.005)
print(f"terms needed for a tail below 0.005: N = {est.value}  (log10 N = {est.value.log10:.4e})")

cross = crossing_threshold(MB(2, 1), 10.0)
print(f"MB(2,1) partial sums first reach 10 near N = {cross.value}, i.e. 10^(10^{cross.value.top:.2f})")

g = euler_constant(0, 1.0, 10**4)
print(f"Euler-Mascheroni constant from 1e4 terms: {g.gamma_f:.15f}")
