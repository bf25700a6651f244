"""
Fixed splitting ratios against the harvesting target
=====================================================

A receiver that keeps its splitting ratios fixed from block to block has a
closed-form optimum. Here we sweep the harvesting target for a short and a
long training phase and print the optimal pilot and data ratios.
"""

import numpy as np

from swipt_split import SystemConfig, solve_p1

# P = 100, unit noise, blocks of 100 symbols
fracs = np.round(np.arange(0.05, 0.96, 0.05), 2)

for lp in (4, 40):
    cfg = SystemConfig(power=100.0, noise_var=1.0, lp=lp, ld=100 - lp)
    print(f"\nLp = {lp}")
    print(" Q0/P   rho_p    rho_d")
    for f in fracs:
        s = solve_p1(cfg.with_q0_frac(f)).split
        print(f" {f:.2f}  {s.rho_p:.4f}  {s.rho_d:.4f}")

# With four pilots all pilot power goes to estimation until the target is
# fairly high. Find where that stops.
cfg = SystemConfig(100.0, 1.0, 4, 96)
lo, hi = 0.5, 0.7
for _ in range(60):
    mid = 0.5 * (lo + hi)
    if solve_p1(cfg.with_q0_frac(mid)).split.rho_p == 1.0:
        lo = mid
    else:
        hi = mid
print(f"\nLp = 4 starts harvesting from pilots at Q0/P = {lo:.5f}")
