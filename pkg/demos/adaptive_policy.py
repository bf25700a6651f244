"""
What the adaptive data ratio looks like
=======================================

For a fixed pilot ratio the adaptive receiver maps the estimated channel
gain g to a data ratio rho_d(g). With imperfect estimates the map is zero
for tiny g, saturates at 1, then decays. With perfect channel knowledge it
is 1 up to a knee and decays after it.
"""

import numpy as np

from swipt_split import SystemConfig
from swipt_split.adaptive import bisect_lambda, bisect_lambda_perfect, rho_d_star, rho_d_star_perfect
from swipt_split.specfun import default_quadrature

cfg = SystemConfig(100.0, 1.0, 4, 96)
sigma_e2 = 1 / 401   # all pilot power spent on estimation
xi = 0.5             # share of the data-phase energy that must be harvested

lam = bisect_lambda(cfg, sigma_e2, xi, default_quadrature(1 - sigma_e2))
lam_p = bisect_lambda_perfect(cfg, xi, default_quadrature(1.0))
print(f"multipliers: imperfect {lam:.6f}, perfect {lam_p:.6f}")

g = np.array([0.0, 1e-5, 3e-5, 1e-4, 1e-3, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0])
print("\n     g        imperfect  perfect")
for a, b, c in zip(g, rho_d_star(g, sigma_e2, cfg, lam), rho_d_star_perfect(g, cfg, lam_p)):
    print(f" {a:9.2e}   {b:.5f}    {c:.5f}")

# Near g = 0 the estimate is mostly noise, so the imperfect receiver
# harvests everything there. The perfect one has no such region.
