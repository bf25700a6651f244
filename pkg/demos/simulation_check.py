"""
Checking the formulas by simulation
===================================

Everything above is computed in closed form or by quadrature. Here a
block-fading simulation with real pilots and an MMSE estimator checks the
pieces: estimation error, capacity and the harvested power.
"""

from swipt_split import SystemConfig, solve_p1, solve_p22
from swipt_split.model import estimation_error_variance
from swipt_split.montecarlo import SimSettings, simulate_capacity, simulate_estimation_error

cfg = SystemConfig(100.0, 1.0, 4, 96).with_q0_frac(0.6)
sim = SimSettings(seed=1, blocks=200_000, mode="pilot")

na = solve_p1(cfg)
est = simulate_estimation_error(cfg, na.split.rho_p, sim)
exact = estimation_error_variance(cfg, na.split.rho_p).sigma_e2
print(f"error variance  {est.error_var_mean:.6f} +- {est.error_var_stderr:.6f}  (exact {exact:.6f})")

rep = simulate_capacity(cfg, na.split.rho_d, na.split.rho_p, sim)
print(f"fixed ratios    capacity {rep.capacity_mean:.4f} +- {rep.capacity_stderr:.4f}"
      f"  (closed form {na.capacity:.4f})")

ad = solve_p22(cfg)
rep = simulate_capacity(cfg, ad.policy, ad.policy.rho_p, sim)
print(f"adaptive        capacity {rep.capacity_mean:.4f} +- {rep.capacity_stderr:.4f}"
      f"  (quadrature {ad.capacity:.4f})")
print(f"                harvested {rep.harvested_mean:.3f} +- {rep.harvested_stderr:.3f}"
      f"  (target {cfg.q0:g})")
