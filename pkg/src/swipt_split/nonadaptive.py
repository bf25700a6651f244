"""Fixed (non-adaptive) pilot and data splitting ratios.

With both ratios constant the capacity depends on them only through the
effective SNR, and the harvesting equality pins the data ratio to the pilot
ratio. What is left is a one-dimensional maximisation with a closed-form
stationary point, clamped to the feasible pilot range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    SplitPair,
    SystemConfig,
    effective_snr,
    effective_snr_curve,
    rho_d_from_rho_p,
)
from .specfun import rayleigh_capacity


@dataclass(frozen=True)
class FeasibleRhoPRange:
    lower: float
    upper: float

    def __contains__(self, rho_p) -> bool:
        return self.lower <= rho_p <= self.upper


@dataclass(frozen=True)
class NonAdaptiveSolution:
    split: SplitPair
    root: float
    kappa: float
    snr: float
    capacity: float


def feasible_range(cfg: SystemConfig) -> FeasibleRhoPRange:
    """Pilot ratios for which the harvesting equality leaves ``rho_d`` in [0, 1]."""
    base = 1.0 - cfg.q0 * cfg.block_length / (cfg.power * cfg.lp)
    lower = max(0.0, base)
    upper = min(1.0, base + cfg.ld / cfg.lp)
    # base may land a rounding error below 0 when q0 == power
    upper = max(upper, lower)
    return FeasibleRhoPRange(lower, upper)


def kappa(cfg: SystemConfig) -> float:
    return (cfg.power - cfg.q0) / cfg.noise_var * cfg.block_length


def stationary_root(cfg: SystemConfig) -> float:
    """Unconstrained maximiser of the effective SNR over the pilot ratio."""
    lp, ld = cfg.lp, cfg.ld
    if ld == 1:
        return (lp + 1) / (2 * lp) * (1.0 - cfg.q0 / cfg.power)
    k = kappa(cfg)
    return (ld + k - math.sqrt(ld * (k + ld) * (k + 1))) / (lp * (1 - ld) * cfg.snr)


def high_snr_root(cfg: SystemConfig, c: float) -> float:
    """Limit of :func:`stationary_root` as power/noise_var grows with q0/power = c fixed."""
    if not 0.0 < c < 1.0:
        raise ValueError(f"c must lie in (0, 1), got {c}")
    lp, ld = cfg.lp, cfg.ld
    return (lp + ld) / (lp * (1.0 + math.sqrt(ld))) * (1.0 - c)


def solve_p1(cfg: SystemConfig) -> NonAdaptiveSolution:
    """Capacity-optimal constant splitting ratios meeting the harvesting target."""
    rng = feasible_range(cfg)
    root = stationary_root(cfg)
    rho_p = min(max(root, rng.lower), rng.upper) + 0.0  # no -0.0 at q0 == power
    rho_d = min(max(rho_d_from_rho_p(cfg, rho_p), 0.0), 1.0)
    split = SplitPair(rho_p, rho_d)
    snr = effective_snr(cfg, split)
    return NonAdaptiveSolution(split, root, kappa(cfg), snr, rayleigh_capacity(snr))


def fixed_policy(cfg: SystemConfig) -> NonAdaptiveSolution:
    """Baseline that uses one ratio ``1 - q0/power`` for pilots and data alike."""
    rho = 1.0 - cfg.q0_frac
    split = SplitPair(rho, rho)
    snr = effective_snr(cfg, split)
    return NonAdaptiveSolution(split, float("nan"), kappa(cfg), snr, rayleigh_capacity(snr))


def grid_oracle_p1(cfg: SystemConfig, step: float = 1e-4) -> tuple[float, float]:
    """Brute-force scan of the pilot ratio; returns ``(rho_p, snr)`` at the best grid point.

    Grid is ``lower + k * step`` plus the upper end point. Ties resolve to
    the smaller pilot ratio.
    """
    if not 0.0 < step <= 0.01:
        raise ValueError(f"step must lie in (0, 0.01], got {step}")
    rng = feasible_range(cfg)
    n = int(math.floor((rng.upper - rng.lower) / step))
    grid = rng.lower + step * np.arange(n + 1)
    if grid[-1] < rng.upper:
        grid = np.append(grid, rng.upper)
    rho_d = np.clip(rho_d_from_rho_p(cfg, grid), 0.0, 1.0)
    snr = effective_snr_curve(cfg, grid, rho_d)
    best = int(np.argmax(snr))
    return float(grid[best]), float(snr[best])
