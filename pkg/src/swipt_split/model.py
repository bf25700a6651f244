"""Link model for a training-based power-splitting receiver.

All quantities are linear power ratios. The channel gain has unit variance,
so ``power`` absorbs path loss. Energy conversion efficiency is fixed at 1,
which makes ``q0`` the power that must be routed to the harvester before any
conversion loss.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SystemConfig:
    """Link budget of one block: ``lp`` pilots followed by ``ld`` data symbols."""

    power: float
    noise_var: float
    lp: int
    ld: int
    q0: float = 0.0

    def __post_init__(self):
        if not self.power > 0:
            raise ValueError(f"power must be positive, got {self.power}")
        if not self.noise_var > 0:
            raise ValueError(f"noise_var must be positive, got {self.noise_var}")
        for name in ("lp", "ld"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {value}")
            object.__setattr__(self, name, int(value))
        if not 0.0 <= self.q0 <= self.power:
            raise ValueError(f"q0 must lie in [0, power={self.power}], got {self.q0}")

    @property
    def snr(self) -> float:
        """Transmit SNR ``power / noise_var``."""
        return self.power / self.noise_var

    @property
    def block_length(self) -> int:
        return self.lp + self.ld

    @property
    def q0_frac(self) -> float:
        return self.q0 / self.power

    def with_q0_frac(self, frac: float) -> "SystemConfig":
        # frac * power can overshoot power by one ulp at frac == 1
        return SystemConfig(self.power, self.noise_var, self.lp, self.ld,
                            min(frac * self.power, self.power))


@dataclass(frozen=True)
class EstimationModel:
    rho_p: float
    sigma_e2: float

    @property
    def est_var(self) -> float:
        """Variance of the channel estimate (orthogonal complement of the error)."""
        return 1.0 - self.sigma_e2


@dataclass(frozen=True)
class SplitPair:
    rho_p: float
    rho_d: float

    def __post_init__(self):
        _check_ratio(self.rho_p, "rho_p")
        _check_ratio(self.rho_d, "rho_d")


def _check_ratio(value, name):
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


def estimation_error_variance(cfg: SystemConfig, rho_p: float) -> EstimationModel:
    """MMSE channel-estimation error variance after ``lp`` pilots."""
    _check_ratio(rho_p, "rho_p")
    sigma_e2 = cfg.noise_var / (cfg.noise_var + rho_p * cfg.power * cfg.lp)
    return EstimationModel(rho_p=rho_p, sigma_e2=sigma_e2)


def effective_snr(cfg: SystemConfig, split: SplitPair) -> float:
    """SNR seen by the detector once estimation error is treated as noise.

    Scaled by an exponential unit-mean gain this gives the capacity
    integrand of the non-adaptive receiver.
    """
    sigma_e2 = estimation_error_variance(cfg, split.rho_p).sigma_e2
    signal = split.rho_d * cfg.power
    return signal * (1.0 - sigma_e2) / (cfg.noise_var + signal * sigma_e2)


def effective_snr_curve(cfg: SystemConfig, rho_p, rho_d):
    """Vectorised ``effective_snr`` over broadcastable ratio arrays (no validation)."""
    rho_p = np.asarray(rho_p, dtype=float)
    rho_d = np.asarray(rho_d, dtype=float)
    sigma_e2 = cfg.noise_var / (cfg.noise_var + rho_p * cfg.power * cfg.lp)
    signal = rho_d * cfg.power
    return signal * (1.0 - sigma_e2) / (cfg.noise_var + signal * sigma_e2)


def harvested_power_nonadaptive(cfg: SystemConfig, split: SplitPair) -> float:
    """Average harvested power per symbol with fixed splitting ratios."""
    p, lp, ld = cfg.power, cfg.lp, cfg.ld
    return ((1.0 - split.rho_p) * p * lp + (1.0 - split.rho_d) * p * ld) / (lp + ld)


def rho_d_from_rho_p(cfg: SystemConfig, rho_p):
    """Data-phase ratio that meets the harvesting target exactly.

    Not clamped: values outside [0, 1] mean ``rho_p`` is infeasible.
    """
    lp, ld = cfg.lp, cfg.ld
    return 1.0 - cfg.q0 * (lp + ld) / (cfg.power * ld) + (1.0 - rho_p) * lp / ld


def xi_from_rho_p(cfg: SystemConfig, rho_p: float, *, atol: float = 1e-12) -> float:
    """Share of the total received data-phase power that must be harvested.

    Raises ValueError when ``rho_p`` leaves the feasible pilot range, i.e.
    when the result would fall outside [0, 1] by more than ``atol``.
    """
    _check_ratio(rho_p, "rho_p")
    p, lp, ld = cfg.power, cfg.lp, cfg.ld
    xi = (cfg.q0 * (lp + ld) - (1.0 - rho_p) * p * lp) / (p * ld)
    if xi < -atol or xi > 1.0 + atol:
        raise ValueError(f"rho_p={rho_p} is outside the feasible pilot range (xi={xi})")
    return min(max(xi, 0.0), 1.0)
