"""Block-fading Monte Carlo simulation of the power-splitting link.

Blocks are grouped into fixed-size chunks by index. Every chunk draws from
its own generator seeded by ``(seed, stream, chunk index)``, so results are
bit-identical for any worker count: partial sums are always merged in chunk
order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .model import SystemConfig, estimation_error_variance

CHUNK_BLOCKS = 16384
MODES = ("direct", "pilot")

Policy = Union[float, Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class SimSettings:
    """``mode`` is "direct" (draw estimate and error from their laws) or
    "pilot" (simulate received pilots and run the MMSE estimator)."""

    seed: int = 0
    blocks: int = 50_000
    mode: str = "direct"
    stream: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.blocks < 1:
            raise ValueError(f"blocks must be >= 1, got {self.blocks}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")


@dataclass(frozen=True)
class SimReport:
    capacity_mean: float
    capacity_stderr: float
    harvested_mean: float
    harvested_stderr: float
    blocks_used: int


def chunk_rng(seed: int, stream: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, stream, chunk]))


def complex_gaussian(rng: np.random.Generator, var, size) -> np.ndarray:
    """CN(0, var) samples: independent real and imaginary parts of variance var/2."""
    scale = np.sqrt(np.asarray(var, dtype=float) / 2.0)
    z = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    return scale * z


def sample_channel_pair(sigma_e2: float, rng: np.random.Generator, size=None):
    """Draw ``(|h_hat|^2, |h|^2)`` with estimate and error independent.

    Estimate ~ CN(0, 1 - sigma_e2), error ~ CN(0, sigma_e2), h = estimate + error.
    """
    if not 0.0 <= sigma_e2 <= 1.0:
        raise ValueError(f"sigma_e2 must lie in [0, 1], got {sigma_e2}")
    h_hat = complex_gaussian(rng, 1.0 - sigma_e2, size)
    h = h_hat + complex_gaussian(rng, sigma_e2, size)
    return np.abs(h_hat) ** 2, np.abs(h) ** 2


def simulate_pilots(cfg: SystemConfig, rho_p: float, rng: np.random.Generator, size=None):
    """Simulate one training phase per block; returns complex ``(h_hat, h)``.

    Pilots are constant-modulus with energy ``power`` each; the receiver
    keeps a fraction ``rho_p`` of the pilot signal and forms the linear MMSE
    estimate from all ``lp`` samples.
    """
    if not 0.0 <= rho_p <= 1.0:
        raise ValueError(f"rho_p must lie in [0, 1], got {rho_p}")
    n = 1 if size is None else int(size)
    h = complex_gaussian(rng, 1.0, n)
    amp = math.sqrt(rho_p * cfg.power)
    noise = complex_gaussian(rng, cfg.noise_var, (n, cfg.lp))
    y = amp * h[:, None] + noise
    h_hat = amp * y.sum(axis=1) / (cfg.noise_var + rho_p * cfg.power * cfg.lp)
    if size is None:
        return h_hat[0], h[0]
    return h_hat, h


def simulate_pilot_estimation(cfg: SystemConfig, rho_p: float,
                              rng: np.random.Generator, size=None):
    """``(|h_hat|^2, |h|^2)`` from a simulated training phase."""
    h_hat, h = simulate_pilots(cfg, rho_p, rng, size)
    return np.abs(h_hat) ** 2, np.abs(h) ** 2


def _chunks(blocks: int):
    for start in range(0, blocks, CHUNK_BLOCKS):
        yield start // CHUNK_BLOCKS, min(CHUNK_BLOCKS, blocks - start)


def _run_chunks(settings: SimSettings, fn):
    """Apply ``fn(rng, n)`` to every chunk; returns per-chunk results in chunk order."""
    jobs = list(_chunks(settings.blocks))

    def run(job):
        idx, n = job
        return fn(chunk_rng(settings.seed, settings.stream, idx), n)

    if settings.workers == 1 or len(jobs) == 1:
        return [run(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=settings.workers) as pool:
        return list(pool.map(run, jobs))


def _mean_stderr(parts, k, n):
    """Mean and standard error from chunk partial sums (sum, sum of squares) at slot k."""
    s = math.fsum(p[k] for p in parts)
    ss = math.fsum(p[k + 1] for p in parts)
    mean = s / n
    if n < 2:
        return mean, 0.0
    var = max(ss - n * mean * mean, 0.0) / (n - 1)
    return mean, math.sqrt(var / n)


def _policy_values(policy: Policy, g):
    if callable(policy):
        return np.asarray(policy(g), dtype=float)
    return np.full(np.shape(g), float(policy))


def simulate_capacity(cfg: SystemConfig, policy: Policy, rho_p: float,
                      settings: SimSettings = SimSettings()) -> SimReport:
    """Monte Carlo capacity and harvested power for pilot ratio ``rho_p``.

    ``policy`` maps estimated gains to data ratios, or is a constant ratio.
    Per block the capacity term is the lower bound with estimation error
    treated as noise; harvested power uses the true gain ``|h|^2``.
    """
    sigma_e2 = estimation_error_variance(cfg, rho_p).sigma_e2
    p, n0, lp, ld = cfg.power, cfg.noise_var, cfg.lp, cfg.ld

    def chunk(rng, n):
        if settings.mode == "direct":
            g_hat, g = sample_channel_pair(sigma_e2, rng, n)
        else:
            g_hat, g = simulate_pilot_estimation(cfg, rho_p, rng, n)
        rho_d = _policy_values(policy, g_hat)
        cap = np.log1p(rho_d * p * g_hat / (n0 + rho_d * p * sigma_e2))
        harv = ((1.0 - rho_p) * p * lp * g + (1.0 - rho_d) * p * ld * g) / (lp + ld)
        return (cap.sum(), (cap * cap).sum(), harv.sum(), (harv * harv).sum())

    parts = _run_chunks(settings, chunk)
    n = settings.blocks
    cap_mean, cap_se = _mean_stderr(parts, 0, n)
    harv_mean, harv_se = _mean_stderr(parts, 2, n)
    return SimReport(cap_mean, cap_se, harv_mean, harv_se, n)


@dataclass(frozen=True)
class EstimationReport:
    """Empirical MMSE statistics from simulated pilots."""

    error_var_mean: float
    error_var_stderr: float
    cross_real_mean: float
    cross_real_stderr: float
    cross_imag_mean: float
    cross_imag_stderr: float
    blocks_used: int


def simulate_estimation_error(cfg: SystemConfig, rho_p: float,
                              settings: SimSettings = SimSettings()) -> EstimationReport:
    """Empirical error variance E|h - h_hat|^2 and cross moment E{h_hat conj(h - h_hat)}."""

    def chunk(rng, n):
        h_hat, h = simulate_pilots(cfg, rho_p, rng, n)
        err = h - h_hat
        e2 = np.abs(err) ** 2
        cross = h_hat * np.conj(err)
        out = []
        for v in (e2, cross.real, cross.imag):
            out.extend((v.sum(), (v * v).sum()))
        return tuple(out)

    parts = _run_chunks(settings, chunk)
    n = settings.blocks
    stats = [_mean_stderr(parts, k, n) for k in (0, 2, 4)]
    return EstimationReport(*stats[0], *stats[1], *stats[2], n)


def sample_mean_stderr(values) -> tuple[float, float]:
    values = np.asarray(values, dtype=float)
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(values.size))
