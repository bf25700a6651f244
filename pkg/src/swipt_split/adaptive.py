"""Adaptive data-phase power splitting driven by the estimated channel gain.

For a fixed pilot ratio the data ratio is chosen per block as a function of
``g = |h_hat|^2``. The optimal policy clamps the positive root of a per-state
quadratic to [0, 1]; its Lagrange multiplier is found by bisection so that
the average harvested share equals ``xi``. The pilot ratio itself is then
picked by a coarse scan plus golden-section refinement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .model import (
    SplitPair,
    SystemConfig,
    effective_snr,
    estimation_error_variance,
    xi_from_rho_p,
)
from .nonadaptive import feasible_range
from .specfun import QuadratureRule, default_quadrature, rayleigh_capacity

XI_EDGE = 1e-12
BISECT_TOL = 1e-10
BISECT_MAX_ITER = 200


class BracketError(RuntimeError):
    """The harvesting constraint does not straddle the target on the multiplier bracket."""


def rho_d_star(g, sigma_e2: float, cfg: SystemConfig, lam: float):
    """Optimal data splitting ratio for estimated gain(s) ``g`` and multiplier ``lam``.

    Works elementwise on arrays. ``sigma_e2`` must lie strictly inside (0, 1);
    use :func:`rho_d_star_perfect` for perfect channel knowledge.
    """
    if not 0.0 < sigma_e2 < 1.0:
        raise ValueError(f"sigma_e2 must lie in (0, 1), got {sigma_e2}")
    g = np.asarray(g, dtype=float)
    snr = cfg.snr
    nu = g + sigma_e2
    # a r^2 + b r + c = 0 ; stationarity of the per-state Lagrangian
    a = snr * sigma_e2 * nu
    b = nu + sigma_e2
    c = 1.0 / snr - g / (nu * lam)
    disc = np.maximum(b * b - 4.0 * a * c, 0.0)
    # '+' root written as -2c / (b + sqrt(disc)) to avoid cancellation when |4ac| << b^2
    root = -2.0 * c / (b + np.sqrt(disc))
    out = np.clip(root, 0.0, 1.0)
    return out if out.ndim else float(out)


def quadratic_residual(rho, g, sigma_e2: float, cfg: SystemConfig, lam: float):
    """Left-hand side of the per-state stationarity quadratic at ``rho``."""
    g = np.asarray(g, dtype=float)
    nu = g + sigma_e2
    return (cfg.snr * sigma_e2 * nu * rho ** 2 + (nu + sigma_e2) * rho
            + 1.0 / cfg.snr - g / (nu * lam))


def per_state_lagrangian(rho, g, sigma_e2: float, cfg: SystemConfig, lam: float):
    """Per-block objective ln(1 + SNR) + lam * (1 - rho) * (g + sigma_e2)."""
    p, n0 = cfg.power, cfg.noise_var
    return (np.log1p(rho * p * g / (n0 + rho * p * sigma_e2))
            + lam * (1.0 - rho) * (g + sigma_e2))


def rho_d_star_perfect(g, cfg: SystemConfig, lam: float):
    """Perfect-CSI policy: 1 below the knee ``1/lam - noise_var/power``, else knee / g."""
    g = np.asarray(g, dtype=float)
    knee = 1.0 / lam - 1.0 / cfg.snr
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(g < knee, 1.0, knee / g)
    out = np.clip(out, 0.0, 1.0)
    return out if out.ndim else float(out)


def _harvested_share(rho, g, sigma_e2):
    return (1.0 - rho) * (g + sigma_e2)


def _capacity_integrand(rho, g, sigma_e2, cfg):
    p, n0 = cfg.power, cfg.noise_var
    return np.log1p(rho * p * g / (n0 + rho * p * sigma_e2))


def constraint_value(sigma_e2: float, cfg: SystemConfig, lam: float,
                     quad: QuadratureRule) -> float:
    """E{(1 - rho_d*(g)) (g + sigma_e2)} under the rule ``quad``.

    ``quad`` must target the exponential law of ``g``, mean ``1 - sigma_e2``.
    """
    g = quad.nodes
    return quad.expect(_harvested_share(rho_d_star(g, sigma_e2, cfg, lam), g, sigma_e2))


def perfect_constraint_value(cfg: SystemConfig, lam: float, quad: QuadratureRule) -> float:
    g = quad.nodes
    return quad.expect((1.0 - rho_d_star_perfect(g, cfg, lam)) * g)


def _bisect(fn: Callable[[float], float], target: float, lo: float, hi: float,
            tol: float, max_iter: int) -> float:
    f_lo, f_hi = fn(lo) - target, fn(hi) - target
    if f_lo > 0 or f_hi < 0:
        raise BracketError(
            f"constraint does not straddle {target:.6g} on [{lo:.3g}, {hi:.3g}]: "
            f"residuals {f_lo:.3g}, {f_hi:.3g}")
    if abs(f_lo) <= tol:
        return lo
    if abs(f_hi) <= tol:
        return hi
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid) - target
        if abs(f_mid) <= tol:
            return mid
        if f_mid < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4 * np.finfo(float).eps * hi:
            break
    raise BracketError(
        f"bisection stalled after {max_iter} iterations; residual {f_mid:.3g} > tol {tol:.3g}")


def bisect_lambda(cfg: SystemConfig, sigma_e2: float, xi: float,
                  quad: QuadratureRule, tol: float = BISECT_TOL,
                  max_iter: int = BISECT_MAX_ITER) -> float:
    """Multiplier in (0, power/noise_var) meeting the harvesting target ``xi``.

    The constraint is nondecreasing in the multiplier, so plain bisection on
    ``[eps, snr - eps]`` with ``eps = 1e-12 * snr`` applies. Raises
    :class:`BracketError` if the target is not bracketed or not reached.
    """
    if not 0.0 < xi < 1.0:
        raise ValueError(f"xi must lie in (0, 1), got {xi}")
    eps = 1e-12 * cfg.snr
    return _bisect(lambda lam: constraint_value(sigma_e2, cfg, lam, quad),
                   xi, eps, cfg.snr - eps, tol, max_iter)


def bisect_lambda_perfect(cfg: SystemConfig, xi: float, quad: QuadratureRule,
                          tol: float = BISECT_TOL,
                          max_iter: int = BISECT_MAX_ITER) -> float:
    """Multiplier for the perfect-CSI baseline; ``quad`` targets Exp(1)."""
    if not 0.0 < xi < 1.0:
        raise ValueError(f"xi must lie in (0, 1), got {xi}")
    eps = 1e-12 * cfg.snr
    return _bisect(lambda lam: perfect_constraint_value(cfg, lam, quad),
                   xi, eps, cfg.snr - eps, tol, max_iter)


@dataclass(frozen=True)
class AdaptivePolicy:
    """Data-phase splitting rule for one pilot ratio.

    ``lam`` is None for the trivial cases (``xi`` at 0 or 1, or a pilot ratio
    of 0 where the estimate carries nothing); ``constant`` then holds the
    ratio used in every block.
    """

    cfg: SystemConfig
    rho_p: float
    sigma_e2: float
    xi: float
    lam: float | None
    trivial_case: bool = False
    constant: float | None = None

    def __call__(self, g):
        """rho_d as a function of the estimated gain; vectorised."""
        if self.constant is not None:
            g = np.asarray(g, dtype=float)
            out = np.full(g.shape, self.constant)
            return out if out.ndim else float(out)
        return rho_d_star(g, self.sigma_e2, self.cfg, self.lam)

    def tabulate(self, g_grid) -> tuple[np.ndarray, np.ndarray]:
        g_grid = np.asarray(g_grid, dtype=float)
        return g_grid, np.asarray(self(g_grid), dtype=float)

    def mean_rho_d(self, quad: QuadratureRule) -> float:
        if self.constant is not None or self.sigma_e2 >= 1.0:
            return float(self.constant)
        return quad.expect(self(quad.nodes))


def solve_p21(cfg: SystemConfig, rho_p: float, quad_order: int | None = None,
              tol: float = BISECT_TOL, *, kind: str | None = None) -> AdaptivePolicy:
    """Optimal adaptive data splitting for a fixed pilot ratio ``rho_p``."""
    xi = xi_from_rho_p(cfg, rho_p)
    sigma_e2 = estimation_error_variance(cfg, rho_p).sigma_e2
    if xi <= XI_EDGE:
        return AdaptivePolicy(cfg, rho_p, sigma_e2, 0.0, None, True, 1.0)
    if xi >= 1.0 - XI_EDGE:
        return AdaptivePolicy(cfg, rho_p, sigma_e2, 1.0, None, True, 0.0)
    if sigma_e2 >= 1.0:
        # no pilot power: the estimate is 0 in every block, only the mean share matters
        return AdaptivePolicy(cfg, rho_p, sigma_e2, xi, None, True, 1.0 - xi)
    quad = default_quadrature(1.0 - sigma_e2, quad_order, kind)
    lam = bisect_lambda(cfg, sigma_e2, xi, quad, tol)
    return AdaptivePolicy(cfg, rho_p, sigma_e2, xi, lam)


def policy_capacity(policy: AdaptivePolicy, quad_order: int | None = None,
                    *, kind: str | None = None) -> float:
    """Ergodic capacity (nats/use) of ``policy`` by quadrature over the estimated gain."""
    if policy.sigma_e2 >= 1.0:
        return 0.0
    if policy.constant is not None:
        # constant split: closed form through the effective SNR
        return rayleigh_capacity(effective_snr(policy.cfg, SplitPair(policy.rho_p, policy.constant)))
    quad = default_quadrature(1.0 - policy.sigma_e2, quad_order, kind)
    g = quad.nodes
    return quad.expect(_capacity_integrand(policy(g), g, policy.sigma_e2, policy.cfg))


@dataclass(frozen=True)
class SearchSettings:
    """Pilot-ratio line search: coarse scan then golden-section refinement."""

    coarse_points: int = 101
    golden_tol: float = 1e-6
    golden_max_iter: int = 100


@dataclass(frozen=True)
class AdaptiveSolution:
    policy: AdaptivePolicy
    capacity: float
    rho_p_search_trace: list = field(default_factory=list)


def golden_section_max(f: Callable[[float], float], lo: float, hi: float,
                       tol: float = 1e-6, max_iter: int = 100):
    """Maximise a unimodal ``f`` on [lo, hi]; returns ``(x, f(x), trace)``."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    trace = []

    def ev(x):
        v = f(x)
        trace.append((x, v))
        return v

    x1 = hi - inv_phi * (hi - lo)
    x2 = lo + inv_phi * (hi - lo)
    f1, f2 = ev(x1), ev(x2)
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - inv_phi * (hi - lo)
            f1 = ev(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + inv_phi * (hi - lo)
            f2 = ev(x2)
    return (x1, f1, trace) if f1 >= f2 else (x2, f2, trace)


def solve_p22(cfg: SystemConfig, quad_order: int | None = None,
              search: SearchSettings = SearchSettings(), tol: float = BISECT_TOL,
              *, kind: str | None = None) -> AdaptiveSolution:
    """Best pilot ratio for the adaptive receiver.

    The capacity is not known to be unimodal in the pilot ratio, so the
    feasible range is scanned on ``search.coarse_points`` points first and
    golden-section search only refines inside the best coarse bracket.
    Global optimality therefore holds up to the coarse grid.
    """
    rng = feasible_range(cfg)
    cache: dict[float, tuple[AdaptivePolicy, float]] = {}

    def evaluate(rho_p):
        rho_p = float(min(max(rho_p, rng.lower), rng.upper))
        if rho_p not in cache:
            pol = solve_p21(cfg, rho_p, quad_order, tol, kind=kind)
            cache[rho_p] = (pol, policy_capacity(pol, quad_order, kind=kind))
        return cache[rho_p][1]

    if rng.upper - rng.lower <= 0.0:
        evaluate(rng.upper)
        (pol, cap), = cache.values()
        return AdaptiveSolution(pol, cap, [(pol.rho_p, cap)])

    grid = np.linspace(rng.lower, rng.upper, search.coarse_points)
    values = [evaluate(x) for x in grid]
    trace = list(zip(grid.tolist(), values))
    best = int(np.argmax(values))  # first maximum: ties go to smaller rho_p
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, len(grid) - 1)]
    x, v, gtrace = golden_section_max(evaluate, lo, hi, search.golden_tol,
                                      search.golden_max_iter)
    trace.extend(gtrace)
    if v <= values[best]:
        x = float(grid[best])
    pol, cap = cache[float(min(max(x, rng.lower), rng.upper))]
    return AdaptiveSolution(pol, cap, trace)
