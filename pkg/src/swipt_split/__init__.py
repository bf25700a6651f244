"""Optimal receiver power splitting for training-based SWIPT over block Rayleigh fading."""

from .adaptive import (
    AdaptivePolicy,
    AdaptiveSolution,
    BracketError,
    SearchSettings,
    bisect_lambda,
    constraint_value,
    policy_capacity,
    rho_d_star,
    rho_d_star_perfect,
    solve_p21,
    solve_p22,
)
from .model import (
    EstimationModel,
    SplitPair,
    SystemConfig,
    effective_snr,
    estimation_error_variance,
    harvested_power_nonadaptive,
    rho_d_from_rho_p,
    xi_from_rho_p,
)
from .montecarlo import SimReport, SimSettings, simulate_capacity
from .nonadaptive import (
    FeasibleRhoPRange,
    NonAdaptiveSolution,
    feasible_range,
    fixed_policy,
    grid_oracle_p1,
    high_snr_root,
    solve_p1,
    stationary_root,
)
from .specfun import (
    QuadratureRule,
    exp_integral_e1,
    exponential_quadrature,
    graded_exponential_quadrature,
    rayleigh_capacity,
)

__version__ = "0.1.0"
