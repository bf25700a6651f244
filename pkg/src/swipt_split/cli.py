"""Command-line runner: single solves, Q0/P sweeps, policy curves and self-checks.

Exit codes: 0 success, 1 invalid configuration, 2 solver failure (including
failed verification checks), 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .adaptive import (
    BracketError,
    SearchSettings,
    bisect_lambda,
    bisect_lambda_perfect,
    constraint_value,
    per_state_lagrangian,
    policy_capacity,
    quadratic_residual,
    rho_d_star,
    rho_d_star_perfect,
    solve_p21,
    solve_p22,
)
from .model import SystemConfig, harvested_power_nonadaptive
from .montecarlo import SimSettings, simulate_capacity, simulate_estimation_error
from .nonadaptive import fixed_policy, grid_oracle_p1, solve_p1
from .specfun import DEFAULT_KIND, default_quadrature, rayleigh_capacity

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3

FIGURES = ("policies", "capacity-nonadaptive", "capacity-comparison", "policy-curve")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    power: float = 100.0
    noise_var: float = 1.0
    lp: list = field(default_factory=lambda: [4])
    ld: int | None = None
    block_length: int = 100
    q0_frac: float = 0.5
    q0_grid: str = "0.05:0.95:0.05"
    quad_order: int | None = None
    quad_kind: str = DEFAULT_KIND
    tol: float = 1e-10
    oracle_step: float = 1e-4
    oracle_configs: int = 200
    coarse_points: int = 101
    blocks: int = 50_000
    seed: int = 0
    mode: str = "direct"
    workers: int = 1
    rho_p: float | None = None
    g_max: float = 50.0
    g_points: int = 501
    adaptive: bool = False
    figure: str = "capacity-comparison"
    format: str | None = None
    output: str | None = None

    def system(self, lp: int | None = None, q0_frac: float | None = None) -> SystemConfig:
        lp = self.lp[0] if lp is None else lp
        ld = self.ld if self.ld is not None else self.block_length - lp
        frac = self.q0_frac if q0_frac is None else q0_frac
        if ld < 1:
            raise ConfigError(f"lp={lp} leaves no data symbols (ld={ld})")
        if not 0.0 <= frac <= 1.0:
            raise ConfigError(f"q0_frac must lie in [0, 1], got {frac}")
        try:
            return SystemConfig(self.power, self.noise_var, lp, ld).with_q0_frac(frac)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def grid(self) -> list[float]:
        try:
            start, stop, step = (float(v) for v in self.q0_grid.split(":"))
        except ValueError as exc:
            raise ConfigError(f"q0 grid must be start:stop:step, got {self.q0_grid!r}") from exc
        if step <= 0 or stop < start:
            raise ConfigError(f"empty or invalid q0 grid {self.q0_grid!r}")
        n = int(math.floor((stop - start) / step + 1e-9))
        pts = [round(start + k * step, 12) for k in range(n + 1)]
        if any(not 0.0 <= p <= 1.0 for p in pts):
            raise ConfigError(f"q0 grid must stay inside [0, 1], got {self.q0_grid!r}")
        return pts

    def search(self) -> SearchSettings:
        return SearchSettings(coarse_points=self.coarse_points)

    def sim(self, stream: int = 0, workers: int | None = None) -> SimSettings:
        return SimSettings(seed=self.seed, blocks=max(self.blocks, 1), mode=self.mode,
                           stream=stream, workers=workers or self.workers)

    def validate(self):
        if self.quad_kind not in ("graded", "laguerre"):
            raise ConfigError(f"unknown quadrature kind {self.quad_kind!r}")
        if self.quad_order is not None and self.quad_order < 2:
            raise ConfigError("quad order must be >= 2")
        if self.mode not in ("direct", "pilot"):
            raise ConfigError(f"mode must be direct or pilot, got {self.mode!r}")
        if self.blocks < 0:
            raise ConfigError("blocks must be >= 0")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.figure not in FIGURES:
            raise ConfigError(f"figure must be one of {FIGURES}")
        if self.format not in (None, "csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if self.lp is None or len(self.lp) == 0:
            raise ConfigError("at least one lp is required")
        if self.ld is not None and len(self.lp) > 1:
            raise ConfigError("--ld fixes one block layout; give a single --lp with it")
        if self.g_points < 2 or self.g_max <= 0:
            raise ConfigError("policy curve needs g_points >= 2 and g_max > 0")
        if self.rho_p is not None and not 0.0 <= self.rho_p <= 1.0:
            raise ConfigError(f"rho_p must lie in [0, 1], got {self.rho_p}")
        for lp in self.lp:
            self.system(lp)
        return self


# --------------------------------------------------------------------- solve

def _quad_kw(run: RunConfig):
    return dict(kind=run.quad_kind)


def cmd_solve(run: RunConfig) -> dict:
    """Non-adaptive optimum, plus the adaptive one when ``run.adaptive`` is set."""
    cfg = run.system()
    na = solve_p1(cfg)
    out = {
        "config": asdict(cfg),
        "nonadaptive": {
            "rho_p": na.split.rho_p, "rho_d": na.split.rho_d, "root": na.root,
            "kappa": na.kappa, "snr": na.snr, "capacity": na.capacity,
            "harvested": harvested_power_nonadaptive(cfg, na.split),
        },
    }
    if run.adaptive:
        sol = solve_p22(cfg, run.quad_order, run.search(), run.tol, **_quad_kw(run))
        pol = sol.policy
        g, rho = pol.tabulate(np.linspace(0.0, run.g_max, run.g_points))
        out["adaptive"] = {
            "rho_p": pol.rho_p, "sigma_e2": pol.sigma_e2, "xi": pol.xi, "lambda": pol.lam,
            "trivial_case": pol.trivial_case, "capacity": sol.capacity,
            "policy": {"g": g.tolist(), "rho_d": rho.tolist()},
        }
    return out


# --------------------------------------------------------------------- sweeps

def _policies_row(run, lp, frac):
    cfg = run.system(lp, frac)
    na = solve_p1(cfg)
    return {"lp": lp, "q0_frac": frac, "rho_p_star": na.split.rho_p,
            "rho_d_star": na.split.rho_d, "rho_fixed": 1.0 - frac}


def _nonadaptive_row(run, lp, frac):
    cfg = run.system(lp, frac)
    na, fx = solve_p1(cfg), fixed_policy(cfg)
    return {"lp": lp, "q0_frac": frac, "rho_p_star": na.split.rho_p,
            "rho_d_star": na.split.rho_d, "cap_optimal": na.capacity,
            "cap_fixed": fx.capacity}


def _comparison_row(run, lp, frac, index):
    cfg = run.system(lp, frac)
    na = solve_p1(cfg)
    ad = solve_p22(cfg, run.quad_order, run.search(), run.tol, **_quad_kw(run))
    stderr = ""
    if run.blocks > 0:
        rep = simulate_capacity(cfg, ad.policy, ad.policy.rho_p, run.sim(stream=index, workers=1))
        stderr = rep.capacity_stderr
    return {"q0_frac": frac, "rho_p_na": na.split.rho_p, "rho_d_na": na.split.rho_d,
            "cap_na": na.capacity, "rho_p_ad": ad.policy.rho_p, "cap_ad": ad.capacity,
            "cap_ad_stderr": stderr}


def policy_curve(run: RunConfig) -> list[dict]:
    """rho_d against g for imperfect and perfect channel knowledge at one (rho_p, Q0)."""
    cfg = run.system()
    if run.rho_p is None:
        pol = solve_p22(cfg, run.quad_order, run.search(), run.tol, **_quad_kw(run)).policy
    else:
        pol = solve_p21(cfg, run.rho_p, run.quad_order, run.tol, **_quad_kw(run))
    g = np.linspace(0.0, run.g_max, run.g_points)
    imperfect = np.asarray(pol(g), dtype=float)
    if pol.xi <= 0.0:
        perfect = np.ones_like(g)
    elif pol.xi >= 1.0:
        perfect = np.zeros_like(g)
    else:
        quad = default_quadrature(1.0, run.quad_order, run.quad_kind)
        lam = bisect_lambda_perfect(cfg, pol.xi, quad, run.tol)
        perfect = np.asarray(rho_d_star_perfect(g, cfg, lam), dtype=float)
    return [{"g": float(a), "rho_d_imperfect": float(b), "rho_d_perfect": float(c)}
            for a, b, c in zip(g, imperfect, perfect)]


def cmd_sweep(run: RunConfig) -> list[dict]:
    """Rows of plot data for ``run.figure``, in grid order whatever the worker count."""
    if run.figure == "policy-curve":
        return policy_curve(run)
    grid = run.grid()
    if run.figure == "capacity-comparison":
        if len(run.lp) != 1:
            raise ConfigError("capacity-comparison takes a single --lp")
        jobs = [(_comparison_row, (run, run.lp[0], f, i)) for i, f in enumerate(grid)]
    else:
        row = _policies_row if run.figure == "policies" else _nonadaptive_row
        jobs = [(row, (run, lp, f)) for lp in run.lp for f in grid]

    def call(job):
        fn, args = job
        return fn(*args)

    if run.workers > 1:
        with ThreadPoolExecutor(max_workers=run.workers) as pool:
            return list(pool.map(call, jobs))
    return [call(j) for j in jobs]


# --------------------------------------------------------------------- verify

@dataclass
class Check:
    name: str
    measured: float
    tolerance: float
    passed: bool
    detail: str = ""


def _check(name, measured, tolerance, passed=None, detail=""):
    measured = float(measured)
    if passed is None:
        passed = bool(measured <= tolerance)
    return Check(name, measured, float(tolerance), bool(passed), detail)


def random_p1_configs(n: int, seed: int = 0) -> list[SystemConfig]:
    """Random link budgets with power in [1, 1e4], noise in [0.1, 10], Lp + Ld = 100."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        p = 10 ** rng.uniform(0, 4)
        n0 = 10 ** rng.uniform(-1, 1)
        lp = int(rng.integers(1, 100))
        frac = rng.uniform(0.01, 0.99)
        out.append(SystemConfig(p, n0, lp, 100 - lp, frac * p))
    return out


def oracle_agreement(configs, step=1e-4):
    """Worst pilot-ratio gap and worst relative SNR shortfall of the closed form vs the grid."""
    worst_rho, worst_snr, worst_q = 0.0, -np.inf, 0.0
    for cfg in configs:
        sol = solve_p1(cfg)
        rho, snr = grid_oracle_p1(cfg, step)
        worst_rho = max(worst_rho, abs(sol.split.rho_p - rho))
        worst_snr = max(worst_snr, (snr - sol.snr) / max(snr, 1e-300))
        worst_q = max(worst_q, abs(harvested_power_nonadaptive(cfg, sol.split) - cfg.q0) / cfg.power)
    return worst_rho, worst_snr, worst_q


def kkt_residuals(cfg: SystemConfig, sigma_e2: float, lam: float, g, step: float = 1e-4):
    """Worst quadratic residual at interior points and worst grid-over-closed-form gain."""
    rho = np.asarray(rho_d_star(g, sigma_e2, cfg, lam))
    interior = (rho > 0.0) & (rho < 1.0)
    quad_res = np.abs(quadratic_residual(rho[interior], g[interior], sigma_e2, cfg, lam))
    grid = np.linspace(0.0, 1.0, int(round(1.0 / step)) + 1)
    best_grid = per_state_lagrangian(grid[None, :], g[:, None], sigma_e2, cfg, lam).max(axis=1)
    closed = per_state_lagrangian(rho, g, sigma_e2, cfg, lam)
    return (float(quad_res.max()) if quad_res.size else 0.0,
            float((best_grid - closed).max()))


def cmd_verify(run: RunConfig) -> list[Check]:
    """Oracle suites: grid search vs closed form, KKT checks, Monte Carlo vs quadrature."""
    checks = []
    cfgs = random_p1_configs(run.oracle_configs, run.seed)
    d_rho, d_snr, d_q = oracle_agreement(cfgs, run.oracle_step)
    checks.append(_check("p1_oracle_rho_p", d_rho, 2 * run.oracle_step))
    checks.append(_check("p1_oracle_snr_rel", d_snr, 1e-9))
    checks.append(_check("p1_energy_equality", d_q, 1e-9))

    cfg = run.system()
    for frac, expect in ((0.0, (1.0, 1.0)), (1.0, (0.0, 0.0))):
        s = solve_p1(cfg.with_q0_frac(frac)).split
        err = max(abs(s.rho_p - expect[0]), abs(s.rho_d - expect[1]))
        checks.append(_check(f"endpoint_q0_frac_{frac:g}", err, 0.0))

    na = solve_p1(cfg)
    quad_na = default_quadrature(1.0, run.quad_order, run.quad_kind)
    q_cap = quad_na(lambda g: np.log1p(na.snr * g))
    checks.append(_check("quadrature_vs_closed_form", abs(q_cap - na.capacity), 1e-8))

    rng = np.random.default_rng(run.seed + 1)
    worst_res, worst_gain = 0.0, -np.inf
    g_pts = np.concatenate([np.geomspace(1e-4, 50.0, 40)])
    for _ in range(10):
        sigma_e2 = 10 ** rng.uniform(-3, -0.05)
        xi = rng.uniform(0.05, 0.95)
        quad = default_quadrature(1.0 - sigma_e2, run.quad_order, run.quad_kind)
        lam = bisect_lambda(cfg, sigma_e2, xi, quad, run.tol)
        r, gain = kkt_residuals(cfg, sigma_e2, lam, g_pts * (1.0 - sigma_e2))
        worst_res, worst_gain = max(worst_res, r), max(worst_gain, gain)
    checks.append(_check("kkt_quadratic_residual", worst_res, 1e-9))
    checks.append(_check("kkt_grid_gain", worst_gain, 1e-8))

    ad = solve_p22(cfg, run.quad_order, run.search(), run.tol, **_quad_kw(run))
    pol = ad.policy
    if pol.lam is not None:
        quad = default_quadrature(1.0 - pol.sigma_e2, run.quad_order, run.quad_kind)
        res = abs(constraint_value(pol.sigma_e2, cfg, pol.lam, quad) - pol.xi)
        checks.append(_check("bisection_residual", res, run.tol))
    checks.append(_check("adaptive_dominance", na.capacity - ad.capacity, 1e-12))

    if run.blocks > 0:
        sim = run.sim(stream=1)
        rep = simulate_capacity(cfg, pol, pol.rho_p, sim)
        z = abs(rep.harvested_mean - cfg.q0) / max(rep.harvested_stderr, 1e-300)
        checks.append(_check("mc_harvested_vs_q0_z", z, 4.0))
        z = abs(rep.capacity_mean - ad.capacity) / max(rep.capacity_stderr, 1e-300)
        checks.append(_check("mc_adaptive_capacity_z", z, 4.0))
        rep = simulate_capacity(cfg, na.split.rho_d, na.split.rho_p, run.sim(stream=2))
        z = abs(rep.capacity_mean - na.capacity) / max(rep.capacity_stderr, 1e-300)
        checks.append(_check("mc_nonadaptive_capacity_z", z, 3.0))
        if na.split.rho_p > 0:
            est = simulate_estimation_error(cfg, na.split.rho_p,
                                            replace(run.sim(stream=3), mode="pilot"))
            sigma_e2 = cfg.noise_var / (cfg.noise_var + na.split.rho_p * cfg.power * cfg.lp)
            z = abs(est.error_var_mean - sigma_e2) / est.error_var_stderr
            checks.append(_check("mc_mmse_error_var_z", z, 4.0))
    return checks


# --------------------------------------------------------------------- output

def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render_rows(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=1) + "\n"
    buf = io.StringIO()
    if rows:
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(rows[0].keys())
        for row in rows:
            writer.writerow(_fmt(v) for v in row.values())
    return buf.getvalue()


def _emit(text: str, path: str | None):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


# --------------------------------------------------------------------- argparse

def _add_common(p: argparse.ArgumentParser):
    S = argparse.SUPPRESS
    p.add_argument("--config", metavar="PATH", help="JSON file with RunConfig fields; flags win")
    p.add_argument("--power", type=float, default=S, help="transmit power P (linear)")
    p.add_argument("--power-db", type=float, default=S, help="transmit power in dB (10 log10 P)")
    p.add_argument("--noise-var", type=float, default=S)
    p.add_argument("--lp", type=int, nargs="+", default=S, help="pilot length(s)")
    p.add_argument("--ld", type=int, default=S, help="data length (default: block length - lp)")
    p.add_argument("--block-length", type=int, default=S, help="lp + ld when --ld is omitted")
    p.add_argument("--q0-frac", type=float, default=S, help="harvesting target Q0/P")
    p.add_argument("--q0-grid", default=S, metavar="START:STOP:STEP")
    p.add_argument("--quad-order", type=int, default=S)
    p.add_argument("--quad-kind", choices=("graded", "laguerre"), default=S)
    p.add_argument("--tol", type=float, default=S, help="bisection constraint tolerance")
    p.add_argument("--coarse-points", type=int, default=S)
    p.add_argument("--blocks", type=int, default=S, help="Monte Carlo blocks (0 disables)")
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--mode", choices=("direct", "pilot"), default=S)
    p.add_argument("--workers", type=int, default=S)
    p.add_argument("--format", choices=("csv", "json"), default=S)
    p.add_argument("--output", metavar="PATH", default=S)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swipt-split",
        description="Optimal receiver power splitting for training-based SWIPT.")
    sub = parser.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    p = sub.add_parser("solve", help="solve one configuration")
    _add_common(p)
    p.add_argument("--adaptive", action="store_true", default=S)
    p.add_argument("--g-max", type=float, default=S)
    p.add_argument("--g-points", type=int, default=S)

    p = sub.add_parser("sweep", help="Q0/P sweep producing figure data")
    _add_common(p)
    p.add_argument("--figure", choices=FIGURES, default=S)
    p.add_argument("--rho-p", type=float, default=S)
    p.add_argument("--g-max", type=float, default=S)
    p.add_argument("--g-points", type=int, default=S)

    p = sub.add_parser("policy-curve", help="rho_d(g) with imperfect and perfect CSI")
    _add_common(p)
    p.add_argument("--rho-p", type=float, default=S, help="pilot ratio (default: adaptive optimum)")
    p.add_argument("--g-max", type=float, default=S)
    p.add_argument("--g-points", type=int, default=S)

    p = sub.add_parser("verify", help="run oracle and Monte Carlo checks")
    _add_common(p)
    p.add_argument("--oracle-configs", type=int, default=S)
    return parser


def load_run_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                values.update(json.load(fh))
        except OSError as exc:
            raise OSError(f"cannot read config {args.config}: {exc.strerror or exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {args.config} is not valid JSON: {exc}") from exc
    cli = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    values.update(cli)
    if "power_db" in values:
        values["power"] = 10.0 ** (float(values.pop("power_db")) / 10.0)
    if isinstance(values.get("lp"), int):
        values["lp"] = [values["lp"]]
    known = {f.name for f in fields(RunConfig)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return RunConfig(**values).validate()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run = load_run_config(args)
        if args.command == "solve":
            result = cmd_solve(run)
            if run.format == "csv":
                flat = {**{f"na_{k}": v for k, v in result["nonadaptive"].items()}}
                if "adaptive" in result:
                    flat.update({f"ad_{k}": v for k, v in result["adaptive"].items()
                                 if k != "policy"})
                text = render_rows([flat], "csv")
            else:
                text = json.dumps(result, indent=1) + "\n"
            _emit(text, run.output)
            return EXIT_OK
        if args.command in ("sweep", "policy-curve"):
            if args.command == "policy-curve":
                run.figure = "policy-curve"
            rows = cmd_sweep(run)
            _emit(render_rows(rows, run.format or "csv"), run.output)
            return EXIT_OK
        checks = cmd_verify(run)
        rows = [asdict(c) for c in checks]
        ok = all(c.passed for c in checks)
        if (run.format or "json") == "json":
            text = json.dumps({"passed": ok, "checks": rows}, indent=1) + "\n"
        else:
            text = render_rows(rows, "csv")
        _emit(text, run.output)
        return EXIT_OK if ok else EXIT_SOLVER
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BracketError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
