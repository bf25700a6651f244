import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swipt_split.model import SystemConfig, harvested_power_nonadaptive
from swipt_split.nonadaptive import (
    feasible_range,
    fixed_policy,
    grid_oracle_p1,
    high_snr_root,
    kappa,
    solve_p1,
    stationary_root,
)
from swipt_split.specfun import rayleigh_capacity
from swipt_split.model import effective_snr


def cfg(lp=4, ld=96, q0=0.0, power=100.0, noise_var=1.0):
    return SystemConfig(power, noise_var, lp, ld, q0)


class TestFeasibleRange:
    def test_no_harvesting(self):
        r = feasible_range(cfg())
        assert (r.lower, r.upper) == (1.0, 1.0)

    def test_everything_harvested(self):
        r = feasible_range(cfg(q0=100.0))
        assert r.lower == 0.0 and r.upper == pytest.approx(0.0, abs=1e-12)

    def test_wide_open(self):
        r = feasible_range(cfg(lp=40, ld=60, q0=50.0))
        assert (r.lower, r.upper) == (0.0, 1.0)

    @settings(max_examples=200)
    @given(st.integers(1, 99), st.floats(0, 1))
    def test_ordered_inside_unit(self, lp, frac):
        r = feasible_range(cfg(lp=lp, ld=100 - lp).with_q0_frac(frac))
        assert 0 <= r.lower <= r.upper <= 1


class TestStationaryRoot:
    def test_single_data_symbol(self):
        c = cfg(lp=99, ld=1, q0=50.0)
        assert stationary_root(c) == pytest.approx(100 / 198 * 0.5, rel=1e-14)

    # frozen from a 40-digit mpmath root of d SNR / d rho_p along the equality constraint
    def test_short_training(self):
        c = cfg(q0=55.0)
        assert kappa(c) == 4500.0
        assert stationary_root(c) == pytest.approx(1.0517785845043612028, abs=1e-12)

    def test_long_training(self):
        c = cfg(lp=40, ld=60, q0=50.0)
        assert kappa(c) == 5000.0
        assert stationary_root(c) == pytest.approx(0.14366701455388114479, abs=1e-12)

    def test_general_noise(self):
        c = cfg(lp=7, ld=93, q0=30.0, noise_var=3.0)
        assert stationary_root(c) == pytest.approx(0.95610946866653219728, abs=1e-12)

    def test_is_stationary_point(self):
        # central finite difference of the SNR along the equality constraint
        for c in [cfg(lp=7, ld=93, q0=30.0, noise_var=3.0), cfg(lp=50, ld=50, q0=80.0, power=5e3)]:
            r = stationary_root(c)

            def snr(x):
                rd = 1 - c.q0 * 100 / (c.power * c.ld) + (1 - x) * c.lp / c.ld
                se = c.noise_var / (c.noise_var + x * c.power * c.lp)
                return rd * c.power * (1 - se) / (c.noise_var + rd * c.power * se)

            h = 1e-6 * max(r, 1e-3)
            assert abs(snr(r + h) - snr(r - h)) / (2 * h) < 1e-6 * snr(r) / max(r, 1e-3)
            assert snr(r) > snr(r * 1.01) and snr(r) > snr(r * 0.99)


class TestSolveP1:
    def test_no_harvesting(self):
        s = solve_p1(cfg())
        assert (s.split.rho_p, s.split.rho_d) == (1.0, 1.0)

    def test_everything_harvested(self):
        s = solve_p1(cfg(q0=100.0))
        assert (s.split.rho_p, s.split.rho_d) == (0.0, 0.0)
        assert s.capacity == 0.0

    def test_root_clamped_at_one(self):
        s = solve_p1(cfg(q0=55.0))
        assert s.split.rho_p == 1.0
        assert s.split.rho_d == pytest.approx(1 - 55 * 100 / 9600, rel=1e-14)
        assert s.split.rho_d == pytest.approx(0.4271, abs=1e-4)

    def test_interior(self):
        s = solve_p1(cfg(lp=40, ld=60, q0=50.0))
        assert s.split.rho_p == pytest.approx(0.1437, abs=1e-4)
        assert s.split.rho_d == pytest.approx(0.7375, abs=1e-4)

    def test_solution_fields_consistent(self):
        c = cfg(lp=12, ld=88, q0=37.0, noise_var=0.5)
        s = solve_p1(c)
        assert s.snr == effective_snr(c, s.split)
        assert s.capacity == rayleigh_capacity(s.snr)

    @settings(max_examples=300, deadline=None)
    @given(st.floats(0, 4), st.floats(-1, 1), st.integers(1, 99), st.floats(0, 1))
    def test_energy_equality(self, logp, logn, lp, frac):
        c = SystemConfig(10 ** logp, 10 ** logn, lp, 100 - lp).with_q0_frac(frac)
        s = solve_p1(c)
        assert harvested_power_nonadaptive(c, s.split) == pytest.approx(c.q0, abs=1e-9 * c.power)
        assert s.split.rho_p in feasible_range(c)

    def test_beats_fixed_policy(self):
        for frac in np.linspace(0, 1, 21):
            for lp in (4, 40):
                c = cfg(lp=lp, ld=100 - lp).with_q0_frac(frac)
                assert solve_p1(c).snr >= fixed_policy(c).snr * (1 - 1e-12)


class TestHighSnrRoot:
    def test_short_training(self):
        c = cfg()
        assert high_snr_root(c, 0.55) == pytest.approx(100 / (4 * (1 + math.sqrt(96))) * 0.45)
        assert high_snr_root(c, 0.55) == pytest.approx(1.0419, abs=1e-4)

    def test_long_training(self):
        assert high_snr_root(cfg(lp=40, ld=60), 0.5) == pytest.approx(0.142923023144382, rel=1e-12)

    def test_matches_single_data_symbol_branch(self):
        c = cfg(lp=9, ld=1)
        for frac in (0.1, 0.5, 0.9):
            assert high_snr_root(c, frac) == pytest.approx(
                stationary_root(c.with_q0_frac(frac)), rel=1e-14)

    @pytest.mark.parametrize("c", [0.0, 1.0, -0.2])
    def test_domain(self, c):
        with pytest.raises(ValueError):
            high_snr_root(cfg(), c)

    @pytest.mark.parametrize("lp", [1, 4, 40, 99])
    def test_convergence(self, lp):
        for k in (6, 7, 8):
            c = SystemConfig(10.0 ** k, 1.0, lp, 100 - lp).with_q0_frac(0.55)
            lim = high_snr_root(c, 0.55)
            assert abs(stationary_root(c) - lim) / lim <= 1e-2

    def test_decreasing_in_training_length_fixed_data_length(self):
        vals = [high_snr_root(cfg(lp=lp, ld=60), 0.55) for lp in range(1, 200)]
        assert np.all(np.diff(vals) < 0)

    def test_fixed_block_length_turns_near_lp_70(self):
        # Lp (1 + sqrt(100 - Lp)) peaks where 3 Ld + 2 sqrt(Ld) = 100, Ld ~ 29.7
        vals = np.array([high_snr_root(cfg(lp=lp, ld=100 - lp), 0.55) for lp in range(1, 100)])
        d = np.diff(vals)
        assert np.all(d[:69] < 0)  # Lp = 1..70
        assert np.all(d[70:] > 0)  # Lp = 71..99


class TestGridOracle:
    def test_degenerate_interval(self):
        assert grid_oracle_p1(cfg())[0] == 1.0

    def test_interior(self):
        rho, _ = grid_oracle_p1(cfg(lp=40, ld=60, q0=50.0), 1e-4)
        assert abs(rho - 0.1437) < 2e-4

    def test_boundary(self):
        rho, _ = grid_oracle_p1(cfg(q0=55.0), 1e-4)
        assert rho == 1.0

    @pytest.mark.parametrize("step", [0.0, 0.02])
    def test_step_domain(self, step):
        with pytest.raises(ValueError):
            grid_oracle_p1(cfg(q0=50.0), step)

    def test_tie_breaks_to_smaller(self):
        # everything harvested: a single grid point at 0
        assert grid_oracle_p1(cfg(q0=100.0))[0] == 0.0
