import csv
import io
import json

import pytest

from swipt_split.cli import (
    EXIT_CONFIG,
    EXIT_IO,
    EXIT_OK,
    EXIT_SOLVER,
    RunConfig,
    cmd_solve,
    cmd_sweep,
    main,
    render_rows,
)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def csv_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestSolve:
    def test_no_harvesting(self):
        res = cmd_solve(RunConfig(q0_frac=0.0))["nonadaptive"]
        assert res["rho_p"] == 1.0 and res["rho_d"] == 1.0

    def test_short_training_uses_all_pilot_power(self):
        res = cmd_solve(RunConfig(lp=[4], q0_frac=0.55))["nonadaptive"]
        assert res["rho_p"] == 1.0

    def test_long_training(self):
        res = cmd_solve(RunConfig(lp=[40], q0_frac=0.5))["nonadaptive"]
        assert res["rho_p"] == pytest.approx(0.144, abs=1e-3)
        assert res["rho_d"] == pytest.approx(0.738, abs=1e-3)

    def test_adaptive_block(self, capsys):
        code, out, _ = run_cli(capsys, "solve", "--adaptive", "--q0-frac", "0.5", "--g-points", "11")
        assert code == EXIT_OK
        res = json.loads(out)
        ad = res["adaptive"]
        assert ad["capacity"] >= res["nonadaptive"]["capacity"]
        assert len(ad["policy"]["g"]) == 11 and 0 < ad["lambda"] < 100

    def test_csv_format(self, capsys):
        code, out, _ = run_cli(capsys, "solve", "--format", "csv")
        assert code == EXIT_OK
        assert out.splitlines()[0].startswith("na_rho_p,na_rho_d")

    def test_power_db(self, capsys):
        code, out, _ = run_cli(capsys, "solve", "--power-db", "20")
        assert json.loads(out)["config"]["power"] == pytest.approx(100.0)


class TestSweep:
    def test_comparison_header(self, capsys):
        code, out, _ = run_cli(capsys, "sweep", "--figure", "capacity-comparison",
                               "--q0-grid", "0.1:0.3:0.1", "--blocks", "2000")
        assert code == EXIT_OK
        lines = out.split("\n")
        assert lines[0] == "q0_frac,rho_p_na,rho_d_na,cap_na,rho_p_ad,cap_ad,cap_ad_stderr"
        assert out.endswith("\n") and "\r" not in out
        rows = csv_rows(out)
        assert [float(r["q0_frac"]) for r in rows] == pytest.approx([0.1, 0.2, 0.3])
        assert all(float(r["cap_ad_stderr"]) > 0 for r in rows)

    def test_comparison_without_simulation(self):
        rows = cmd_sweep(RunConfig(figure="capacity-comparison", q0_grid="0.5:0.5:0.1", blocks=0))
        assert rows[0]["cap_ad_stderr"] == ""

    def test_policy_curve_header(self, capsys):
        code, out, _ = run_cli(capsys, "policy-curve", "--rho-p", "1", "--q0-frac", "0.5",
                               "--g-points", "6")
        assert code == EXIT_OK
        assert out.split("\n")[0] == "g,rho_d_imperfect,rho_d_perfect"
        assert len(csv_rows(out)) == 6

    def test_policies_full_pilot_power_up_to_055(self):
        rows = cmd_sweep(RunConfig(figure="policies", lp=[4], q0_grid="0.05:0.95:0.05"))
        assert len(rows) == 19
        for r in rows:
            if r["q0_frac"] <= 0.55 + 1e-12:
                assert r["rho_p_star"] == 1.0
        assert rows[-1]["rho_p_star"] < 1.0

    def test_nonadaptive_beats_fixed(self):
        rows = cmd_sweep(RunConfig(figure="capacity-nonadaptive", lp=[4, 10, 40]))
        assert all(r["cap_optimal"] >= r["cap_fixed"] for r in rows)

    def test_comparison_equal_without_constraint(self):
        rows = cmd_sweep(RunConfig(figure="capacity-comparison", q0_grid="0:0:0.1", blocks=0))
        assert rows[0]["cap_ad"] == pytest.approx(rows[0]["cap_na"], abs=1e-9)

    def test_comparison_needs_single_lp(self, capsys):
        code, _, err = run_cli(capsys, "sweep", "--figure", "capacity-comparison", "--lp", "4", "40")
        assert code == EXIT_CONFIG and "single" in err

    def test_json_output_file(self, tmp_path, capsys):
        path = tmp_path / "out.json"
        code, out, _ = run_cli(capsys, "sweep", "--figure", "policies", "--format", "json",
                               "--output", str(path))
        assert code == EXIT_OK and out == ""
        assert len(json.loads(path.read_text())) == 19


class TestConfig:
    def test_json_config_and_override(self, tmp_path, capsys):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"lp": [40], "q0_frac": 0.5, "power": 200.0}))
        code, out, _ = run_cli(capsys, "solve", "--config", str(path), "--power", "100")
        cfg = json.loads(out)["config"]
        assert cfg["power"] == 100.0 and cfg["lp"] == 40 and cfg["q0"] == pytest.approx(50.0)

    def test_unknown_config_key(self, tmp_path, capsys):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"powr": 3}))
        code, _, err = run_cli(capsys, "solve", "--config", str(path))
        assert code == EXIT_CONFIG and "powr" in err

    @pytest.mark.parametrize("argv", [
        ["solve", "--q0-frac", "1.5"],
        ["solve", "--power", "-1"],
        ["sweep", "--q0-grid", "0.5:0.1:0.1"],
        ["sweep", "--q0-grid", "0.1:0.5:0"],
        ["solve", "--lp", "1", "--ld", "0"],
    ])
    def test_invalid_config(self, capsys, argv):
        code, _, _ = run_cli(capsys, *argv)
        assert code == EXIT_CONFIG

    def test_missing_config_file(self, tmp_path, capsys):
        code, _, err = run_cli(capsys, "solve", "--config", str(tmp_path / "nope.json"))
        assert code == EXIT_IO and "nope.json" in err

    def test_unwritable_output(self, tmp_path, capsys):
        code, _, err = run_cli(capsys, "solve", "--output", str(tmp_path / "no" / "dir" / "x.json"))
        assert code == EXIT_IO


class TestVerify:
    def test_defaults_pass(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "--oracle-configs", "40")
        rep = json.loads(out)
        assert code == EXIT_OK and rep["passed"]
        assert {c["name"] for c in rep["checks"]} >= {"p1_oracle_rho_p", "bisection_residual"}

    def test_negative_control(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "--oracle-configs", "5",
                               "--quad-kind", "laguerre", "--quad-order", "2")
        assert code == EXIT_SOLVER

    def test_full_harvesting_endpoints(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "--oracle-configs", "5", "--q0-frac", "1")
        rep = json.loads(out)
        assert code == EXIT_OK
        assert any(c["name"].startswith("endpoint") and c["passed"] for c in rep["checks"])


def test_render_round_trip():
    rows = [{"a": 0.1 + 0.2, "b": 1e-300, "c": ""}]
    text = render_rows(rows, "csv")
    back = csv_rows(text)[0]
    assert float(back["a"]) == 0.1 + 0.2 and float(back["b"]) == 1e-300 and back["c"] == ""
