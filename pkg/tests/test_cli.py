import numpy as np
import pytest

from pdteleop import cli
from pdteleop.config import (apply_overrides, default_config_text,
                             dumps_config, loads_config)

TINY = ["--set", "simulation.duration=0.02", "--set", "simulation.decimation=20"]


def run_cli(*args):
    return cli.main(list(args))


class TestVerifyGains:
    def test_reference_gains_exit_zero(self, capsys):
        assert run_cli("verify-gains") == 0
        out = capsys.readouterr().out
        assert "rho_m=+0" in out and "equality" in out

    def test_violated_gains_exit_code(self, capsys):
        code = run_cli("verify-gains", "--set", "controller.k_damp_m=10",
                       "--set", "controller.k_damp_s=10")
        assert code == cli.EXIT_GAINS
        assert "VIOLATED" in capsys.readouterr().out


class TestRun:
    def test_artifacts_and_schema(self, tmp_path):
        code = run_cli("run", "--output-dir", str(tmp_path), "--stem", "t", *TINY)
        assert code == 0
        header = (tmp_path / "t.csv").read_text().splitlines()[0]
        cols = header.split(",")
        assert len(cols) == 39
        assert tuple(cols) == cli.CSV_COLUMNS
        n_rows = len((tmp_path / "t.csv").read_text().splitlines()) - 1
        assert n_rows == int(np.floor(0.02 / (5e-5 * 20))) + 1
        gp = (tmp_path / "t.gp").read_text()
        assert "using 1:2" in gp and "using 1:14" in gp and "using 1:16" in gp
        assert "gain condition" in (tmp_path / "t_summary.txt").read_text()

    def test_two_row_csv_edge_case(self, tmp_path):
        code = run_cli("run", "--output-dir", str(tmp_path), "--stem", "edge",
                       "--set", "simulation.duration=0.001",
                       "--set", "simulation.dt=0.001",
                       "--set", "simulation.decimation=1")
        assert code == 0
        lines = (tmp_path / "edge.csv").read_text().splitlines()
        assert len(lines) == 3  # header + t=0 + t=dt
        assert float(lines[2].split(",")[0]) == pytest.approx(1e-3)

    def test_config_round_trip_bit_identical(self, tmp_path):
        assert run_cli("run", "--output-dir", str(tmp_path), "--stem", "a", *TINY) == 0
        assert run_cli("run", "--output-dir", str(tmp_path), "--stem", "b",
                       "--config", str(tmp_path / "a_config.ini")) == 0
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_state_feedback_mode_mirrors_controller_input(self, tmp_path):
        code = run_cli("run", "--output-dir", str(tmp_path), "--stem", "s",
                       "--mode", "state_feedback", *TINY)
        assert code == 0
        data = np.genfromtxt(tmp_path / "s.csv", delimiter=",", names=True)
        for side in ("m", "s"):
            for j in (1, 2):
                assert np.array_equal(data[f"xhat_{side}{j}"], data[f"qd_{side}{j}"])
                assert np.all(data[f"xtilde_{side}{j}"] == 0.0)

    def test_gain_violation_refused_then_forced(self, tmp_path):
        weak = ["--set", "controller.k_damp_m=10", "--set", "controller.k_damp_s=10"]
        assert run_cli("run", "--output-dir", str(tmp_path), *TINY, *weak) == cli.EXIT_GAINS
        assert run_cli("run", "--output-dir", str(tmp_path), *TINY, *weak,
                       "--force") == 0

    def test_parse_error_exit_code(self, tmp_path):
        bad = tmp_path / "bad.ini"
        bad.write_text("[robot_m]\nlink_masses = one, two\n")
        assert run_cli("run", "--config", str(bad)) == cli.EXIT_CONFIG

    def test_oversized_step_exit_code(self, tmp_path):
        with pytest.warns(RuntimeWarning):
            code = run_cli("run", "--output-dir", str(tmp_path),
                           "--set", "simulation.dt=0.0002",
                           "--set", "simulation.duration=0.1")
        assert code == cli.EXIT_DIVERGED


class TestOverridesAndDump:
    def test_override_rejects_unknown_section(self):
        with pytest.raises(Exception):
            apply_overrides(default_config_text(), ["nosuch.key=1"])

    def test_dump_load_fixed_point(self):
        cfg = loads_config(default_config_text())
        text = dumps_config(cfg)
        again = loads_config(text)
        assert dumps_config(again) == text


class TestCompare:
    def test_exact_initial_estimates_make_modes_agree(self, capsys):
        code = run_cli(
            "compare", "--duration", "2.0",
            "--set", "observer_m.x_hat0=0.0, 0.0",
            "--set", "observer_s.x_hat0=0.0, 0.0")
        assert code == 0
        out = capsys.readouterr().out
        overall = float(out.rsplit("overall max discrepancy:", 1)[1].split("rad")[0])
        assert overall < 1e-6

    def test_discrepancy_grows_with_initial_estimate_error(self):
        # scaled downward from the reference estimates: scaling up stiffens
        # the t=0 adaptation gain past the dt=5e-5 stability bound
        import pdteleop as pt
        from dataclasses import replace
        base = loads_config(default_config_text())
        peaks = []
        for scale in (0.25, 0.5, 1.0):
            xh0 = (0.05 * scale, 0.02 * scale)
            cfg = replace(base, duration=5.0,
                          init_m=pt.ObserverInit(x_hat0=xh0, r0=2.0),
                          init_s=pt.ObserverInit(x_hat0=xh0, r0=2.0))
            ofb = pt.run_scenario(cfg)
            sfb = pt.run_scenario(cfg.with_mode(pt.STATE_FEEDBACK))
            peaks.append(max(np.abs(ofb.q_m - sfb.q_m).max(),
                             np.abs(ofb.q_s - sfb.q_s).max()))
        assert peaks[0] < peaks[1] < peaks[2]
