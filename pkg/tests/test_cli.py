import json
import os

import numpy as np
import pytest

from clocksync.cli import run
from clocksync.output import format_cell, read_csv, write_csv, write_svg


class TestOutputs:
    def test_csv_round_trip_exact(self, tmp_path):
        path = tmp_path / "t.csv"
        rows = [[0.1, 1e-300, 2 ** 53 + 1.0], [float("nan"), float("inf"), -0.0]]
        write_csv(path, ["a", "b", "c"], rows)
        header, back = read_csv(path)
        assert header == ["a", "b", "c"]
        assert back[0] == rows[0]
        assert np.isnan(back[1][0]) and np.isinf(back[1][1])

    def test_empty_rows_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_csv(tmp_path / "e.csv", ["a"], [])
        assert not (tmp_path / "e.csv").exists()

    def test_row_width_checked(self, tmp_path):
        with pytest.raises(ValueError):
            write_csv(tmp_path / "w.csv", ["a", "b"], [[1.0]])

    def test_format_cell(self):
        assert format_cell(0.1) == "0.1"
        assert format_cell(float("nan")) == "nan"
        assert format_cell(float("-inf")) == "-inf"

    def test_svg_polyline_per_column(self, tmp_path):
        path = tmp_path / "p.svg"
        x = np.linspace(0, 1, 20)
        rows = np.column_stack([x, np.sin(x), np.cos(x), x ** 2]).tolist()
        write_svg(path, ["x", "s", "c", "q"], rows)
        text = path.read_text()
        assert text.count("<polyline") == 3
        assert "</svg>" in text


class TestConfig:
    def test_unknown_flag_exits_2(self, capsys):
        assert run(["sweep", "--bogus-flag"]) == 2

    def test_unknown_subcommand_exits_2(self, capsys):
        assert run(["frobnicate"]) == 2

    def test_bad_json_exits_2(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text("{not json")
        assert run(["modes", "--config", str(cfg),
                    "--out", str(tmp_path / "o")]) == 2

    def test_unknown_param_key_exits_2(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"params": {"flux_capacitance": 1.0}}))
        assert run(["modes", "--config", str(cfg),
                    "--out", str(tmp_path / "o")]) == 2

    def test_invalid_physics_exits_2(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"params": {"nth1": -5.0}}))
        assert run(["modes", "--config", str(cfg),
                    "--out", str(tmp_path / "o")]) == 2

    def test_hz_and_rad_override(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({
            "preset": "paper",
            "params": {"kappa_hz": 1e6, "detuning_rad": -2e6 * np.pi * 0.8},
        }))
        out = tmp_path / "o"
        assert run(["modes", "--config", str(cfg), "--out", str(out),
                    "--points", "3"]) == 0
        resolved = json.loads((out / "resolved_config.json").read_text())
        assert resolved["params_rad"]["kappa"] == pytest.approx(2 * np.pi * 1e6)
        assert resolved["params_rad"]["detuning"] == pytest.approx(-1.6e6 * np.pi)

    def test_physics_error_exits_3(self, tmp_path, capsys):
        # a quench ensemble of one trajectory is not a valid experiment
        assert run(["transient", "--n-traj", "1", "--g-over-kappa", "0.02",
                    "--duration", "0.001", "--out", str(tmp_path / "o")]) == 3

    def test_io_error_exits_4(self, tmp_path, capsys):
        target = tmp_path / "blocked"
        target.write_text("a file, not a directory")
        assert run(["modes", "--points", "3", "--out", str(target)]) == 4


class TestCommands:
    def test_modes_csv(self, tmp_path, capsys):
        out = tmp_path / "o"
        assert run(["modes", "--points", "5", "--out", str(out)]) == 0
        header, rows = read_csv(out / "modes.csv")
        assert header == ["g_over_kappa", "omega_plus", "omega_minus",
                          "gamma_plus", "gamma_minus", "ratio"]
        assert len(rows) == 5
        assert (out / "resolved_config.json").exists()

    def test_ness_csv(self, tmp_path, capsys):
        out = tmp_path / "o"
        assert run(["ness", "--g-over-kappa", "0.02", "--out", str(out)]) == 0
        header, rows = read_csv(out / "ness.csv")
        assert header[:5] == ["g_over_kappa", "n_b1_eff", "n_b2_eff",
                              "n_a_eff", "n_cross_eff"]
        assert rows[0][9] > 0.9  # analytic_C above threshold

    def test_sweep_csv_and_summary(self, tmp_path, capsys):
        out = tmp_path / "o"
        code = run(["sweep", "--points", "6", "--g-max", "0.02",
                    "--protocol", "analytic", "--out", str(out), "--svg"])
        assert code == 0
        header, rows = read_csv(out / "sweep.csv")
        assert header == ["g_over_kappa", "C", "D", "N1", "N2", "gamma_plus",
                          "gamma_minus", "ratio", "mu_b1", "mu_b2", "mu_a",
                          "pi_s", "analytic_C"]
        assert len(rows) == 6
        assert (out / "sweep.svg").exists()
        summary = json.loads((out / "sweep_summary.json").read_text())
        assert "threshold_g_over_kappa" in summary

    def test_trajectory_csv(self, tmp_path, capsys):
        out = tmp_path / "o"
        code = run(["trajectory", "--g-over-kappa", "0.01", "--duration",
                    "0.4", "--store-every", "4", "--out", str(out)])
        assert code == 0
        header, rows = read_csv(out / "trajectory.csv")
        assert header == ["t", "re_b1", "im_b1", "re_b2", "im_b2"]
        sheader, srows = read_csv(out / "spectrum.csv")
        assert sheader == ["f_hz", "psd_b1", "psd_b2"]
        summary = json.loads((out / "trajectory_summary.json").read_text())
        assert {"C", "D", "N1", "N2", "carrier_hz"} <= set(summary)

    def test_transient_csv(self, tmp_path, capsys):
        out = tmp_path / "o"
        code = run(["transient", "--g-over-kappa", "0.04", "--n-traj", "80",
                    "--seed", "7", "--out", str(out)])
        assert code == 0
        header, rows = read_csv(out / "transient.csv")
        assert header == ["t", "R", "mu_b1", "mu_b2", "mu_a"]
        summary = json.loads((out / "transient_summary.json").read_text())
        assert summary["transient_time_s"] > 0

    def test_seeded_runs_byte_identical(self, tmp_path, capsys):
        args = ["transient", "--g-over-kappa", "0.03", "--n-traj", "50",
                "--seed", "11"]
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert run(args + ["--out", str(out)]) == 0
            outs.append((out / "transient.csv").read_bytes())
        assert outs[0] == outs[1]
