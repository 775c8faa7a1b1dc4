"""Command line behavior: exit codes, outputs, and overrides."""

import subprocess
import sys

import pytest

from snalab.cli import main
from snalab.config import ExperimentConfig, serialize_config
from snalab.pipeline import SCHEMA_LINE

RIGID = ExperimentConfig(
    family_kind="rigid", family_forcing="none", family_amplitude=0.0,
    family_tau=0.3, grid_size=256, pullback_depth=5,
    constants_theta_grid=256, constants_x_grid=256,
    sweep_steps=16, orbit_n=2_000)


def write_cfg(tmp_path, cfg, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(serialize_config(cfg), encoding="utf-8")
    return str(path)


class TestExitCodes:
    def test_clean_run_exits_zero(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, RIGID)
        code = main(["constants", "--config", cfg,
                     "--out", str(tmp_path / "out")])
        assert code == 0
        assert "no contraction/expansion split" in capsys.readouterr().out

    def test_diagnostic_violation_exits_one(self, tmp_path, capsys):
        # a rational frequency breaks the separation conditions, which is
        # a diagnostic failure, not a configuration problem
        cfg = write_cfg(tmp_path, ExperimentConfig(
            omega="1/5", constants_theta_grid=1024, constants_x_grid=1024,
            hier_samples=1 << 16))
        code = main(["hierarchy", "--config", cfg,
                     "--out", str(tmp_path / "out")])
        assert code == 1
        out = capsys.readouterr().out
        assert "F1 = fail" in out

    def test_unknown_config_key_exits_two(self, tmp_path, capsys):
        path = tmp_path / "bad.cfg"
        path.write_text("sweep.span = 1.0\n", encoding="utf-8")
        code = main(["staircase", "--config", str(path)])
        assert code == 2
        err = capsys.readouterr().err
        assert err.startswith("config error:")
        assert "sweep.span" in err

    def test_missing_config_file_exits_two(self, tmp_path, capsys):
        code = main(["report", "--config", str(tmp_path / "absent.cfg")])
        assert code == 2
        assert "cannot read config" in capsys.readouterr().err

    def test_bad_override_exits_two(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, RIGID)
        assert main(["attractor", "--config", cfg, "--grid", "64"]) == 2
        assert "grid.size" in capsys.readouterr().err
        assert main(["attractor", "--config", cfg, "--workers", "0"]) == 2
        assert "run.workers" in capsys.readouterr().err

    def test_small_constants_grid_exits_two(self, tmp_path, capsys):
        bad = RIGID.with_overrides(constants_theta_grid=128)
        cfg = write_cfg(tmp_path, bad)
        assert main(["constants", "--config", cfg]) == 2
        assert "constants grids" in capsys.readouterr().err

    def test_bad_family_kind_exits_two(self, tmp_path, capsys):
        path = tmp_path / "bad.cfg"
        path.write_text("family.kind = quadratic\n", encoding="utf-8")
        assert main(["report", "--config", str(path)]) == 2
        assert "family.kind" in capsys.readouterr().err


class TestOutputs:
    def test_staircase_writes_schema_marked_csv(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, RIGID)
        out = tmp_path / "out"
        code = main(["staircase", "--config", cfg, "--out", str(out)])
        assert code == 0
        for name in ("staircase.csv", "plateaus.csv",
                     "config.resolved.cfg"):
            assert (out / name).exists(), name
        lines = (out / "staircase.csv").read_text("utf-8").splitlines()
        assert lines[0] == SCHEMA_LINE
        assert lines[1].split(",")[:3] == ["index", "tau", "rho"]
        assert len(lines) == 2 + 16
        assert "16 sweep rows" in capsys.readouterr().out

    def test_attractor_writes_both_graphs(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, RIGID)
        out = tmp_path / "out"
        code = main(["attractor", "--config", cfg, "--out", str(out)])
        assert code == 0
        assert (out / "attractor.csv").exists()
        assert (out / "repeller.csv").exists()

    def test_out_flag_overrides_config_directory(self, tmp_path):
        cfg_obj = RIGID.with_overrides(out_dir=str(tmp_path / "from_cfg"))
        cfg = write_cfg(tmp_path, cfg_obj)
        main(["constants", "--config", cfg,
              "--out", str(tmp_path / "from_flag")])
        assert (tmp_path / "from_flag" / "config.resolved.cfg").exists()
        assert not (tmp_path / "from_cfg").exists()

    def test_tau_override_lands_in_resolved_config(self, tmp_path):
        cfg = write_cfg(tmp_path, RIGID)
        out = tmp_path / "out"
        main(["constants", "--config", cfg, "--out", str(out),
              "--tau", "0.7312"])
        text = (out / "config.resolved.cfg").read_text("utf-8")
        assert "family.tau = 0.7312" in text

    def test_defaults_used_without_config(self, tmp_path):
        # no --config: the built-in experiment definition applies
        out = tmp_path / "out"
        code = main(["attractor", "--out", str(out), "--grid", "256",
                     "--depth", "50"])
        assert code == 0
        resolved = (out / "config.resolved.cfg").read_text("utf-8")
        assert "family.kind = arctan" in resolved
        assert "grid.size = 256" in resolved

    def test_report_summary_file_matches_stdout(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, RIGID.with_overrides(
            grid_size=512, pullback_depth=400,
            constants_theta_grid=256, constants_x_grid=256))
        out = tmp_path / "out"
        code = main(["report", "--config", cfg, "--out", str(out)])
        assert code == 0
        stdout = capsys.readouterr().out
        assert "verdict = out-of-regime" in stdout
        summary = (out / "summary.txt").read_text("utf-8")
        for line in stdout.splitlines():
            assert line in summary


def test_console_help_runs():
    proc = subprocess.run(["snalab", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "report" in proc.stdout


def test_usage_error_exits_two():
    proc = subprocess.run(["snalab", "no-such-command"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
