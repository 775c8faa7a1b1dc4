"""Sweep and report pipeline behavior on small, fast configurations."""

import filecmp
import hashlib
import math
from pathlib import Path

import pytest

from snalab.config import ConfigError, ExperimentConfig
from snalab.pipeline import (
    SCHEMA_LINE,
    run_hierarchy,
    run_sna_report,
    run_staircase,
    write_plateaus_csv,
    write_staircase_csv,
)

RIGID_SWEEP = ExperimentConfig(
    family_kind="rigid", family_forcing="none", family_amplitude=0.0,
    sweep_start=0.0, sweep_stop=1.0, sweep_steps=128, orbit_n=20_000)


def summary_dict(result):
    return dict(result.summary)


# ---------------------------------------------------------------------------
# staircase sweep
# ---------------------------------------------------------------------------


class TestStaircase:
    def test_rigid_rotation_is_exact(self):
        result = run_staircase(RIGID_SWEEP)
        assert len(result.rows) == 128
        for row in result.rows:
            # identity fibre: rotation number equals the offset, no
            # Birkhoff noise at all, and the fibre exponent vanishes
            assert row.rho == pytest.approx(row.parameter, abs=1e-12)
            assert row.lyapunov == 0.0
        assert result.plateaus == ()

    def test_rigid_rows_monotone(self):
        result = run_staircase(RIGID_SWEEP)
        rhos = [row.rho for row in result.rows]
        assert rhos == sorted(rhos)

    def test_arnold_plateau_found_with_circular_merge(self):
        # alpha = 1 unforced Arnold circle map: the rho = 0 lock straddles
        # the sweep endpoints, so the plateau only has the right width if
        # the two boundary runs are merged into one.
        cfg = ExperimentConfig(
            family_kind="driven_arnold", family_alpha=1.0,
            family_forcing="none", family_amplitude=0.0,
            sweep_start=0.0, sweep_stop=1.0, sweep_steps=128,
            orbit_n=20_000)
        result = run_staircase(cfg)
        zero_locks = [p for p in result.plateaus
                      if p.lock_den == 1 and p.lock_num == 0]
        assert len(zero_locks) == 1
        width = zero_locks[0].width
        assert width == pytest.approx(1 / math.pi, rel=0.05)

    def test_sweep_rejects_bad_parameter(self):
        cfg = RIGID_SWEEP.with_overrides(sweep_parameter="omega")
        with pytest.raises(ConfigError, match="sweep.parameter"):
            run_staircase(cfg)

    def test_sweep_rejects_degenerate_span(self):
        cfg = RIGID_SWEEP.with_overrides(sweep_start=0.5, sweep_stop=0.5)
        with pytest.raises(ConfigError):
            run_staircase(cfg)

    def test_sweep_rejects_tiny_orbit(self):
        cfg = RIGID_SWEEP.with_overrides(orbit_n=10)
        with pytest.raises(ConfigError):
            run_staircase(cfg)

    def test_workers_do_not_change_rows(self):
        cfg = RIGID_SWEEP.with_overrides(sweep_steps=32, orbit_n=5_000)
        one = run_staircase(cfg)
        three = run_staircase(cfg.with_overrides(workers=3))
        assert one.rows == three.rows
        assert one.plateaus == three.plateaus

    def test_csv_writers_emit_schema_header(self, tmp_path):
        result = run_staircase(
            RIGID_SWEEP.with_overrides(sweep_steps=16, orbit_n=5_000))
        sweep_path = tmp_path / "staircase.csv"
        plat_path = tmp_path / "plateaus.csv"
        write_staircase_csv(result, sweep_path)
        write_plateaus_csv(result, plat_path)
        for path in (sweep_path, plat_path):
            first = path.read_text(encoding="utf-8").splitlines()[0]
            assert first == SCHEMA_LINE
        body = sweep_path.read_text(encoding="utf-8").splitlines()
        assert body[1].startswith("index,")
        assert len(body) == 2 + 16


# ---------------------------------------------------------------------------
# hierarchy runner
# ---------------------------------------------------------------------------


SMALL_HIER = ExperimentConfig(
    constants_theta_grid=1024, constants_x_grid=1024,
    hier_samples=1 << 16)


class TestHierarchyRun:
    def test_golden_frequency_passes(self, tmp_path):
        result = run_hierarchy(SMALL_HIER, out_dir=tmp_path)
        assert result.ok
        assert not result.out_of_regime
        summary = summary_dict(result)
        assert summary["F1"] == "pass"
        assert summary["F2"] == "pass"
        assert summary["E"] == "pass"
        assert (tmp_path / "hierarchy.csv").exists()

    def test_rational_frequency_fails_funnel_checks(self, tmp_path):
        # omega = 1/5 revisits the same five fibres, so the separation
        # conditions collapse in a known place.
        cfg = SMALL_HIER.with_overrides(omega="1/5")
        result = run_hierarchy(cfg, out_dir=tmp_path)
        assert not result.ok
        summary = summary_dict(result)
        assert summary["F1"] == "fail (fails at (j,k)=(0, 5))"
        assert "F1" in result.failures
        assert "F2" in result.failures


# ---------------------------------------------------------------------------
# full report
# ---------------------------------------------------------------------------


SMOKE_REPORT = ExperimentConfig(
    grid_size=1024, pullback_depth=600, orbit_n=50_000,
    constants_theta_grid=1024, constants_x_grid=1024,
    hier_samples=1 << 16, lipschitz_pair_budget=5_000, lipschitz_j_max=2,
    dimension_grid=1 << 14, dimension_box_grid=1 << 15,
    dimension_centers=8)


@pytest.fixture(scope="module")
def smoke_report(tmp_path_factory):
    out = tmp_path_factory.mktemp("report")
    return run_sna_report(SMOKE_REPORT, out_dir=out), out


class TestReport:
    def test_smoke_report_passes(self, smoke_report):
        result, _ = smoke_report
        assert result.ok
        assert not result.out_of_regime
        summary = summary_dict(result)
        assert summary["verdict"] == "pass"
        assert summary["lyapunov.consistency"].startswith("pass")
        assert summary["fraction.bound"] == "pass"
        assert summary["dimension.pointwise.band"] == "pass"

    def test_smoke_report_classifies_sna(self, smoke_report):
        result, _ = smoke_report
        summary = summary_dict(result)
        lam_att = float(summary["lyapunov.attractor"])
        lam_rep = float(summary["lyapunov.repeller"])
        assert lam_att < 0 < lam_rep
        assert summary["lyapunov.classification"] == (
            "attractor contracts, repeller expands")

    def test_smoke_report_writes_expected_files(self, smoke_report):
        _, out = smoke_report
        names = sorted(p.name for p in Path(out).iterdir())
        assert names == [
            "attractor.csv", "config.resolved.cfg", "constants.csv",
            "dimension.csv", "hierarchy.csv", "lipschitz.csv",
            "lyapunov.csv", "omega_sets.csv", "repeller.csv",
            "summary.txt",
        ]

    def test_csv_files_carry_schema_line(self, smoke_report):
        _, out = smoke_report
        for path in Path(out).glob("*.csv"):
            first = path.read_text(encoding="utf-8").splitlines()[0]
            assert first == SCHEMA_LINE, path.name

    def test_resolved_config_has_no_scheduling_keys(self, smoke_report):
        _, out = smoke_report
        text = (Path(out) / "config.resolved.cfg").read_text("utf-8")
        assert "run.workers" not in text
        assert "output.dir" not in text
        assert "run.seed = 0" in text

    def test_rigid_family_reports_out_of_regime(self, tmp_path):
        cfg = SMOKE_REPORT.with_overrides(
            family_kind="rigid", family_forcing="none",
            family_amplitude=0.0, family_tau=0.3)
        result = run_sna_report(cfg, out_dir=tmp_path)
        assert result.ok
        assert result.out_of_regime
        summary = summary_dict(result)
        assert summary["verdict"] == "out-of-regime"
        assert "no contraction/expansion split" in summary["stage.constants"]
        assert summary["stage.hierarchy"].startswith("skipped")

    def test_wrap_ambiguity_skips_structure_stages(self, tmp_path):
        # near the graph collision the critical components are wide
        # enough that a tracked arc outgrows half the circle; the
        # structure stages must bow out without failing the report
        cfg = SMOKE_REPORT.with_overrides(
            family_tau=0.952, orbit_n=20_000,
            dimension_grid=1 << 14, dimension_box_grid=1 << 14)
        result = run_sna_report(cfg, out_dir=tmp_path)
        summary = summary_dict(result)
        assert summary["stage.hierarchy"].startswith(
            "skipped: arc tracking ambiguous")
        assert summary["stage.omega_sets"] == "skipped: needs hierarchy"
        assert "stage.hierarchy" not in result.failures
        assert not result.out_of_regime

    def test_superattracting_arnold_report(self, tmp_path):
        # alpha = 1, tau = 0: the attractor sits on the superattracting
        # fixed line, its graph exponent is -inf, and the repeller over
        # the identity-derivative line expands at exactly log 2.
        cfg = SMOKE_REPORT.with_overrides(
            family_kind="driven_arnold", family_alpha=1.0,
            family_forcing="none", family_amplitude=0.0, family_tau=0.0)
        result = run_sna_report(cfg, out_dir=tmp_path)
        summary = summary_dict(result)
        assert float(summary["lyapunov.attractor"]) == -math.inf
        assert float(summary["lyapunov.repeller"]) == math.log(2.0)
        assert summary["lyapunov.birkhoff"].startswith("skipped")
        assert result.out_of_regime

    def test_report_deterministic_across_workers(self, tmp_path):
        cfg = SMOKE_REPORT.with_overrides(
            grid_size=512, pullback_depth=400, orbit_n=20_000,
            constants_theta_grid=512, constants_x_grid=512,
            hier_samples=1 << 14, lipschitz_pair_budget=2_000,
            dimension_grid=1 << 12, dimension_box_grid=1 << 13)
        digests = []
        for run, workers in (("a", 1), ("b", 2)):
            out = tmp_path / run
            run_sna_report(cfg.with_overrides(workers=workers), out_dir=out)
            blob = hashlib.sha256()
            for path in sorted(out.iterdir()):
                blob.update(path.name.encode())
                blob.update(path.read_bytes())
            digests.append(blob.hexdigest())
        assert digests[0] == digests[1]
        match, mismatch, errors = filecmp.cmpfiles(
            tmp_path / "a", tmp_path / "b",
            [p.name for p in (tmp_path / "a").iterdir()], shallow=False)
        assert not mismatch and not errors
