import json

import numpy as np
import pytest

from conftest import tiny_config
from twinwave.io import verify_manifest
from twinwave.sweep import GROUP_SIZES, analyze_stack, calibrate_threshold, run_sweep
from twinwave.ensemble import run_ensemble


@pytest.fixture(scope="module")
def small_sweep(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep")
    cfg = tiny_config(**{"run.shots": 120, "pump.power_mw": 30.0})
    result = run_sweep(cfg, powers=[15.0, 30.0, 60.0], out_dir=out)
    return result, out


class TestRunSweep:
    def test_points_and_observables(self, small_sweep):
        result, _ = small_sweep
        assert [pt.power_mw for pt in result.points] == [15.0, 30.0, 60.0]
        for pt in result.points:
            assert np.isfinite(pt.g2_center)
            assert set(pt.grouped) == {(a, s) for a in ("freq", "radial") for s in GROUP_SIZES}

    def test_outputs_and_manifest(self, small_sweep):
        _, out = small_sweep
        for name in ("curves.csv", "trajectory.csv", "g2_radial_vs_power.csv",
                     "g2_radial_vs_power.pgm", "manifest.json"):
            assert (out / name).exists()
        for i in range(3):
            assert (out / f"point_{i:02d}" / "g2_map.csv").exists()
            assert (out / f"point_{i:02d}" / "radial_profile.csv").exists()
        assert verify_manifest(out)
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["complete"] is True

    def test_threshold_defaults_to_curve_argmax(self, small_sweep):
        result, _ = small_sweep
        best = max(result.points, key=lambda pt: pt.g2_center)
        assert result.threshold_power_mw == best.power_mw

    def test_deterministic_rerun(self, small_sweep, tmp_path):
        result, out = small_sweep
        cfg = tiny_config(**{"run.shots": 120, "pump.power_mw": 30.0})
        again = run_sweep(cfg, powers=[15.0, 30.0, 60.0], out_dir=tmp_path / "again")
        assert (out / "curves.csv").read_bytes() == (tmp_path / "again" / "curves.csv").read_bytes()
        assert (out / "g2_radial_vs_power.pgm").read_bytes() == (
            tmp_path / "again" / "g2_radial_vs_power.pgm"
        ).read_bytes()

    def test_partial_failure_leaves_marked_manifest(self, tmp_path, monkeypatch):
        import twinwave.sweep as sweepmod

        cfg = tiny_config(**{"run.shots": 40, "pump.power_mw": 30.0})
        calls = {"n": 0}
        real = sweepmod.analyze_stack

        def flaky(stack, power):
            calls["n"] += 1
            if calls["n"] == 2:
                raise RuntimeError("injected failure")
            return real(stack, power)

        monkeypatch.setattr(sweepmod, "analyze_stack", flaky)
        out = tmp_path / "broken"
        with pytest.raises(RuntimeError):
            run_sweep(cfg, powers=[10.0, 20.0, 40.0], out_dir=out)
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["complete"] is False
        assert manifest["points_done"] == 1
        assert (out / "point_00" / "g2_map.csv").exists()


class TestAnalyzeStack:
    def test_groupings_contain_center(self):
        cfg = tiny_config(**{"run.shots": 80, "pump.power_mw": 30.0})
        stack = run_ensemble(cfg)
        pt = analyze_stack(stack, cfg.pump.power_mw)
        for (axis, size), (g2, se) in pt.grouped.items():
            assert np.isfinite(g2) and se >= 0


class TestCalibrate:
    def test_probe_returns_power_in_span(self):
        cfg = tiny_config(**{"run.shots": 60, "pump.power_mw": 30.0})
        p_star = calibrate_threshold(cfg, probe_shots=60, probe_points=5, span=(0.5, 2.0))
        assert 15.0 <= p_star <= 60.0
