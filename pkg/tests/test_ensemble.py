import math

import numpy as np
import pytest

from conftest import bright_config, tiny_config
from twinwave.errors import ConfigError, IntegrationError
from twinwave.geometry import IDLER, SIGNAL
from twinwave.modes import ModeIndex, photons_per_pulse
from twinwave.ensemble import (
    FrameStack,
    pump_weights,
    run_ensemble,
    seed_shot,
    seed_triplet,
    shot_stream,
    simulate_shot,
    step_counts,
    synthesize_frame,
    vacuum_mean_map,
)


class TestSeeding:
    def test_pump_shares_sum_to_photon_number(self):
        cfg = tiny_config()
        weights = pump_weights(cfg.modes, cfg.coupling)
        assert weights.sum() == pytest.approx(1.0, rel=1e-14)
        a_p, _, _ = seed_shot(shot_stream(1, 0), cfg.modes, cfg.pump, weights)
        assert np.sum(np.abs(a_p) ** 2) == pytest.approx(
            photons_per_pulse(cfg.pump), rel=1e-12
        )

    def test_strongest_triplet_gets_largest_share(self):
        cfg = tiny_config()
        weights = pump_weights(cfg.modes, cfg.coupling)
        assert np.unravel_index(np.argmax(weights), weights.shape) == (
            cfg.modes.m_max,
            0,
            0,
        )

    def test_vacuum_seed_variance(self):
        cfg = tiny_config()
        weights = pump_weights(cfg.modes, cfg.coupling)
        acc = []
        for shot in range(200):
            _, a_s, _ = seed_shot(shot_stream(7, shot), cfg.modes, cfg.pump, weights)
            acc.append(np.abs(a_s) ** 2)
        values = np.concatenate(acc)
        mean = values.mean()
        stderr = values.std(ddof=1) / math.sqrt(values.size)
        assert abs(mean - 0.5) <= 3 * stderr

    def test_seed_triplet_deterministic_and_consistent(self):
        cfg = tiny_config()
        weights = pump_weights(cfg.modes, cfg.coupling)
        idx = ModeIndex(1, 2, 0)
        s1 = seed_triplet(shot_stream(99, 5), idx, cfg.modes, cfg.pump, weights)
        s2 = seed_triplet(shot_stream(99, 5), idx, cfg.modes, cfg.pump, weights)
        assert s1 == s2
        # matches the block of the full-shot draw
        a_p, a_s, a_i = seed_shot(shot_stream(99, 5), cfg.modes, cfg.pump, weights)
        flat = np.ravel_multi_index(cfg.modes.position(idx), cfg.modes.shape)
        assert s1.a_s == a_s[flat] and s1.a_i == a_i[flat] and s1.a_p == a_p[flat]

    def test_distinct_shots_get_distinct_streams(self):
        cfg = tiny_config()
        weights = pump_weights(cfg.modes, cfg.coupling)
        _, a, _ = seed_shot(shot_stream(3, 0), cfg.modes, cfg.pump, weights)
        _, b, _ = seed_shot(shot_stream(3, 1), cfg.modes, cfg.pump, weights)
        assert not np.allclose(a, b)


class TestSimulateShot:
    def test_negligible_gain_returns_seeds(self):
        cfg = tiny_config(**{"coupling.k0": 1e-300})
        weights = pump_weights(cfg.modes, cfg.coupling)
        _, a_s0, a_i0 = seed_shot(shot_stream(cfg.master_seed, 3), cfg.modes, cfg.pump, weights)
        a_s, a_i = simulate_shot(cfg, 3)
        np.testing.assert_array_equal(a_s.ravel(), a_s0)
        np.testing.assert_array_equal(a_i.ravel(), a_i0)

    def test_low_gain_mean_matches_linearized_sum(self):
        # Mean total signal photons ~ sum over triplets of sinh^2 plus the
        # half-photon seeding offsets.  A large photon reservoir at small
        # k0 keeps the gain low while making the pump depletion neglected
        # by the linearized oracle utterly negligible.
        from twinwave.modes import coupling_tensor
        from twinwave.dynamics import linearized_gain_mean

        cfg = tiny_config(
            **{
                "pump.power_mw": 2.0,
                "pump.photons_per_mw": 4.0e5,
                "coupling.k0": 8.3e-4,
                "run.shots": 600,
                "run.master_seed": 31415,
            }
        )
        K = coupling_tensor(cfg.modes, cfg.coupling)
        w = pump_weights(cfg.modes, cfg.coupling)
        n_p = photons_per_pulse(cfg.pump)
        length = cfg.pump.crystal_length_mm
        expected = sum(
            linearized_gain_mean(float(k), math.sqrt(n_p * float(wi)), length)
            for k, wi in zip(K.ravel(), w.ravel())
        )
        totals = []
        for shot in range(cfg.shots):
            a_s, _ = simulate_shot(cfg, shot)
            totals.append(np.sum(np.abs(a_s) ** 2) - 0.5 * cfg.modes.count)
        totals = np.array(totals)
        stderr = totals.std(ddof=1) / math.sqrt(totals.size)
        assert abs(totals.mean() - expected) <= 3 * stderr

    def test_shot_out_of_range(self):
        cfg = tiny_config()
        with pytest.raises(ConfigError):
            simulate_shot(cfg, cfg.shots)


class TestSynthesis:
    def test_identical_outputs_mirror(self):
        cfg = tiny_config()
        rng = np.random.default_rng(5)
        amps = rng.standard_normal(cfg.modes.shape) + 1j * rng.standard_normal(cfg.modes.shape)
        frame = synthesize_frame(amps, amps, cfg.geometry, cfg.basis, cfg.modes)
        np.testing.assert_allclose(
            frame[IDLER], frame[SIGNAL][::-1, ::-1], rtol=1e-12, atol=1e-30
        )

    def test_single_mode_shape_is_shot_independent(self):
        # One populated triplet: the strip pattern is the same every shot
        # up to the thermal amplitude of that mode.
        cfg = tiny_config()
        base = np.zeros(cfg.modes.shape, complex)
        pos = (cfg.modes.m_max, 0, 0)
        shapes = []
        for amp in (0.3 + 0.1j, -1.2 + 0.8j):
            amps = base.copy()
            amps[pos] = amp
            frame = synthesize_frame(amps, amps, cfg.geometry, cfg.basis, cfg.modes)
            shapes.append(frame[SIGNAL] / abs(amp) ** 2)
        np.testing.assert_allclose(shapes[0], shapes[1], rtol=1e-10, atol=1e-30)

    def test_vacuum_mean_matches_analytic_sum(self):
        cfg = tiny_config(**{"coupling.k0": 1e-300, "run.shots": 3000})
        stack = run_ensemble(cfg)
        expected = vacuum_mean_map(cfg)
        measured = stack.signal.mean(axis=0)
        stderr = stack.signal.std(axis=0, ddof=1) / math.sqrt(stack.shots)
        # strip total within 3 sigma of the analytic value, and no more than
        # the Gaussian tail fraction of individual pixels beyond 3 sigma
        totals = stack.signal.sum(axis=(1, 2))
        total_se = totals.std(ddof=1) / math.sqrt(stack.shots)
        assert abs(totals.mean() - expected.sum()) <= 3 * total_se
        z = np.abs(measured - expected) / np.maximum(stderr, 1e-300)
        assert np.mean(z > 3) <= 0.01

    def test_shape_mismatch_rejected(self):
        cfg = tiny_config()
        bad = np.zeros((1, 2, 3), complex)
        with pytest.raises(ConfigError):
            synthesize_frame(bad, bad, cfg.geometry, cfg.basis, cfg.modes)


class TestRunEnsemble:
    def test_deterministic_across_runs_and_workers(self):
        cfg = tiny_config(**{"run.shots": 24})
        a = run_ensemble(cfg, workers=1)
        b = run_ensemble(cfg, workers=2)
        c = run_ensemble(cfg, workers=1)
        assert a.frames.tobytes() == b.frames.tobytes() == c.frames.tobytes()

    def test_seed_changes_output(self):
        cfg = tiny_config(**{"run.shots": 8})
        a = run_ensemble(cfg)
        b = run_ensemble(tiny_config(**{"run.shots": 8, "run.master_seed": 1}))
        assert a.frames.tobytes() != b.frames.tobytes()

    def test_length_power_tradeoff_on_frames(self):
        # Exchange crystal length for power at matched K*a_p*z products: at
        # large photon number and modest gain the depletion feedback is
        # O(N_s/N_p) ~ 1e-13, below the 1e-12 gate.
        base = {
            "pump.photons_per_mw": 3.5e12,
            "pump.power_mw": 70.0,
            "pump.crystal_length_mm": 5.0,
            "coupling.k0": 1.0e-8,
            "run.shots": 24,
        }
        cfg_a = tiny_config(**base)
        scaled = dict(base)
        scaled["pump.power_mw"] = 4 * 70.0
        scaled["pump.crystal_length_mm"] = 5.0 / 2
        cfg_b = tiny_config(**scaled)
        fa = run_ensemble(cfg_a).frames
        fb = run_ensemble(cfg_b).frames
        denom = np.maximum(np.maximum(np.abs(fa), np.abs(fb)), 1e-280)
        assert np.max(np.abs(fa - fb) / denom) <= 1e-12

    def test_twin_beam_energy_correlation(self):
        stack = run_ensemble(bright_config(shots=300))
        e_s = stack.signal.sum(axis=(1, 2))
        e_i = stack.idler.sum(axis=(1, 2))
        assert np.corrcoef(e_s, e_i)[0, 1] > 0.9

    def test_frames_nonnegative_finite(self):
        stack = run_ensemble(tiny_config(**{"run.shots": 8}))
        assert np.all(stack.frames >= 0)
        assert np.all(np.isfinite(stack.frames))

    def test_step_precondition_propagates(self):
        cfg = bright_config(shots=4, tau_target=30.0)
        from dataclasses import replace

        # force far too few steps while keeping the auto-refinement off
        broken = replace(cfg, z_steps=1)
        import twinwave.ensemble as ens

        counts = step_counts(broken)
        assert counts.max() > 1  # auto refinement would fix it; sanity
        # bypass refinement by integrating with a hand-built block
        weights = pump_weights(cfg.modes, cfg.coupling)
        stream = shot_stream(cfg.master_seed, 0)
        a_p, a_s, a_i = seed_shot(stream, cfg.modes, cfg.pump, weights)
        from twinwave.modes import coupling_tensor

        gain = coupling_tensor(cfg.modes, cfg.coupling).ravel()
        ones = np.ones(gain.size, dtype=np.int64)
        with pytest.raises(IntegrationError):
            ens._propagate_block(broken, a_p, a_s, a_i, gain, ones)

    def test_metadata_records_provenance(self):
        cfg = tiny_config(**{"run.shots": 4})
        stack = run_ensemble(cfg)
        assert stack.meta["master_seed"] == cfg.master_seed
        assert "philox" in stack.meta["rng_algorithm"]
        assert stack.meta["engine"]
        assert stack.meta["geometry"]["n_radial"] == cfg.geometry.n_radial


class TestFrameStackValidation:
    def test_negative_intensity_rejected(self):
        cfg = tiny_config()
        frames = -np.ones((2, 2, cfg.geometry.n_radial, cfg.geometry.n_wavelength))
        with pytest.raises(ConfigError):
            FrameStack(frames=frames, geometry=cfg.geometry, meta={})

    def test_wrong_shape_rejected(self):
        cfg = tiny_config()
        with pytest.raises(ConfigError):
            FrameStack(frames=np.zeros((2, 3, 4, 5)), geometry=cfg.geometry, meta={})
