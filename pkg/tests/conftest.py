"""Shared fixtures: desk-scale default config plus reduced configs for fast tests."""

import numpy as np
import pytest

from twinwave import default_config
from twinwave.ensemble import pump_weights
from twinwave.modes import photons_per_pulse


def tiny_config(**overrides):
    """Reduced mode ladder and coarse grid: fast but fully representative."""
    base = {
        "modes.m_max": 2,
        "modes.l_max": 3,
        "modes.q_max": 3,
        "detector.downsample": 16,
        "run.shots": 64,
        "run.master_seed": 424242,
    }
    base.update(overrides)
    return default_config(**base)


def bright_config(shots=400, seed=11, tau_target=3.5):
    """Tiny config with pump power set so the strongest triplet gain
    reaches tau_target (deep in the pairing-dominated regime)."""
    cfg = tiny_config(**{"run.shots": shots, "run.master_seed": seed})
    w = pump_weights(cfg.modes, cfg.coupling)
    w000 = float(w.max())
    k0 = cfg.coupling.k0
    length = cfg.pump.crystal_length_mm
    n_p = (tau_target / (k0 * length)) ** 2 / w000
    power = n_p / cfg.pump.photons_per_mw
    return cfg.with_power(power)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(987654321)
