"""TOML run configuration: defaults, parsing, validation.

Sections [pump], [coupling], [modes], [detector] and [run] mirror the
construction arguments of the corresponding objects.  Unknown sections or
keys are hard errors so typos cannot silently fall back to defaults.

The desk-scale defaults below are calibrated so that the full
dominance/depletion cascade of the strongest triplets happens within a
laptop-sized photon budget: photons_per_mw is deliberately tiny compared
with a real pulsed source (which sits near 3.5e12 photons per mW) and the
70 mW default power lands close to the splitting threshold.
"""

from __future__ import annotations

from pathlib import Path

import tomli

from .errors import ConfigError
from .geometry import DetectorGeometry
from .modes import CouplingSchedule, ModeSet, PumpConfig
from .geometry import ModeProfileBasis
from .ensemble import RunConfig

DEFAULTS = {
    "pump": {
        "power_mw": 70.0,
        "photons_per_mw": 400.0,
        "crystal_length_mm": 5.0,
    },
    "coupling": {
        "k0": 0.026230194,
        "kappa_m": 0.75,
        "kappa_l": 0.85,
        "kappa_q": 0.90,
    },
    "modes": {
        "m_max": 6,
        "l_max": 11,
        "q_max": 11,
        "radial_width_mrad": 3.2,
        "spectral_width_nm": 3.2,
    },
    "detector": {
        "wavelength_min_nm": 677.3,
        "wavelength_max_nm": 718.7,
        "wavelength_pitch_nm": 0.083,
        "radial_min_mrad": 0.0,
        "radial_max_mrad": 40.0,
        "radial_pitch_mrad": 0.16,
        "downsample": 4,
        "arc_half_width_rad": 0.8,
        "arc_points": 32,
    },
    "run": {
        "shots": 2000,
        "master_seed": 20260808,
        "z_steps": 400,
    },
}


def default_toml() -> str:
    """The defaults rendered as a TOML document."""
    lines = []
    for section, keys in DEFAULTS.items():
        lines.append(f"[{section}]")
        for key, value in keys.items():
            lines.append(f"{key} = {value!r}" if isinstance(value, str) else f"{key} = {value}")
        lines.append("")
    return "\n".join(lines)


def _merge(raw: dict) -> dict:
    merged = {}
    for section, defaults in DEFAULTS.items():
        merged[section] = dict(defaults)
    for section, content in raw.items():
        if section not in DEFAULTS:
            raise ConfigError(f"unknown config section [{section}]")
        if not isinstance(content, dict):
            raise ConfigError(f"section [{section}] must be a table")
        for key, value in content.items():
            if key not in DEFAULTS[section]:
                raise ConfigError(f"unknown config key {section}.{key}")
            merged[section][key] = value
    return merged


def _echo(merged: dict) -> tuple:
    return tuple(
        (f"{section}.{key}", merged[section][key])
        for section in sorted(merged)
        for key in sorted(merged[section])
    )


def build_config(raw: dict) -> RunConfig:
    """RunConfig from a raw (possibly partial) dict of sections."""
    merged = _merge(raw)
    pump = PumpConfig(**merged["pump"])
    coupling = CouplingSchedule(**merged["coupling"])
    m = merged["modes"]
    modes = ModeSet(m_max=m["m_max"], l_max=m["l_max"], q_max=m["q_max"])
    basis = ModeProfileBasis(
        radial_width_mrad=m["radial_width_mrad"],
        spectral_width_nm=m["spectral_width_nm"],
    )
    geometry = DetectorGeometry(**merged["detector"])
    run = merged["run"]
    return RunConfig(
        pump=pump,
        coupling=coupling,
        modes=modes,
        geometry=geometry,
        basis=basis,
        shots=run["shots"],
        master_seed=run["master_seed"],
        z_steps=run["z_steps"],
        echo=_echo(merged),
    )


def parse_config(path) -> RunConfig:
    """Load and validate a TOML run configuration file.

    Missing keys take documented defaults (echoed into RunConfig.echo);
    unknown keys raise ConfigError naming the offender.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = tomli.loads(path.read_text())
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error in {path}: {exc}") from exc
    return build_config(raw)


def default_config(**overrides) -> RunConfig:
    """The documented desk-scale default configuration.

    Keyword overrides use dotted section keys, e.g.
    default_config(**{"pump.power_mw": 35.0, "run.shots": 500}).
    """
    raw: dict = {}
    for dotted, value in overrides.items():
        section, _, key = dotted.partition(".")
        if not key:
            raise ConfigError(f"override must look like 'section.key', got {dotted!r}")
        raw.setdefault(section, {})[key] = value
    return build_config(raw)
