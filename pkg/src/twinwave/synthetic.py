"""Synthetic frame stacks with known statistics for estimator validation.

Three generators: equally-populated multimode thermal pixels (known
g2bar = 1/M), a Gaussian-kernel correlated speckle field (known
autocorrelation width), and white exponential noise (no correlations).
A camera-noise helper applies optional read noise and gain as
post-processing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .geometry import DetectorGeometry
from .ensemble import FrameStack

KINDS = ("thermal", "gauss-kernel", "white")


def small_geometry(n_radial: int = 16, n_wavelength: int = 32) -> DetectorGeometry:
    """Compact detector grid for fast synthetic-stack statistics."""
    return DetectorGeometry(
        radial_pitch_mrad=40.0 / (n_radial + 0.5),
        wavelength_pitch_nm=41.4 / (n_wavelength + 0.5),
        downsample=1,
    )


@dataclass(frozen=True)
class SyntheticSpec:
    """What to generate: kind, parameters, ensemble size and geometry."""

    kind: str = "thermal"
    m_modes: int = 1
    kernel_sigma_freq: float = 1.0  # nm, intensity-autocorrelation sigma
    kernel_sigma_radial: float = 1.0  # mrad
    shots: int = 2000
    geometry: DetectorGeometry = field(default_factory=small_geometry)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.m_modes < 1:
            raise ConfigError(f"m_modes must be >= 1, got {self.m_modes}")
        if self.kernel_sigma_freq <= 0 or self.kernel_sigma_radial <= 0:
            raise ConfigError("kernel sigmas must be > 0")
        if self.shots < 2:
            raise ConfigError(f"shots must be >= 2, got {self.shots}")


def _thermal(spec: SyntheticSpec, rng: np.random.Generator) -> np.ndarray:
    shape = (spec.shots, 2, spec.geometry.n_radial, spec.geometry.n_wavelength)
    # Sum of m iid unit exponentials == Gamma(m, 1), drawn in one shot.
    return rng.standard_gamma(spec.m_modes, size=shape)


def _white(spec: SyntheticSpec, rng: np.random.Generator) -> np.ndarray:
    shape = (spec.shots, 2, spec.geometry.n_radial, spec.geometry.n_wavelength)
    return rng.standard_exponential(size=shape)


def _gauss_kernel(spec: SyntheticSpec, rng: np.random.Generator) -> np.ndarray:
    """Speckle with Gaussian intensity autocorrelation of prescribed sigma.

    The field is complex white noise filtered by a Gaussian amplitude
    kernel of the same sigma (filter sigma s gives amplitude correlation
    exp(-dx^2/(4 s^2)) and intensity correlation exp(-dx^2/(2 s^2)), i.e.
    intensity-correlation sigma equal to s).  Filtering is periodic; the
    analysis windows used on these stacks stay in the interior.
    """
    geom = spec.geometry
    nr, nc = geom.n_radial, geom.n_wavelength
    sig_r = spec.kernel_sigma_radial / geom.pitch_mrad
    sig_c = spec.kernel_sigma_freq / geom.pitch_nm
    fr = np.fft.fftfreq(nr)
    fc = np.fft.fftfreq(nc)
    transfer = np.exp(
        -2.0 * np.pi**2 * (sig_r**2 * fr[:, None] ** 2 + sig_c**2 * fc[None, :] ** 2)
    )
    out = np.empty((spec.shots, 2, nr, nc))
    for strip in range(2):
        noise = rng.standard_normal((spec.shots, nr, nc)) + 1j * rng.standard_normal(
            (spec.shots, nr, nc)
        )
        filtered = np.fft.ifft2(np.fft.fft2(noise, axes=(1, 2)) * transfer, axes=(1, 2))
        intensity = np.abs(filtered) ** 2
        out[:, strip] = intensity / intensity.mean()
    return out


def synth_stack(spec: SyntheticSpec, seed: int) -> FrameStack:
    """Generate a synthetic FrameStack according to the spec."""
    rng = np.random.Generator(np.random.Philox(key=[seed, 0]))
    if spec.kind == "thermal":
        frames = _thermal(spec, rng)
    elif spec.kind == "white":
        frames = _white(spec, rng)
    else:
        frames = _gauss_kernel(spec, rng)
    meta = {
        "synthetic": spec.kind,
        "m_modes": spec.m_modes,
        "kernel_sigma_freq": spec.kernel_sigma_freq,
        "kernel_sigma_radial": spec.kernel_sigma_radial,
        "master_seed": seed,
        "shots": spec.shots,
        "rng_algorithm": "philox4x64(key=[seed, 0])",
    }
    return FrameStack(frames=frames, geometry=spec.geometry, meta=meta)


def synth_thermal(m_modes: int, shots: int, seed: int, geometry=None) -> FrameStack:
    """M equally populated thermal modes per pixel: per-pixel g2bar = 1/M."""
    spec = SyntheticSpec(
        kind="thermal",
        m_modes=m_modes,
        shots=shots,
        geometry=geometry if geometry is not None else small_geometry(),
    )
    return synth_stack(spec, seed)


def apply_camera_noise(
    stack: FrameStack,
    read_noise: float = 0.0,
    gain: float = 1.0,
    seed: int = 0,
) -> FrameStack:
    """Optional detector model: multiplicative gain plus additive read noise.

    Read noise is zero-mean Gaussian, clipped at zero so intensities stay
    non-negative; parameters land in the metadata so downstream analysis
    knows dark subtraction may be needed.
    """
    if read_noise < 0:
        raise ConfigError("read_noise must be >= 0")
    if gain <= 0:
        raise ConfigError("gain must be > 0")
    rng = np.random.Generator(np.random.Philox(key=[seed, 1]))
    frames = gain * stack.frames
    if read_noise > 0:
        frames = frames + read_noise * rng.standard_normal(frames.shape)
        frames = np.clip(frames, 0.0, None)
    meta = dict(stack.meta)
    meta["camera_noise"] = {"read_noise": read_noise, "gain": gain, "seed": seed}
    return FrameStack(frames=frames, geometry=stack.geometry, meta=meta)
