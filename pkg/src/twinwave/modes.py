"""Mode bookkeeping for the triplet decomposition of three-wave mixing.

An intense pump driving parametric down-conversion is decomposed into many
independent (pump, signal, idler) mode triplets, indexed by an azimuthal
order m, a radial order l and a spectral order q.  Each triplet carries its
own effective nonlinear coupling constant; the schedule below assigns them
a separable geometric decay, so lower orders couple more strongly and
dominate the early gain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True, order=True)
class ModeIndex:
    """One (m, l, q) triplet label: azimuthal, radial and spectral order."""

    m: int
    l: int
    q: int

    def __post_init__(self):
        if self.l < 0 or self.q < 0:
            raise ConfigError(f"radial/spectral orders must be >= 0, got {self}")


@dataclass(frozen=True)
class ModeSet:
    """Truncation bounds of the triplet ladder: |m| <= m_max, l <= l_max, q <= q_max."""

    m_max: int = 6
    l_max: int = 11
    q_max: int = 11

    def __post_init__(self):
        if self.m_max < 0 or self.l_max < 0 or self.q_max < 0:
            raise ConfigError("mode truncation bounds must be non-negative")

    @property
    def m_values(self):
        return np.arange(-self.m_max, self.m_max + 1)

    @property
    def l_values(self):
        return np.arange(self.l_max + 1)

    @property
    def q_values(self):
        return np.arange(self.q_max + 1)

    @property
    def shape(self):
        return (2 * self.m_max + 1, self.l_max + 1, self.q_max + 1)

    @property
    def count(self):
        nm, nl, nq = self.shape
        return nm * nl * nq

    def contains(self, idx: ModeIndex) -> bool:
        return abs(idx.m) <= self.m_max and idx.l <= self.l_max and idx.q <= self.q_max

    def position(self, idx: ModeIndex):
        """(m, l, q) array position of one mode inside the ladder tensors."""
        if not self.contains(idx):
            raise ConfigError(f"{idx} outside truncation {self.shape}")
        return (idx.m + self.m_max, idx.l, idx.q)

    def indices(self):
        """All modes in fixed (m, l, q) lexicographic order."""
        return [
            ModeIndex(int(m), int(l), int(q))
            for m in self.m_values
            for l in self.l_values
            for q in self.q_values
        ]


@dataclass(frozen=True)
class CouplingSchedule:
    """Separable geometric decay of the per-triplet coupling constants.

    coupling(m, l, q) = k0 * kappa_m^|m| * kappa_l^l * kappa_q^q

    k0 is the base dimensionless gain per unit crystal length and per
    square-root photon; the decay factors lie strictly inside (0, 1) so the
    coupling is positive and non-increasing along every index separately.
    """

    k0: float
    kappa_m: float = 0.75
    kappa_l: float = 0.85
    kappa_q: float = 0.90

    def __post_init__(self):
        if not self.k0 > 0:
            raise ConfigError(f"k0 must be > 0, got {self.k0}")
        for name in ("kappa_m", "kappa_l", "kappa_q"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ConfigError(f"{name} must be in (0, 1), got {v}")


def coupling(idx: ModeIndex, sched: CouplingSchedule, modes: ModeSet | None = None) -> float:
    """Coupling constant of one triplet under a schedule.

    When a ModeSet is given the index is checked against its bounds.
    """
    if modes is not None and not modes.contains(idx):
        raise ConfigError(f"{idx} outside configured mode bounds")
    return (
        sched.k0
        * sched.kappa_m ** abs(idx.m)
        * sched.kappa_l ** idx.l
        * sched.kappa_q ** idx.q
    )


def coupling_tensor(modes: ModeSet, sched: CouplingSchedule) -> np.ndarray:
    """All coupling constants as an (n_m, n_l, n_q) tensor."""
    km = sched.kappa_m ** np.abs(modes.m_values).astype(float)
    kl = sched.kappa_l ** modes.l_values.astype(float)
    kq = sched.kappa_q ** modes.q_values.astype(float)
    return sched.k0 * km[:, None, None] * kl[None, :, None] * kq[None, None, :]


@dataclass(frozen=True)
class PumpConfig:
    """Pump pulse energy bookkeeping.

    The default conversion constant anchors 70 mW to 2.45e14 photons per
    pulse.  Desk-scale runs override it to place the depletion cascade
    within reach of small photon numbers (see config defaults).
    """

    power_mw: float
    photons_per_mw: float = 3.5e12
    crystal_length_mm: float = 5.0

    def __post_init__(self):
        if not self.power_mw > 0:
            raise ConfigError(f"pump power must be > 0 mW, got {self.power_mw}")
        if not self.photons_per_mw > 0:
            raise ConfigError("photons_per_mw must be > 0")
        if not self.crystal_length_mm > 0:
            raise ConfigError("crystal_length_mm must be > 0")


def photons_per_pulse(pump: PumpConfig) -> float:
    """Pump photons per pulse, linear in average power."""
    return pump.power_mw * pump.photons_per_mw


def gain_parameter(pump: PumpConfig, sched: CouplingSchedule) -> float:
    """Dimensionless evolution parameter G = k0 * L * sqrt(photons).

    The expression is ordered so that (L, P) -> (L/2, 4P) reproduces the
    same float exactly: sqrt(4x) = 2*sqrt(x) and the halving/doubling of
    the two factors cancels in one correctly-rounded product.
    """
    return sched.k0 * (pump.crystal_length_mm * math.sqrt(photons_per_pulse(pump)))


def mode_profile(order: int, axis_coords, width: float) -> np.ndarray:
    """Normalized harmonic-oscillator eigenfunction sampled on a coordinate axis.

    The order-n profile has RMS extent width*sqrt(n + 1/2), so higher
    orders reach farther into the tails.  Profiles of distinct orders are
    orthonormal under the grid inner product sum(u_a * u_b) * pitch once
    the grid resolves the fastest oscillation.

    Parameters
    ----------
    order : int
        Non-negative eigenfunction order.
    axis_coords : array_like
        Sample positions, in the physical units of the axis.
    width : float
        Scale of the order-0 Gaussian, same units as the axis.
    """
    if order < 0:
        raise ConfigError(f"profile order must be >= 0, got {order}")
    if not width > 0:
        raise ConfigError(f"profile width must be > 0, got {width}")
    x = np.asarray(axis_coords, dtype=float)
    return hermite_ladder(order, x, 0.0, width)[order]


def hermite_ladder(n_max: int, x: np.ndarray, center: float, width: float) -> np.ndarray:
    """Orders 0..n_max of the normalized oscillator eigenfunctions, stacked.

    Uses the stable two-term recurrence on the normalized functions:
    u_{n+1} = xi*sqrt(2/(n+1))*u_n - sqrt(n/(n+1))*u_{n-1}.
    """
    xi = (x - center) / width
    out = np.zeros((n_max + 1, x.size))
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * xi * xi) / np.sqrt(width)
    if n_max >= 1:
        out[1] = np.sqrt(2.0) * xi * out[0]
    for n in range(1, n_max):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * xi * out[n] - np.sqrt(n / (n + 1)) * out[n - 1]
    return out
