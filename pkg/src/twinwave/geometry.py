"""Far-field detector geometry and the mode profile basis on it.

The camera records two horizontal strips behind an imaging spectrometer:
the upper strip is the signal beam, the lower one the idler beam.  Each
strip spans a wavelength axis (horizontal) and a radial wave-vector axis
(vertical).  Azimuthally, a slit arc around the emission cone is
integrated into every pixel, which is what makes the per-pixel intensity
a detection-volume quantity rather than a point sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .modes import ModeSet, hermite_ladder

SIGNAL = 0
IDLER = 1

STRIP_NAMES = {"signal": SIGNAL, "idler": IDLER}


@dataclass(frozen=True)
class DetectorGeometry:
    """Pixel grids of one strip plus the azimuthal slit arc.

    The physical pixel pitches may be downsampled by an integer factor for
    desk-scale runs; pixel counts are range/pitch rounded down, so the
    effective grid can be slightly narrower than the nominal range.  The
    degenerate wavelength and the cone-center radial wave vector are
    placed at the respective grid centers and recorded in run metadata.
    """

    wavelength_min_nm: float = 677.3
    wavelength_max_nm: float = 718.7
    wavelength_pitch_nm: float = 0.083
    radial_min_mrad: float = 0.0
    radial_max_mrad: float = 40.0
    radial_pitch_mrad: float = 0.16
    downsample: int = 4
    arc_half_width_rad: float = 0.8
    arc_points: int = 32

    def __post_init__(self):
        if self.wavelength_max_nm <= self.wavelength_min_nm:
            raise ConfigError("wavelength range is empty")
        if self.radial_max_mrad <= self.radial_min_mrad:
            raise ConfigError("radial range is empty")
        if self.wavelength_pitch_nm <= 0 or self.radial_pitch_mrad <= 0:
            raise ConfigError("pixel pitches must be > 0")
        if self.downsample < 1 or int(self.downsample) != self.downsample:
            raise ConfigError(f"downsample must be a positive integer, got {self.downsample}")
        if self.arc_points < 1:
            raise ConfigError("arc_points must be >= 1")
        if self.arc_half_width_rad <= 0:
            raise ConfigError("arc_half_width_rad must be > 0")
        if not (
            self.wavelength_min_nm
            < self.degenerate_wavelength_nm
            < self.wavelength_max_nm
        ):
            raise ConfigError("degenerate wavelength falls outside the wavelength range")

    # effective (possibly downsampled) pitches
    @property
    def pitch_nm(self) -> float:
        return self.wavelength_pitch_nm * self.downsample

    @property
    def pitch_mrad(self) -> float:
        return self.radial_pitch_mrad * self.downsample

    @property
    def n_wavelength(self) -> int:
        return int(math.floor((self.wavelength_max_nm - self.wavelength_min_nm) / self.pitch_nm))

    @property
    def n_radial(self) -> int:
        return int(math.floor((self.radial_max_mrad - self.radial_min_mrad) / self.pitch_mrad))

    def wavelength_axis(self) -> np.ndarray:
        """Pixel-center wavelengths, nm."""
        return self.wavelength_min_nm + (np.arange(self.n_wavelength) + 0.5) * self.pitch_nm

    def radial_axis(self) -> np.ndarray:
        """Pixel-center radial wave vectors, mrad."""
        return self.radial_min_mrad + (np.arange(self.n_radial) + 0.5) * self.pitch_mrad

    @property
    def degenerate_wavelength_nm(self) -> float:
        """Grid-center wavelength; mirror partner pixels pair up exactly around it."""
        return self.wavelength_min_nm + 0.5 * self.n_wavelength * self.pitch_nm

    @property
    def radial_center_mrad(self) -> float:
        """Grid-center radial wave vector (emission-cone center)."""
        return self.radial_min_mrad + 0.5 * self.n_radial * self.pitch_mrad

    @property
    def center_pixel(self):
        """(row, col) of the pixel taken as the beam center."""
        return ((self.n_radial - 1) // 2, (self.n_wavelength - 1) // 2)

    def mirror_pixel(self, pixel):
        """Idler pixel anti-correlated with a signal pixel (both axes flipped)."""
        r, c = pixel
        return (self.n_radial - 1 - r, self.n_wavelength - 1 - c)

    @property
    def pixel_area(self) -> float:
        """Pixel area in (mrad * nm)."""
        return self.pitch_mrad * self.pitch_nm

    def arc_angles(self) -> np.ndarray:
        """Azimuthal sample angles across the slit arc, rad."""
        return np.linspace(-self.arc_half_width_rad, self.arc_half_width_rad, self.arc_points)

    @property
    def arc_spacing(self) -> float:
        """Arc integration weight per sample, rad."""
        if self.arc_points == 1:
            return 2.0 * self.arc_half_width_rad
        return 2.0 * self.arc_half_width_rad / (self.arc_points - 1)

    def describe(self) -> dict:
        """JSON-ready geometry summary for sidecar metadata."""
        return {
            "wavelength_min_nm": self.wavelength_min_nm,
            "wavelength_max_nm": self.wavelength_max_nm,
            "wavelength_pitch_nm": self.wavelength_pitch_nm,
            "radial_min_mrad": self.radial_min_mrad,
            "radial_max_mrad": self.radial_max_mrad,
            "radial_pitch_mrad": self.radial_pitch_mrad,
            "downsample": self.downsample,
            "n_wavelength": self.n_wavelength,
            "n_radial": self.n_radial,
            "effective_pitch_nm": self.pitch_nm,
            "effective_pitch_mrad": self.pitch_mrad,
            "degenerate_wavelength_nm": self.degenerate_wavelength_nm,
            "radial_center_mrad": self.radial_center_mrad,
            "arc_half_width_rad": self.arc_half_width_rad,
            "arc_points": self.arc_points,
            "strips": {"signal": SIGNAL, "idler": IDLER},
        }


@dataclass(frozen=True)
class ModeProfileBasis:
    """Transverse/spectral mode shapes evaluated on the detector grids.

    Radial orders map to oscillator eigenfunctions of the radial axis
    centered on the cone, spectral orders to eigenfunctions of the
    wavelength axis centered on degeneracy, and azimuthal orders to phase
    windings exp(i*m*phi) across the slit arc.
    """

    radial_width_mrad: float = 3.2
    spectral_width_nm: float = 3.2

    def __post_init__(self):
        if self.radial_width_mrad <= 0 or self.spectral_width_nm <= 0:
            raise ConfigError("basis widths must be > 0")

    def radial_matrix(self, geometry: DetectorGeometry, l_max: int) -> np.ndarray:
        """(l_max+1, n_radial) radial profiles u_l(k)."""
        return hermite_ladder(
            l_max, geometry.radial_axis(), geometry.radial_center_mrad, self.radial_width_mrad
        )

    def spectral_matrix(self, geometry: DetectorGeometry, q_max: int) -> np.ndarray:
        """(q_max+1, n_wavelength) spectral profiles v_q(omega)."""
        return hermite_ladder(
            q_max,
            geometry.wavelength_axis(),
            geometry.degenerate_wavelength_nm,
            self.spectral_width_nm,
        )

    def arc_phase_matrix(self, geometry: DetectorGeometry, modes: ModeSet) -> np.ndarray:
        """(n_m, arc_points) complex phases exp(i*m*phi_j)."""
        phi = geometry.arc_angles()
        return np.exp(1j * np.outer(modes.m_values, phi))

    def arc_overlap_matrix(self, geometry: DetectorGeometry, modes: ModeSet) -> np.ndarray:
        """Hermitian arc kernel S_mm' = sum_j exp(i*(m-m')*phi_j).

        The detection-volume intensity of one pixel is the quadratic form
        F^dagger S F over the azimuthal field components F_m, times the
        arc spacing.
        """
        E = self.arc_phase_matrix(geometry, modes)
        return E @ E.conj().T
