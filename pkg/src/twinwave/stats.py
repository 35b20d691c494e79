"""Estimators of intensity coherence on frame stacks.

The central quantity is the normalized intensity-fluctuation variance

    g2bar = <(dW)^2> / <W>^2

of the detection-volume intensity W, estimated across shots.  For a sum
of M equally populated thermal modes g2bar = 1/M, so 1/g2bar acts as a
local mode-number gauge.  The module also measures intensity auto- and
cross-correlation profiles, their FWHM widths, and extracts the motion of
local-coherence maxima across a power sweep.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .errors import ConfigError, EstimatorError
from .geometry import SIGNAL, STRIP_NAMES, DetectorGeometry
from .ensemble import FrameStack

AXIS_NAMES = ("freq", "radial")

# Local maxima with less absolute prominence than this (in g2bar units,
# whose single-mode ceiling is 1) are treated as noise.
PEAK_PROMINENCE = 0.02
SMOOTH_WINDOW = 3


@dataclass(frozen=True)
class GroupingSpec:
    """Pixel grouping along one strip axis before the W sum."""

    size: int = 1
    axis: str = "freq"

    def __post_init__(self):
        if self.size < 1:
            raise ConfigError(f"group size must be >= 1, got {self.size}")
        if self.axis not in AXIS_NAMES:
            raise ConfigError(f"axis must be one of {AXIS_NAMES}, got {self.axis!r}")


@dataclass
class G2Map:
    """Per-cell g2bar estimates with their local mode numbers.

    mode_numbers holds 1/g2bar wherever g2bar > 0 and NaN elsewhere.
    stderr_method documents the error estimate ("delta": first-order
    propagation through the moment ratio).
    """

    values: np.ndarray
    stderr: np.ndarray
    grouping: GroupingSpec
    shots: int
    window: tuple
    row_coords: np.ndarray
    col_coords: np.ndarray
    valid: np.ndarray | None = None
    stderr_method: str = "delta"

    @property
    def mode_numbers(self) -> np.ndarray:
        out = np.full_like(self.values, np.nan)
        pos = self.values > 0
        out[pos] = 1.0 / self.values[pos]
        return out


@dataclass
class CorrelationProfile:
    """Normalized intensity correlation vs lag, in physical axis units."""

    lag: np.ndarray
    value: np.ndarray
    axis: str

    def __post_init__(self):
        zero = int(np.argmin(np.abs(self.lag)))
        if not np.isclose(self.value[zero], 1.0):
            raise ConfigError("correlation profile must be normalized to 1 at zero lag")
        if not np.all(np.isfinite(self.value)):
            raise ConfigError("correlation profile contains non-finite values")


def _moments(samples: np.ndarray, axis: int = 0):
    n = samples.shape[axis]
    mean = samples.mean(axis=axis)
    d = samples - np.expand_dims(mean, axis)
    mu2 = np.mean(d**2, axis=axis)
    mu3 = np.mean(d**3, axis=axis)
    mu4 = np.mean(d**4, axis=axis)
    var_unbiased = mu2 * n / (n - 1)
    return n, mean, var_unbiased, mu2, mu3, mu4


def _g2_and_stderr(samples: np.ndarray, axis: int = 0):
    n, mean, var, mu2, mu3, mu4 = _moments(samples, axis)
    g2 = var / mean**2
    # First-order (delta-method) variance of var/mean^2 from the sample
    # central moments; see any propagation-of-moments reference.
    se2 = (
        (mu4 - mu2**2) / mean**4
        + 4.0 * mu2**3 / mean**6
        - 4.0 * mu2 * mu3 / mean**5
    )
    se = np.sqrt(np.maximum(se2, 0.0) / n)
    return g2, se


def g2bar(samples) -> tuple:
    """Normalized fluctuation variance of a sample set, with standard error.

    Uses the unbiased (n-1) variance.  Requires at least two samples and a
    positive mean.  Constant samples give (0.0, 0.0).
    """
    w = np.asarray(samples, dtype=float)
    if w.ndim != 1:
        raise ConfigError("g2bar expects a 1-D sample vector")
    if w.size < 2:
        raise EstimatorError(f"need >= 2 samples, got {w.size}")
    mean = w.mean()
    if not mean > 0:
        raise EstimatorError(f"sample mean must be > 0, got {mean}")
    if np.all(w == w[0]):
        return 0.0, 0.0
    g2, se = _g2_and_stderr(w)
    return float(g2), float(se)


def _window_or_full(stack: FrameStack, window):
    nr, nc = stack.geometry.n_radial, stack.geometry.n_wavelength
    if window is None:
        return (0, nr, 0, nc)
    r0, r1, c0, c1 = window
    if not (0 <= r0 < r1 <= nr and 0 <= c0 < c1 <= nc):
        raise ConfigError(f"window {window} outside strip {nr}x{nc}")
    return (r0, r1, c0, c1)


def _resolve_strip(strip) -> int:
    if isinstance(strip, str):
        try:
            return STRIP_NAMES[strip]
        except KeyError:
            raise ConfigError(f"unknown strip {strip!r}") from None
    return int(strip)


def g2bar_map(
    stack: FrameStack,
    grouping: GroupingSpec = GroupingSpec(),
    window=None,
    strip=SIGNAL,
) -> G2Map:
    """Per-cell g2bar across shots, after summing grouped pixel intensities.

    The group size must tile the analyzed window along the grouping axis.
    """
    strip = _resolve_strip(strip)
    r0, r1, c0, c1 = _window_or_full(stack, window)
    data = stack.strip(strip)[:, r0:r1, c0:c1]
    shots = data.shape[0]
    if shots < 2:
        raise EstimatorError("need >= 2 shots for a g2bar map")
    g = grouping.size
    if grouping.axis == "freq":
        if (c1 - c0) % g:
            raise ConfigError(f"group size {g} does not tile window columns {c1 - c0}")
        grouped = data.reshape(shots, r1 - r0, (c1 - c0) // g, g).sum(axis=3)
        rows = stack.geometry.radial_axis()[r0:r1]
        cols = stack.geometry.wavelength_axis()[c0:c1].reshape(-1, g).mean(axis=1)
    else:
        if (r1 - r0) % g:
            raise ConfigError(f"group size {g} does not tile window rows {r1 - r0}")
        grouped = data.reshape(shots, (r1 - r0) // g, g, c1 - c0).sum(axis=2)
        rows = stack.geometry.radial_axis()[r0:r1].reshape(-1, g).mean(axis=1)
        cols = stack.geometry.wavelength_axis()[c0:c1]
    mean = grouped.mean(axis=0)
    if np.any(mean <= 0):
        raise EstimatorError("zero-mean cells inside the analysis window")
    values, stderr = _g2_and_stderr(grouped)
    return G2Map(
        values=values,
        stderr=stderr,
        grouping=grouping,
        shots=shots,
        window=(r0, r1, c0, c1),
        row_coords=rows,
        col_coords=cols,
    )


def central_radial_profile(
    stack: FrameStack,
    n_columns: int = 9,
    strip=SIGNAL,
    floor_frac: float = 0.12,
) -> G2Map:
    """Radial g2bar profile at the central frequency.

    Per-pixel g2bar estimates of the n_columns wavelength columns around
    degeneracy are averaged (an estimator-variance reduction, not an
    intensity grouping).  Cells whose mean intensity falls below
    floor_frac of the profile maximum are flagged invalid; they are
    vacuum-floor dominated rather than beam.
    """
    strip = _resolve_strip(strip)
    geom = stack.geometry
    c_center = geom.center_pixel[1]
    c0 = c_center - n_columns // 2
    window = (0, geom.n_radial, c0, c0 + n_columns)
    data = stack.strip(strip)[:, :, c0 : c0 + n_columns]
    values, stderr = _g2_and_stderr(data)
    prof = values.mean(axis=1)
    prof_se = np.sqrt((stderr**2).sum(axis=1)) / n_columns
    mean_i = data.mean(axis=(0, 2))
    valid = mean_i >= floor_frac * mean_i.max()
    return G2Map(
        values=prof,
        stderr=prof_se,
        grouping=GroupingSpec(1, "radial"),
        shots=stack.shots,
        window=window,
        row_coords=geom.radial_axis(),
        col_coords=geom.wavelength_axis()[c0 : c0 + n_columns],
        valid=valid,
        stderr_method="delta, averaged over central columns",
    )


def autocorrelation_profile(
    stack: FrameStack,
    axis: str,
    anchor: int | None = None,
    window=None,
    strip=SIGNAL,
) -> CorrelationProfile:
    """Normalized intensity autocorrelation along one strip axis.

    C(d) averages dI(x) * dI(x+d) over shots and over positions x inside
    the window, then is normalized to C(0) = 1.  The default window is
    the central half of the axis, where the beam is closest to
    stationary; the default anchor is the central row or column.
    """
    strip = _resolve_strip(strip)
    if axis not in AXIS_NAMES:
        raise ConfigError(f"axis must be one of {AXIS_NAMES}, got {axis!r}")
    geom = stack.geometry
    if axis == "freq":
        anchor = geom.center_pixel[0] if anchor is None else anchor
        line = stack.strip(strip)[:, anchor, :]
        pitch = geom.pitch_nm
        tag = "omega"
    else:
        anchor = geom.center_pixel[1] if anchor is None else anchor
        line = stack.strip(strip)[:, :, anchor]
        pitch = geom.pitch_mrad
        tag = "k"
    n = line.shape[1]
    if window is None:
        window = (n // 4, n - n // 4)
    w0, w1 = window
    if not (0 <= w0 < w1 <= n) or w1 - w0 < 2:
        raise ConfigError(f"degenerate correlation window {window}")
    x = line[:, w0:w1]
    dx = x - x.mean(axis=0)
    width = w1 - w0
    c = np.empty(width)
    for d in range(width):
        c[d] = np.mean(dx[:, : width - d] * dx[:, d:])
    if not c[0] > 0:
        raise EstimatorError("zero variance inside the correlation window")
    c /= c[0]
    lag = np.concatenate([-np.arange(width - 1, 0, -1), np.arange(width)]) * pitch
    value = np.concatenate([c[-1:0:-1], c])
    return CorrelationProfile(lag=lag, value=value, axis=tag)


def fwhm(profile: CorrelationProfile) -> float:
    """Full width at half maximum by linear interpolation of the crossings.

    The profile peak must sit at zero lag.  Raises if either side never
    crosses half maximum inside the lag range.
    """
    zero = int(np.argmin(np.abs(profile.lag)))
    if profile.value[zero] < np.max(profile.value) - 1e-12:
        raise EstimatorError("profile peak is not at zero lag")
    half = 0.5 * profile.value[zero]

    def crossing(values, lags):
        below = np.nonzero(values < half)[0]
        if below.size == 0:
            raise EstimatorError("no half-maximum crossing inside the lag range")
        i = below[0]
        if i == 0:
            return lags[0]
        x0, x1 = lags[i - 1], lags[i]
        y0, y1 = values[i - 1], values[i]
        return x0 + (half - y0) * (x1 - x0) / (y1 - y0)

    right = crossing(profile.value[zero:], profile.lag[zero:])
    left = crossing(profile.value[zero::-1], -profile.lag[zero::-1])
    return float(right + left)


def _normalized_cross_map(stack: FrameStack, signal_pixel):
    r, c = signal_pixel
    ws = stack.signal[:, r, c]
    if not ws.var() > 0:
        raise EstimatorError("zero variance at the anchor pixel")
    dws = ws - ws.mean()
    idler = stack.idler
    di = idler - idler.mean(axis=0)
    cov = np.einsum("s,skw->kw", dws, di) / stack.shots
    sig_i = di.std(axis=0)
    sig_s = dws.std()
    rho = cov / (sig_s * np.maximum(sig_i, 1e-300))
    return rho


def _box3(a: np.ndarray) -> np.ndarray:
    """3x3 box mean with shrinking windows at the borders."""
    acc = np.zeros_like(a)
    cnt = np.zeros_like(a)
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            acc[
                max(0, dr) : a.shape[0] + min(0, dr),
                max(0, dc) : a.shape[1] + min(0, dc),
            ] += a[
                max(0, -dr) : a.shape[0] + min(0, -dr),
                max(0, -dc) : a.shape[1] + min(0, -dc),
            ]
            cnt[
                max(0, dr) : a.shape[0] + min(0, dr),
                max(0, dc) : a.shape[1] + min(0, dc),
            ] += 1
    return acc / cnt


def cross_correlation_contrast(stack: FrameStack, signal_pixel, idler_pixel) -> float:
    """Pairing contrast of one signal pixel against one idler location.

    Contrast is the 3x3-smoothed normalized covariance at the location,
    divided by the median magnitude of the unsmoothed map over the strip.
    Unpaired stacks give values of order one; paired twin beams give
    large values at the mirrored pixel.
    """
    rho = _normalized_cross_map(stack, signal_pixel)
    smoothed = _box3(rho)
    background = float(np.median(np.abs(rho)))
    if background == 0:
        raise EstimatorError("degenerate cross-correlation background")
    r, c = idler_pixel
    return float(smoothed[r, c] / background)


def cross_correlation_peak(stack: FrameStack, signal_pixel):
    """Locate the idler pixel most correlated with one signal pixel.

    Returns ((row, col), contrast).  For ideal anti-correlated mapping the
    peak sits at the mirrored coordinates.
    """
    rho = _normalized_cross_map(stack, signal_pixel)
    loc = np.unravel_index(int(np.argmax(rho)), rho.shape)
    return (int(loc[0]), int(loc[1])), cross_correlation_contrast(stack, signal_pixel, loc)


def shift_idler_shots(stack: FrameStack, offset: int = 1) -> FrameStack:
    """Control stack pairing signal shot j with idler shot j+offset.

    Destroys the twin-beam pairing while keeping both marginals intact.
    """
    frames = stack.frames.copy()
    frames[:, 1] = np.roll(frames[:, 1], -offset, axis=0)
    meta = dict(stack.meta)
    meta["idler_shot_offset"] = offset
    return FrameStack(frames=frames, geometry=stack.geometry, meta=meta)


def moving_average(values: np.ndarray, window: int = SMOOTH_WINDOW) -> np.ndarray:
    """Centered moving average with edge values kept as-is."""
    if window != 3:
        kernel = np.ones(window) / window
        return np.convolve(values, kernel, mode="same")
    out = values.copy()
    out[1:-1] = (values[:-2] + values[1:-1] + values[2:]) / 3.0
    return out


def profile_maxima(profile: G2Map, geometry: DetectorGeometry):
    """Local maxima of a radial g2bar profile in normalized k units.

    The profile is smoothed with a window-3 moving average, restricted to
    its valid (beam-populated) cells, and scanned for local maxima;
    maxima with absolute prominence below PEAK_PROMINENCE are discarded.
    Returns a list of (k_over_k0, value) pairs.
    """
    values = profile.values
    valid = profile.valid if profile.valid is not None else np.ones(values.size, bool)
    idx = np.nonzero(valid)[0]
    if idx.size < 3:
        raise EstimatorError("profile window too small for maxima search")
    sm = moving_average(values)
    seg = sm[idx[0] : idx[-1] + 1]
    peaks, _ = find_peaks(seg, prominence=PEAK_PROMINENCE)
    k0 = geometry.radial_center_mrad
    kax = profile.row_coords
    out = [(float(kax[idx[0] + p] / k0), float(seg[p])) for p in peaks]
    if not out:
        raise EstimatorError("no maxima found (flat profile)")
    return out


def wave_trajectory(profiles, geometry: DetectorGeometry):
    """Positions of local-coherence maxima per pump power.

    profiles: sequence of (power, G2Map) radial profiles sharing the
    geometry.  Returns a list of (power, positions) with positions in
    units of the cone-center radial wave vector.  One maximum is expected
    below the splitting threshold, two above it.
    """
    if len(profiles) < 3:
        raise ConfigError("need >= 3 power points for a trajectory")
    sizes = {p.values.size for _, p in profiles}
    if len(sizes) != 1:
        raise ConfigError("profiles do not share a geometry")
    out = []
    for power, prof in sorted(profiles, key=lambda t: t[0]):
        maxima = profile_maxima(prof, geometry)
        out.append((float(power), [pos for pos, _ in maxima]))
    return out
