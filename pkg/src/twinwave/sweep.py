"""Pump-power sweeps: calibration, per-power analysis, aggregated outputs.

A sweep simulates the ensemble at each power, measures the local-coherence
observables at the beam center and along the radial profile, and writes
power-resolved CSV tables plus grayscale heatmaps.  The default power grid
first calibrates the splitting threshold (the power of maximal central
coherence) with a coarse low-shot probe, then spans 0.2 to 2 times that
power linearly.
"""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass

import numpy as np

from .errors import NumericError
from .ensemble import RunConfig, run_ensemble
from .stats import (
    GroupingSpec,
    autocorrelation_profile,
    central_radial_profile,
    fwhm,
    g2bar_map,
    profile_maxima,
    wave_trajectory,
)
from . import io as twio

GROUP_SIZES = (1, 4, 8)
PROBE_SPAN = (0.3, 3.0)
PROBE_POINTS = 8
PROBE_SHOTS = 300
SWEEP_SPAN = (0.2, 2.0)
SWEEP_POINTS = 10


@dataclass
class SweepPoint:
    """Per-power measurements at the beam center and along the radial axis."""

    power_mw: float
    g2_center: float
    g2_center_se: float
    g2_center_pixel: float
    g2_center_pixel_se: float
    fwhm_omega_nm: float
    fwhm_radial_mrad: float
    grouped: dict  # (axis, size) -> (g2, stderr)
    profile: object  # G2Map radial profile at central frequency
    maxima: list  # [(k_over_k0, value)]


@dataclass
class SweepResult:
    points: list
    threshold_power_mw: float
    config: RunConfig
    wall_seconds: float = 0.0
    out_dir: object = None

    @property
    def powers(self):
        return np.array([p.power_mw for p in self.points])

    @property
    def g2_center(self):
        return np.array([p.g2_center for p in self.points])

    def trajectory(self):
        geometry = self.config.geometry
        profs = [(p.power_mw, p.profile) for p in self.points]
        return wave_trajectory(profs, geometry)


def _center_groupings(stack):
    geom = stack.geometry
    r_c, c_c = geom.center_pixel
    out = {}
    for axis in ("freq", "radial"):
        for size in GROUP_SIZES:
            if axis == "freq":
                c0 = c_c - size // 2
                window = (r_c, r_c + 1, c0, c0 + size)
            else:
                r0 = r_c - size // 2
                window = (r0, r0 + size, c_c, c_c + 1)
            m = g2bar_map(stack, GroupingSpec(size, axis), window=window)
            out[(axis, size)] = (float(m.values.ravel()[0]), float(m.stderr.ravel()[0]))
    return out


def analyze_stack(stack, power_mw: float) -> SweepPoint:
    """All per-power observables of one frame stack."""
    profile = central_radial_profile(stack)
    geom = stack.geometry
    r_c, c_c = geom.center_pixel
    g2_center = float(profile.values[r_c])
    g2_center_se = float(profile.stderr[r_c])
    pixel_map = g2bar_map(stack, GroupingSpec(1, "freq"), window=(r_c, r_c + 1, c_c, c_c + 1))
    try:
        fw = fwhm(autocorrelation_profile(stack, "freq"))
    except NumericError:
        fw = float("nan")
    try:
        fk = fwhm(autocorrelation_profile(stack, "radial"))
    except NumericError:
        fk = float("nan")
    try:
        maxima = profile_maxima(profile, geom)
    except NumericError:
        maxima = []
    return SweepPoint(
        power_mw=power_mw,
        g2_center=g2_center,
        g2_center_se=g2_center_se,
        g2_center_pixel=float(pixel_map.values.ravel()[0]),
        g2_center_pixel_se=float(pixel_map.stderr.ravel()[0]),
        fwhm_omega_nm=fw,
        fwhm_radial_mrad=fk,
        grouped=_center_groupings(stack),
        profile=profile,
        maxima=maxima,
    )


def calibrate_threshold(
    cfg: RunConfig,
    workers=None,
    probe_shots: int = PROBE_SHOTS,
    probe_points: int = PROBE_POINTS,
    span=PROBE_SPAN,
    progress: bool = False,
) -> float:
    """Locate the power of maximal central coherence with a coarse probe.

    Runs a low-shot geometric power scan around the configured power and
    returns the first interior local maximum of the central g2bar curve
    (the global maximum if the curve never turns over).
    """
    from dataclasses import replace

    powers = cfg.pump.power_mw * np.geomspace(span[0], span[1], probe_points)
    probe_cfg = replace(cfg, shots=probe_shots)
    values = []
    for p in powers:
        stack = run_ensemble(probe_cfg.with_power(float(p)), workers=workers)
        prof = central_radial_profile(stack)
        values.append(float(prof.values[stack.geometry.center_pixel[0]]))
        if progress:
            print(f"[calibrate] P = {p:8.3f} mW  g2_center = {values[-1]:.3f}", file=sys.stderr)
    # smooth the shot-noise before picking the turnover; the later revival
    # of the strongest triplet can raise the far end again, so take the
    # first interior local maximum rather than the global one
    from .stats import moving_average

    values = moving_average(np.array(values))
    for i in range(1, probe_points - 1):
        if values[i] > values[i - 1] and values[i] >= values[i + 1]:
            return float(powers[i])
    return float(powers[int(np.argmax(values))])


def default_power_grid(cfg: RunConfig, workers=None, progress: bool = False):
    """Calibrated linear grid spanning 0.2 to 2 times the threshold power."""
    p_star = calibrate_threshold(cfg, workers=workers, progress=progress)
    return p_star, np.linspace(SWEEP_SPAN[0], SWEEP_SPAN[1], SWEEP_POINTS) * p_star


def run_sweep(
    cfg: RunConfig,
    powers=None,
    out_dir=None,
    workers=None,
    progress: bool = False,
    keep_stacks: bool = False,
) -> SweepResult:
    """Simulate and analyze the ensemble across a list of pump powers.

    powers=None calibrates the threshold first and uses the default grid.
    When out_dir is given, writes per-point and aggregate CSV/PGM outputs
    plus a checksum manifest; partially completed sweeps still leave their
    finished points and a manifest marked incomplete.
    """
    started = time.time()
    if powers is None:
        threshold, powers = default_power_grid(cfg, workers=workers, progress=progress)
    else:
        powers = np.asarray(sorted(float(p) for p in powers))
        threshold = float("nan")
    points = []
    failure = None
    try:
        for i, p in enumerate(powers):
            stack = run_ensemble(cfg.with_power(float(p)), workers=workers)
            point = analyze_stack(stack, float(p))
            points.append(point)
            if out_dir is not None:
                _write_point(out_dir, i, point, stack, keep_stacks)
            if progress:
                pk = ", ".join(f"{pos:.2f}" for pos, _ in point.maxima)
                print(
                    f"[sweep {i + 1}/{powers.size}] P = {p:8.3f} mW  "
                    f"g2_center = {point.g2_center:.3f}  maxima at k/k0 = [{pk}]",
                    file=sys.stderr,
                )
    except Exception as exc:
        failure = exc
    if np.isnan(threshold) and points:
        threshold = float(points[int(np.argmax([pt.g2_center for pt in points]))].power_mw)
    result = SweepResult(
        points=points,
        threshold_power_mw=threshold,
        config=cfg,
        wall_seconds=time.time() - started,
        out_dir=out_dir,
    )
    if out_dir is not None and points:
        _write_aggregates(out_dir, result)
        from .ensemble import RNG_ALGORITHM

        twio.write_manifest(
            out_dir,
            cfg.echo,
            cfg.master_seed,
            RNG_ALGORITHM,
            started,
            extra={
                "threshold_power_mw": threshold,
                "complete": failure is None,
                "points_done": len(points),
                "points_requested": int(powers.size),
            },
        )
    if failure is not None:
        raise failure
    return result


def _write_point(out_dir, index, point, stack, keep_stacks):
    from pathlib import Path

    pdir = Path(out_dir) / f"point_{index:02d}"
    pdir.mkdir(parents=True, exist_ok=True)
    if keep_stacks:
        twio.save_frames(stack, pdir / "frames")
    full = g2bar_map(stack)
    twio.write_csv(
        pdir / "g2_map.csv",
        ("radial_mrad", "wavelength_nm", "g2bar", "stderr", "m_g"),
        twio.g2map_rows(full),
        units={"power_mw": point.power_mw},
    )
    twio.write_pgm(full.values, pdir / "g2_map.pgm")
    prof = point.profile
    twio.write_csv(
        pdir / "radial_profile.csv",
        ("radial_mrad", "g2bar", "stderr", "in_window"),
        [
            (float(prof.row_coords[i]), float(prof.values[i]), float(prof.stderr[i]), int(prof.valid[i]))
            for i in range(prof.values.size)
        ],
        units={"power_mw": point.power_mw},
    )


def _write_aggregates(out_dir, result: SweepResult):
    from pathlib import Path

    out = Path(out_dir)
    rows = []
    for pt in result.points:
        row = [
            pt.power_mw,
            pt.g2_center,
            pt.g2_center_se,
            pt.g2_center_pixel,
            pt.g2_center_pixel_se,
            pt.fwhm_omega_nm,
            pt.fwhm_radial_mrad,
        ]
        for axis in ("freq", "radial"):
            for size in GROUP_SIZES:
                g2, se = pt.grouped[(axis, size)]
                row.extend([g2, se])
        rows.append(tuple(row))
    columns = [
        "power_mw",
        "g2_center",
        "g2_center_se",
        "g2_center_pixel",
        "g2_center_pixel_se",
        "fwhm_omega_nm",
        "fwhm_radial_mrad",
    ]
    for axis in ("freq", "radial"):
        for size in GROUP_SIZES:
            columns.extend([f"g2_{axis}_g{size}", f"g2_{axis}_g{size}_se"])
    twio.write_csv(
        out / "curves.csv",
        tuple(columns),
        rows,
        units={"power": "mW", "fwhm_omega": "nm", "fwhm_radial": "mrad"},
    )
    traj_rows = []
    for pt in result.points:
        for pos, value in pt.maxima:
            traj_rows.append((pt.power_mw, pos, value))
    twio.write_csv(
        out / "trajectory.csv",
        ("power_mw", "k_over_k0", "g2bar"),
        traj_rows,
        units={"power": "mW", "position": "normalized radial wave vector"},
    )
    surface = np.stack([pt.profile.values for pt in result.points])
    twio.write_pgm(surface, out / "g2_radial_vs_power.pgm")
    twio.write_csv(
        out / "g2_radial_vs_power.csv",
        ("power_mw", "radial_mrad", "g2bar"),
        [
            (pt.power_mw, float(pt.profile.row_coords[i]), float(pt.profile.values[i]))
            for pt in result.points
            for i in range(pt.profile.values.size)
        ],
        units={"power": "mW", "radial": "mrad"},
    )
