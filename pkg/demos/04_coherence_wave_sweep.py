#!/usr/bin/env python3
"""The headline effect: coherence maxima split and march outward.

Sweeps the pump power across the splitting threshold with a reduced mode
ladder (fast; a few minutes at full defaults via `twinwave sweep`).
Below threshold the radial g2bar profile at the central frequency has one
maximum at the beam center; at threshold the central coherence peaks; and
beyond it the maximum splits into two that move toward the beam tails
while the center decoheres again.

At this demo's reduced shot count the flat-topped below-threshold
profiles sometimes read as a pair of near-center wiggles; the
acceptance-scale run (2000 shots, full ladder) resolves them into the
single central maximum.  The post-threshold outward march is clear even
here.

Outputs land in demo_sweep/: power-resolved curves, the maxima
trajectory, and PGM heatmaps of the g2bar surface.
"""

import numpy as np

from twinwave.config import default_config
from twinwave.sweep import calibrate_threshold, run_sweep

cfg = default_config(
    **{
        "modes.m_max": 4,
        "modes.l_max": 7,
        "modes.q_max": 7,
        "run.shots": 800,
        "run.master_seed": 4242,
    }
)

# The reduced ladder only reaches so far into the tails, so stop the sweep
# at 1.6x threshold instead of the default 2x.
p_star = calibrate_threshold(cfg, progress=True)
powers = np.linspace(0.2, 1.6, 8) * p_star
result = run_sweep(cfg, powers=powers, out_dir="demo_sweep", progress=True)

print(f"\nthreshold power ~ {result.threshold_power_mw:.2f} mW (probe estimate {p_star:.2f})")
print(f"{'P/P*':>6}  {'g2(center)':>10}  maxima at k/k0")
for pt in result.points:
    rel = pt.power_mw / result.threshold_power_mw
    pos = ", ".join(f"{p:.2f}" for p, _ in pt.maxima)
    print(f"{rel:6.2f}  {pt.g2_center:10.3f}  [{pos}]")

seps = [
    (pt.power_mw, pt.maxima[1][0] - pt.maxima[0][0])
    for pt in result.points
    if len(pt.maxima) == 2
]
if seps:
    print("\nmaxima separation vs power (the outward wave):")
    for p, s in seps:
        print(f"  P = {p:8.2f} mW: separation = {s:.3f} k/k0")
print("\nwrote demo_sweep/ (curves.csv, trajectory.csv, heatmaps)")
