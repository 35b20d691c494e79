#!/usr/bin/env python3
"""Single mode triplet through the crystal: gain, depletion, back-flow.

A strong classical pump with a weak seed first amplifies the signal and
idler exponentially, then hands essentially all of its energy over, and
finally the flow reverses and the pump revives.  The trajectory CSV
written at the end is the same format the `twinwave triplet` subcommand
produces.
"""

import math

import numpy as np

from twinwave.dynamics import (
    TRAJECTORY_COLUMNS,
    TripletState,
    integrate,
    linearized_gain_mean,
    manley_rowe,
    trajectory_to_rows,
)
from twinwave.io import write_csv

N_PUMP = 1.0e6
COUPLING = 1.0

state = TripletState(a_p=math.sqrt(N_PUMP) + 0j, a_s=1.0 + 0j, a_i=1.0 + 0j)
z_end = 20.0 / math.sqrt(N_PUMP)
traj = integrate(state, COUPLING, z_end)
numbers = traj.photon_numbers()

print(f"pump photons at z=0: {numbers[0, 0]:.3e}")
i_min = int(np.argmin(numbers[:, 0]))
print(f"deepest depletion:   {numbers[i_min, 0]:.3e} at z = {traj.z[i_min]:.4f}")
i_rev = i_min + int(np.argmax(numbers[i_min:, 0]))
print(f"revival:             {numbers[i_rev, 0]:.3e} at z = {traj.z[i_rev]:.4f}")

# early on, this coherently seeded signal grows as exp(2 K a_p z), the
# stimulated branch of the frozen-pump solution (the vacuum-mean law
# sinh^2 is what ensemble averages over random seeds recover)
probe = traj.z.size // 20
tau = COUPLING * math.sqrt(N_PUMP) * traj.z[probe]
print(f"\nearly growth check at z = {traj.z[probe]:.4f} (K a_p z = {tau:.2f}):")
print(f"  integrated N_s = {numbers[probe, 1]:.4f}, exp(2 K a_p z) = {math.exp(2 * tau):.4f}")
print(f"  vacuum-mean oracle sinh^2 = {linearized_gain_mean(COUPLING, math.sqrt(N_PUMP), traj.z[probe]):.4f}")

mr0 = manley_rowe(state)
mr1 = manley_rowe(traj.final)
print("\nconserved quantities (start vs end):")
for name, a, b in zip(("N_p+N_s", "N_p+N_i", "N_s-N_i"), mr0, mr1):
    scale = max(abs(a), 1.0)
    print(f"  {name}: {a:.6e} -> {b:.6e}  (drift {abs(b - a) / scale:.2e})")

write_csv("demo_triplet_trajectory.csv", TRAJECTORY_COLUMNS, trajectory_to_rows(traj))
print("\nwrote demo_triplet_trajectory.csv")
