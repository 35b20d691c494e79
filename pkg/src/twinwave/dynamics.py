"""Classical three-wave-mixing dynamics of a single mode triplet.

A triplet couples one pump, one signal and one idler amplitude through

    da_s/dz =  K a_p conj(a_i)
    da_i/dz =  K a_p conj(a_s)
    da_p/dz = -K a_s a_i

in sqrt-photon units along the crystal coordinate z.  The flow conserves
the Manley-Rowe quantities |a_p|^2 + |a_s|^2, |a_p|^2 + |a_i|^2 and
|a_s|^2 - |a_i|^2 exactly; the fixed-step fourth-order integrator below
is tested against that conservation and against the linearized
(frozen-pump) gain law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, IntegrationError

# Hard validity bound on K * max|a| * dz for one step; beyond it the
# fixed-step scheme is not trusted at all.
MAX_STEP_PRODUCT = 1e-2
# Default target used when the caller does not pick dz.  Finer than the
# hard bound so Manley-Rowe drift stays below 1e-9 per unit z.
DEFAULT_STEP_PRODUCT = 4e-3
DEFAULT_STEPS = 400


@dataclass(frozen=True)
class TripletState:
    """Complex pump/signal/idler amplitudes in sqrt-photon units."""

    a_p: complex
    a_s: complex
    a_i: complex

    @property
    def photon_numbers(self):
        """(N_p, N_s, N_i) = squared moduli."""
        return (abs(self.a_p) ** 2, abs(self.a_s) ** 2, abs(self.a_i) ** 2)

    def is_finite(self) -> bool:
        return all(
            math.isfinite(v.real) and math.isfinite(v.imag)
            for v in (self.a_p, self.a_s, self.a_i)
        )


def manley_rowe(state: TripletState):
    """The three conserved photon-number combinations of exact dynamics."""
    n_p, n_s, n_i = state.photon_numbers
    return (n_p + n_s, n_p + n_i, n_s - n_i)


def derivative(state: TripletState, K: float) -> TripletState:
    """Right-hand side of the triplet equations as a TripletState-valued rate."""
    return TripletState(
        a_p=-K * state.a_s * state.a_i,
        a_s=K * state.a_p * state.a_i.conjugate(),
        a_i=K * state.a_p * state.a_s.conjugate(),
    )


def amplitude_bound(state: TripletState) -> float:
    """Upper bound on max(|a_p|, |a_s|, |a_i|) along the whole trajectory.

    Follows from the conservation laws: no amplitude can exceed
    sqrt(N_p(0) + max(N_s(0), N_i(0))).
    """
    n_p, n_s, n_i = state.photon_numbers
    return math.sqrt(n_p + max(n_s, n_i))


@dataclass(frozen=True)
class Trajectory:
    """Ordered (z, state) samples of one integration, first sample at z = 0."""

    z: np.ndarray
    states: np.ndarray  # (n, 3) complex: columns a_p, a_s, a_i

    def __post_init__(self):
        if self.z[0] != 0.0:
            raise ConfigError("trajectory must start at z = 0")
        if np.any(np.diff(self.z) <= 0):
            raise ConfigError("trajectory z samples must be strictly increasing")
        if self.states.shape != (self.z.size, 3):
            raise ConfigError("trajectory state array shape mismatch")

    @property
    def final(self) -> TripletState:
        p, s, i = self.states[-1]
        return TripletState(a_p=complex(p), a_s=complex(s), a_i=complex(i))

    def photon_numbers(self) -> np.ndarray:
        """(n, 3) array of N_p, N_s, N_i along the trajectory."""
        return np.abs(self.states) ** 2

    def state_at(self, index: int) -> TripletState:
        p, s, i = self.states[index]
        return TripletState(a_p=complex(p), a_s=complex(s), a_i=complex(i))


def integrate(
    state0: TripletState,
    K: float,
    z_end: float,
    dz: float | None = None,
) -> Trajectory:
    """Propagate one triplet from z = 0 to z_end with fixed-step RK4.

    When dz is omitted it defaults to z_end/400, refined if necessary so
    that K * max|a| * dz <= 4e-3.  Any caller-supplied dz must satisfy the
    hard precondition K * max|a| * dz <= 1e-2, where max|a| is the
    conservation-law bound from the initial state.

    Raises
    ------
    IntegrationError
        If the step-size precondition is violated or the state leaves the
        finite range.
    """
    if K < 0:
        raise ConfigError(f"coupling must be >= 0, got {K}")
    if not z_end > 0:
        raise ConfigError(f"z_end must be > 0, got {z_end}")
    if not state0.is_finite():
        raise IntegrationError("non-finite initial state")

    bound = amplitude_bound(state0)
    if dz is None:
        n_steps = DEFAULT_STEPS
        if K * bound > 0:
            n_steps = max(n_steps, int(math.ceil(K * bound * z_end / DEFAULT_STEP_PRODUCT)))
        dz = z_end / n_steps
    else:
        if not dz > 0:
            raise ConfigError(f"dz must be > 0, got {dz}")
        if K * bound * dz > MAX_STEP_PRODUCT * (1.0 + 1e-12):
            raise IntegrationError(
                f"step-size precondition violated: K*max|a|*dz = {K * bound * dz:.3g} > "
                f"{MAX_STEP_PRODUCT:g}"
            )
        n_steps = int(math.ceil(z_end / dz - 1e-12))

    z = np.empty(n_steps + 1)
    states = np.empty((n_steps + 1, 3), dtype=complex)
    z[0] = 0.0
    p, s, i = complex(state0.a_p), complex(state0.a_s), complex(state0.a_i)
    states[0] = (p, s, i)
    h = z_end / n_steps
    for n in range(n_steps):
        k1s = K * p * i.conjugate()
        k1i = K * p * s.conjugate()
        k1p = -K * s * i
        s2 = s + 0.5 * h * k1s
        i2 = i + 0.5 * h * k1i
        p2 = p + 0.5 * h * k1p
        k2s = K * p2 * i2.conjugate()
        k2i = K * p2 * s2.conjugate()
        k2p = -K * s2 * i2
        s3 = s + 0.5 * h * k2s
        i3 = i + 0.5 * h * k2i
        p3 = p + 0.5 * h * k2p
        k3s = K * p3 * i3.conjugate()
        k3i = K * p3 * s3.conjugate()
        k3p = -K * s3 * i3
        s4 = s + h * k3s
        i4 = i + h * k3i
        p4 = p + h * k3p
        k4s = K * p4 * i4.conjugate()
        k4i = K * p4 * s4.conjugate()
        k4p = -K * s4 * i4
        s = s + (h / 6.0) * (k1s + 2.0 * (k2s + k3s) + k4s)
        i = i + (h / 6.0) * (k1i + 2.0 * (k2i + k3i) + k4i)
        p = p + (h / 6.0) * (k1p + 2.0 * (k2p + k3p) + k4p)
        z[n + 1] = (n + 1) * h
        states[n + 1] = (p, s, i)
    if not np.all(np.isfinite(states.view(float))):
        raise IntegrationError("non-finite state encountered during integration")
    return Trajectory(z=z, states=states)


def linearized_gain_mean(K: float, pump_amp: float, z: float) -> float:
    """Expected signal photon number sinh^2(K*pump_amp*z) for a frozen pump.

    This is the vacuum-seeded linearized solution: the ensemble mean of
    N_s minus the symmetric-ordering offset 1/2.  Used as a test oracle
    only; the production path always integrates the full equations.
    """
    if z < 0:
        raise ConfigError(f"z must be >= 0, got {z}")
    return math.sinh(K * pump_amp * z) ** 2


def trajectory_to_rows(traj: Trajectory):
    """CSV-ready rows: z, Re/Im of the three amplitudes, photon numbers."""
    numbers = traj.photon_numbers()
    rows = []
    for n in range(traj.z.size):
        p, s, i = traj.states[n]
        rows.append(
            (
                traj.z[n],
                p.real, p.imag, s.real, s.imag, i.real, i.imag,
                numbers[n, 0], numbers[n, 1], numbers[n, 2],
            )
        )
    return rows


TRAJECTORY_COLUMNS = (
    "z",
    "re_a_p", "im_a_p", "re_a_s", "im_a_s", "re_a_i", "im_a_i",
    "n_p", "n_s", "n_i",
)
