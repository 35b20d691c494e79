import math

import numpy as np
import pytest

from twinwave.errors import ConfigError, IntegrationError
from twinwave.dynamics import (
    TripletState,
    amplitude_bound,
    derivative,
    integrate,
    linearized_gain_mean,
    manley_rowe,
)


def random_state(rng, pump_scale=1e3):
    phases = rng.uniform(0, 2 * np.pi, size=3)
    return TripletState(
        a_p=pump_scale * rng.uniform(0.1, 1.0) * np.exp(1j * phases[0]),
        a_s=rng.uniform(0.1, 2.0) * np.exp(1j * phases[1]),
        a_i=rng.uniform(0.1, 2.0) * np.exp(1j * phases[2]),
    )


class TestDerivative:
    def test_zero_coupling_gives_zero_rate(self):
        state = TripletState(3.0 + 0j, 1.0 + 1j, 0.5 - 0.2j)
        rate = derivative(state, 0.0)
        assert rate.a_p == rate.a_s == rate.a_i == 0.0

    def test_unseeded_pump_is_stationary(self):
        rate = derivative(TripletState(5.0 + 0j, 0.0j, 0.0j), 0.3)
        assert rate.a_p == 0.0

    def test_real_positive_amplitudes_deplete_pump(self):
        state = TripletState(10.0 + 0j, 1.0 + 0j, 2.0 + 0j)
        rate = derivative(state, 0.7)
        # d|a_p|^2/dz = 2 Re(conj(a_p) da_p/dz) < 0
        assert 2 * (state.a_p.conjugate() * rate.a_p).real < 0


class TestIntegrate:
    def test_zero_coupling_returns_initial_state(self):
        state = TripletState(4.0 + 1j, 0.3 - 0.2j, 0.1 + 0.9j)
        traj = integrate(state, 0.0, z_end=3.0)
        assert traj.final.a_p == state.a_p
        assert traj.final.a_s == state.a_s
        assert traj.final.a_i == state.a_i

    def test_trajectory_structure(self):
        traj = integrate(TripletState(10.0 + 0j, 1, 1), 0.05, z_end=2.0)
        assert traj.z[0] == 0.0
        assert np.all(np.diff(traj.z) > 0)
        assert traj.z[-1] == pytest.approx(2.0)

    def test_manley_rowe_conservation_random_triplets(self, rng):
        # All three invariants drift below 1e-9 relative per unit z.
        for _ in range(30):
            state = random_state(rng, pump_scale=10 ** rng.uniform(0.5, 2.5))
            K = 10 ** rng.uniform(-2, 0)
            z_end = rng.uniform(0.5, 2.0) * 6.0 / (K * amplitude_bound(state))
            traj = integrate(state, K, z_end)
            start = np.array(manley_rowe(state))
            end = np.array(manley_rowe(traj.final))
            scale = abs(state.a_p) ** 2
            drift = np.max(np.abs(end - start)) / scale / z_end
            assert drift <= 1e-9

    def test_signal_idler_difference_is_exact_constant(self, rng):
        state = random_state(rng)
        traj = integrate(state, 0.02, z_end=4.0)
        numbers = traj.photon_numbers()
        diff = numbers[:, 1] - numbers[:, 2]
        scale = max(1.0, abs(diff[0]))
        assert np.max(np.abs(diff - diff[0])) / scale <= 1e-9 * traj.z[-1] + 1e-12

    def test_fourth_order_convergence(self):
        # Halving dz shrinks the final-state change by ~2^4 over >= 3
        # refinements.  A long multi-conversion-cycle trajectory keeps the
        # truncation error well above the floating-point floor while every
        # refinement respects the step-product bound.
        state = TripletState(100.0 + 0j, 1.2 + 0.3j, 0.8 - 0.5j)
        z_end = 2.0
        tau = 8.0  # one full conversion cycle; deeper runs amplify roundoff
        n_base = int(np.ceil(tau / 0.0099))
        K = tau / (amplitude_bound(state) * z_end)
        finals = []
        for n in (n_base, 2 * n_base, 4 * n_base, 8 * n_base, 16 * n_base):
            fin = integrate(state, K, z_end, dz=z_end / n).final
            finals.append(np.array([fin.a_p, fin.a_s, fin.a_i]))
        changes = [np.max(np.abs(finals[i + 1] - finals[i])) for i in range(len(finals) - 1)]
        ratios = [changes[i] / changes[i + 1] for i in range(len(changes) - 1)]
        assert len(ratios) >= 3
        slope = np.log2(np.mean(ratios))
        assert slope == pytest.approx(4.0, abs=0.4)

    def test_phase_covariance(self):
        state = TripletState(50.0 + 0j, 1.0 + 0.5j, -0.3 + 0.8j)
        phi = 1.234
        rotated = TripletState(
            a_p=state.a_p * np.exp(1j * phi),
            a_s=state.a_s * np.exp(1j * phi / 2),
            a_i=state.a_i * np.exp(1j * phi / 2),
        )
        t1 = integrate(state, 0.02, 3.0)
        t2 = integrate(rotated, 0.02, 3.0)
        np.testing.assert_allclose(
            t1.photon_numbers(), t2.photon_numbers(), rtol=1e-9, atol=1e-9
        )

    def test_depletion_and_backflow(self):
        # A classically seeded strong pump fully converts and then revives.
        n_p0 = 1e6
        state = TripletState(math.sqrt(n_p0) + 0j, 1.0 + 0j, 1.0 + 0j)
        K = 1.0
        z_end = 20.0 / math.sqrt(n_p0)
        traj = integrate(state, K, z_end)
        pump = traj.photon_numbers()[:, 0]
        i_min = int(np.argmin(pump))
        assert pump[i_min] < 0.1 * n_p0
        revived = pump[i_min:].max()
        assert revived > 0.5 * n_p0
        # non-monotone: falls, then rises
        assert i_min not in (0, pump.size - 1)

    def test_step_precondition_enforced(self):
        state = TripletState(1e4 + 0j, 1, 1)
        with pytest.raises(IntegrationError):
            integrate(state, 1.0, z_end=1.0, dz=0.01)  # K*max|a|*dz ~ 100

    def test_caller_dz_at_the_bound_is_accepted(self):
        state = TripletState(10.0 + 0j, 0.1, 0.1)
        dz = 0.99e-2 / (1.0 * amplitude_bound(state))
        traj = integrate(state, 1.0, z_end=50 * dz, dz=dz)
        assert traj.z.size == 51

    def test_invalid_inputs(self):
        state = TripletState(1.0, 0.0, 0.0)
        with pytest.raises(ConfigError):
            integrate(state, 0.1, z_end=0.0)
        with pytest.raises(ConfigError):
            integrate(state, -0.1, z_end=1.0)
        with pytest.raises(IntegrationError):
            integrate(TripletState(float("nan"), 0, 0), 0.1, 1.0)


class TestLinearizedGain:
    def test_zero_distance(self):
        assert linearized_gain_mean(0.5, 10.0, 0.0) == 0.0

    def test_unit_gain_value(self):
        assert linearized_gain_mean(1.0, 1.0, 1.0) == pytest.approx(1.3811, abs=2e-4)

    def test_exponential_asymptotics(self):
        x = 12.0
        assert linearized_gain_mean(1.0, 1.0, x) == pytest.approx(
            math.exp(2 * x) / 4, rel=1e-9
        )

    def test_vacuum_ensemble_matches_oracle(self, rng):
        # Frozen pump: huge photon number, coupling scaled so K*a_p*z = 1.
        n_samples = 800
        pump = 1e8
        a_p = math.sqrt(pump)
        K = 1.0 / a_p  # so K * a_p * z = z
        z = 1.0
        n_s = np.empty(n_samples)
        for i in range(n_samples):
            seed = 0.5 * rng.standard_normal(4)
            state = TripletState(
                a_p=a_p + 0j,
                a_s=seed[0] + 1j * seed[1],
                a_i=seed[2] + 1j * seed[3],
            )
            n_s[i] = abs(integrate(state, K, z, dz=z / 128).final.a_s) ** 2
        expected = linearized_gain_mean(K, a_p, z)
        mean = n_s.mean() - 0.5
        stderr = n_s.std(ddof=1) / math.sqrt(n_samples)
        assert abs(mean - expected) <= 3 * stderr
