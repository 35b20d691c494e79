"""Hot inner loops of the Monte Carlo engine.

Two kernels dominate the runtime: the fused RK4 propagation of every
(shot, mode) triplet and the far-field strip synthesis.  Both are written
so that each array element (or each shot) is computed independently by
straight-line scalar code; results are therefore bitwise independent of
the number of worker threads.  When numba is unavailable the numpy
fallbacks compute the same quantities, only slower.
"""

from __future__ import annotations

import numpy as np

try:
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAVE_NUMBA = False


def engine_id() -> str:
    """Backend identifier recorded in run metadata."""
    if HAVE_NUMBA:
        return f"numba-{numba.__version__}"
    return f"numpy-{np.__version__}"


def set_worker_threads(workers: int | None):
    """Pin the parallel thread count; results do not depend on it."""
    if HAVE_NUMBA and workers is not None:
        numba.set_num_threads(max(1, int(workers)))


if HAVE_NUMBA:

    @njit(parallel=True, fastmath=True, cache=True)
    def rk4_batch(a_p, a_s, a_i, gain, dz, n_steps):
        """In-place RK4 propagation of flattened triplet amplitude arrays.

        Each element carries its own coupling, step size and step count,
        and is integrated independently in registers.
        """
        n = a_p.shape[0]
        for idx in prange(n):
            p = a_p[idx]
            s = a_s[idx]
            i = a_i[idx]
            g = gain[idx]
            h = dz[idx]
            for _ in range(n_steps[idx]):
                k1s = g * p * np.conj(i)
                k1i = g * p * np.conj(s)
                k1p = -g * s * i
                s2 = s + 0.5 * h * k1s
                i2 = i + 0.5 * h * k1i
                p2 = p + 0.5 * h * k1p
                k2s = g * p2 * np.conj(i2)
                k2i = g * p2 * np.conj(s2)
                k2p = -g * s2 * i2
                s3 = s + 0.5 * h * k2s
                i3 = i + 0.5 * h * k2i
                p3 = p + 0.5 * h * k2p
                k3s = g * p3 * np.conj(i3)
                k3i = g * p3 * np.conj(s3)
                k3p = -g * s3 * i3
                s4 = s + h * k3s
                i4 = i + h * k3i
                p4 = p + h * k3p
                k4s = g * p4 * np.conj(i4)
                k4i = g * p4 * np.conj(s4)
                k4p = -g * s4 * i4
                s = s + (h / 6.0) * (k1s + 2.0 * (k2s + k3s) + k4s)
                i = i + (h / 6.0) * (k1i + 2.0 * (k2i + k3i) + k4i)
                p = p + (h / 6.0) * (k1p + 2.0 * (k2p + k3p) + k4p)
            a_p[idx] = p
            a_s[idx] = s
            a_i[idx] = i

    @njit(parallel=True, fastmath=True, cache=True)
    def synthesize_batch(amps, U, V, S, area, out):
        """Detection-volume intensity strips for a batch of shots.

        amps: (shots, n_m, n_l, n_q) complex output amplitudes.
        U:    (n_l, n_k) radial profiles, V: (n_q, n_w) spectral profiles.
        S:    (n_m, n_m) Hermitian arc-overlap kernel.
        out:  (shots, n_k, n_w), filled with area * F^dagger S F per pixel.
        """
        n_shots, nm, nl, nq = amps.shape
        nk = U.shape[1]
        nw = V.shape[1]
        for sh in prange(n_shots):
            tmp = np.zeros((nm, nl, nw), dtype=np.complex128)
            for m in range(nm):
                for l in range(nl):
                    for q in range(nq):
                        a = amps[sh, m, l, q]
                        for w in range(nw):
                            tmp[m, l, w] += a * V[q, w]
            F = np.zeros((nm, nk, nw), dtype=np.complex128)
            for m in range(nm):
                for l in range(nl):
                    for k in range(nk):
                        u = U[l, k]
                        for w in range(nw):
                            F[m, k, w] += u * tmp[m, l, w]
            for k in range(nk):
                for w in range(nw):
                    acc = 0.0
                    for m1 in range(nm):
                        t = 0.0 + 0.0j
                        for m2 in range(nm):
                            t += S[m1, m2] * F[m2, k, w]
                        acc += (np.conj(F[m1, k, w]) * t).real
                    out[sh, k, w] = area * acc

else:  # numpy fallbacks

    def rk4_batch(a_p, a_s, a_i, gain, dz, n_steps):
        # Group elements sharing a step count so each group is advanced
        # with vectorized full-array steps.
        for count in np.unique(n_steps):
            sel = n_steps == count
            p = a_p[sel]
            s = a_s[sel]
            i = a_i[sel]
            g = gain[sel]
            h = dz[sel]
            for _ in range(int(count)):
                k1s = g * p * np.conj(i)
                k1i = g * p * np.conj(s)
                k1p = -g * s * i
                s2 = s + 0.5 * h * k1s
                i2 = i + 0.5 * h * k1i
                p2 = p + 0.5 * h * k1p
                k2s = g * p2 * np.conj(i2)
                k2i = g * p2 * np.conj(s2)
                k2p = -g * s2 * i2
                s3 = s + 0.5 * h * k2s
                i3 = i + 0.5 * h * k2i
                p3 = p + 0.5 * h * k2p
                k3s = g * p3 * np.conj(i3)
                k3i = g * p3 * np.conj(s3)
                k3p = -g * s3 * i3
                s4 = s + h * k3s
                i4 = i + h * k3i
                p4 = p + h * k3p
                k4s = g * p4 * np.conj(i4)
                k4i = g * p4 * np.conj(s4)
                k4p = -g * s4 * i4
                s = s + (h / 6.0) * (k1s + 2.0 * (k2s + k3s) + k4s)
                i = i + (h / 6.0) * (k1i + 2.0 * (k2i + k3i) + k4i)
                p = p + (h / 6.0) * (k1p + 2.0 * (k2p + k3p) + k4p)
            a_p[sel] = p
            a_s[sel] = s
            a_i[sel] = i

    def synthesize_batch(amps, U, V, S, area, out):
        # einsum with optimize=False keeps summation order fixed.
        for sh in range(amps.shape[0]):
            F = np.einsum("mlq,lk,qw->mkw", amps[sh], U, V.astype(complex))
            T = np.einsum("mn,nkw->mkw", S, F)
            out[sh] = area * np.einsum("mkw,mkw->kw", F.conj(), T).real
