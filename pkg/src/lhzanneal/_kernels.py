"""Compiled inner loops for state-vector propagation.

All kernels take the diagonal terms as float arrays and the schedule as
its coefficient vector a_1..a_D plus a constant offset c0.  Normalised
time runs linearly from s0 to s1 over the duration T.  Snapshots are
written into a preallocated (n_snap, 2**K) buffer at the requested step
indices.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def horner(a, s):
    acc = 0.0
    for d in range(a.shape[0] - 1, -1, -1):
        acc = (acc + a[d]) * s
    return acc


@njit(cache=True)
def fwht(psi):
    """Unnormalised in-place Walsh-Hadamard transform."""
    n = psi.shape[0]
    h = 1
    while h < n:
        for start in range(0, n, 2 * h):
            for j in range(start, start + h):
                u = psi[j]
                v = psi[j + h]
                psi[j] = u + v
                psi[j + h] = u - v
        h *= 2


@njit(cache=True)
def apply_h(psi, out, f, g, K, s, c):
    n = psi.shape[0]
    w = 1.0 - s
    for b in range(n):
        acc = (s * f[b] + c * g[b]) * psi[b]
        if w != 0.0:
            x = 0j
            for k in range(K):
                x += psi[b ^ (1 << k)]
            acc += w * x
        out[b] = acc


@njit(cache=True)
def _norm(psi):
    acc = 0.0
    for b in range(psi.shape[0]):
        acc += psi[b].real * psi[b].real + psi[b].imag * psi[b].imag
    return np.sqrt(acc)


@njit(cache=True)
def _diag_phase(psi, J, gidx, L, K, s, c, tau, phase, gtab):
    """psi *= exp(-i tau (s F + c G)).

    F = -sum_k J_k Z_k factorises over qubits, so its phase is built as a
    product state by doubling; G takes only the values -L, -L+2, ..., L and
    is looked up through ``gidx`` = (G + L) / 2.
    """
    phase[0] = 1.0
    size = 1
    for k in range(K):
        theta = tau * s * J[k]
        up = complex(np.cos(theta), np.sin(theta))
        down = complex(np.cos(theta), -np.sin(theta))
        for b in range(size):
            phase[b + size] = phase[b] * down
            phase[b] *= up
        size *= 2
    for v in range(L + 1):
        theta = -tau * c * (2 * v - L)
        gtab[v] = complex(np.cos(theta), np.sin(theta))
    for b in range(psi.shape[0]):
        psi[b] *= phase[b] * gtab[gidx[b]]


@njit(cache=True)
def strang_evolve(psi0, J, gidx, L, popcount, K, a, c0, s0, s1, T, nsteps, snap_steps, snaps):
    """Symmetric splitting: half diagonal, exact driver via FWHT, half diagonal.

    The two half diagonal steps meeting at an interior grid point are merged
    unless a snapshot is requested there.
    """
    psi = psi0.copy()
    n = psi.shape[0]
    dt = T / nsteps
    inv_n = 1.0 / n
    table = np.empty(K + 1, dtype=np.complex128)
    phase = np.empty(n, dtype=np.complex128)
    gtab = np.empty(L + 1, dtype=np.complex128)
    drift = abs(_norm(psi) - 1.0)
    si = 0
    while si < snap_steps.shape[0] and snap_steps[si] == 0:
        snaps[si, :] = psi
        si += 1
    ds = s1 - s0
    _diag_phase(psi, J, gidx, L, K, s0, c0 + horner(a, s0), 0.5 * dt, phase, gtab)
    for step in range(nsteps):
        w = 1.0 - (s0 + ds * (step + 0.5) / nsteps)
        for p in range(K + 1):
            theta = -dt * w * (K - 2 * p)
            table[p] = complex(np.cos(theta), np.sin(theta)) * inv_n
        fwht(psi)
        for b in range(n):
            psi[b] *= table[popcount[b]]
        fwht(psi)
        sn = s0 + ds * (step + 1) / nsteps
        cn = c0 + horner(a, sn)
        snap_here = si < snap_steps.shape[0] and snap_steps[si] == step + 1
        if step + 1 == nsteps or snap_here:
            _diag_phase(psi, J, gidx, L, K, sn, cn, 0.5 * dt, phase, gtab)
            while si < snap_steps.shape[0] and snap_steps[si] == step + 1:
                snaps[si, :] = psi
                si += 1
            if step + 1 < nsteps:
                _diag_phase(psi, J, gidx, L, K, sn, cn, 0.5 * dt, phase, gtab)
        else:
            _diag_phase(psi, J, gidx, L, K, sn, cn, dt, phase, gtab)
        d = abs(_norm(psi) - 1.0)
        if d > drift:
            drift = d
    return psi, drift


@njit(cache=True)
def rk4_evolve(psi0, f, g, K, a, c0, s0, s1, T, nsteps, snap_steps, snaps):
    """Classical RK4 on i dpsi/dt = H(t) psi, H evaluated at stage times."""
    psi = psi0.copy()
    n = psi.shape[0]
    dt = T / nsteps
    k1 = np.empty(n, dtype=np.complex128)
    k2 = np.empty(n, dtype=np.complex128)
    k3 = np.empty(n, dtype=np.complex128)
    k4 = np.empty(n, dtype=np.complex128)
    tmp = np.empty(n, dtype=np.complex128)
    drift = abs(_norm(psi) - 1.0)
    si = 0
    while si < snap_steps.shape[0] and snap_steps[si] == 0:
        snaps[si, :] = psi
        si += 1
    ds = s1 - s0
    for step in range(nsteps):
        sa = s0 + ds * step / nsteps
        sm = s0 + ds * (step + 0.5) / nsteps
        sb = s0 + ds * (step + 1) / nsteps
        cm = c0 + horner(a, sm)
        apply_h(psi, k1, f, g, K, sa, c0 + horner(a, sa))
        for b in range(n):
            k1[b] *= -1j
            tmp[b] = psi[b] + 0.5 * dt * k1[b]
        apply_h(tmp, k2, f, g, K, sm, cm)
        for b in range(n):
            k2[b] *= -1j
            tmp[b] = psi[b] + 0.5 * dt * k2[b]
        apply_h(tmp, k3, f, g, K, sm, cm)
        for b in range(n):
            k3[b] *= -1j
            tmp[b] = psi[b] + dt * k3[b]
        apply_h(tmp, k4, f, g, K, sb, c0 + horner(a, sb))
        for b in range(n):
            psi[b] += dt / 6.0 * (k1[b] + 2.0 * k2[b] + 2.0 * k3[b] - 1j * k4[b])
        d = abs(_norm(psi) - 1.0)
        if d > drift:
            drift = d
        while si < snap_steps.shape[0] and snap_steps[si] == step + 1:
            snaps[si, :] = psi
            si += 1
    return psi, drift
