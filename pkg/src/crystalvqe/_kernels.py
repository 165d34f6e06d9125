"""Jit-compiled hot loops behind the statevector operations.

Every kernel mirrors the documented bitmask semantics exactly; the numpy
implementations in statevec.py stay the reference and the test suite holds
the two paths together. Masks arrive as int64 (registers up to 32 qubits,
far beyond what a dense amplitude array can hold anyway); parity is two
16-bit table lookups.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_PAR16 = np.zeros(1 << 16, dtype=np.int64)
for _v in range(1, 1 << 16):
    _PAR16[_v] = _PAR16[_v >> 1] ^ (_v & 1)

_POP16 = np.zeros(1 << 16, dtype=np.int64)
for _v in range(1, 1 << 16):
    _POP16[_v] = _POP16[_v >> 1] + (_v & 1)


@njit(cache=True, inline="always")
def _parity(v, table):
    return table[v & 0xFFFF] ^ table[(v >> 16) & 0xFFFF]


@njit(cache=True)
def k_expectation(amps, xs, zs, coeffs, par16, pop16):
    """<psi|sum_t c_t P_t|psi> with P|b> = i^pc(x&z) (-1)^pc(z&b) |b^x>."""
    n = amps.shape[0]
    total = 0.0 + 0.0j
    for t in range(xs.shape[0]):
        x = xs[t]
        z = zs[t]
        pc = pop16[(x & z) & 0xFFFF] + pop16[((x & z) >> 16) & 0xFFFF]
        pref = 1j ** (pc & 3)
        acc = 0.0 + 0.0j
        for b in range(n):
            src = b ^ x
            if _parity(z & src, par16) == 0:
                acc += np.conj(amps[b]) * amps[src]
            else:
                acc -= np.conj(amps[b]) * amps[src]
        total += coeffs[t] * pref * acc
    return total


@njit(cache=True)
def k_apply_sum(amps, xs, zs, coeffs, par16, pop16, out):
    """out += (sum_t c_t P_t) amps."""
    n = amps.shape[0]
    for t in range(xs.shape[0]):
        x = xs[t]
        z = zs[t]
        pc = pop16[(x & z) & 0xFFFF] + pop16[((x & z) >> 16) & 0xFFFF]
        c = coeffs[t] * (1j ** (pc & 3))
        for b in range(n):
            src = b ^ x
            if _parity(z & src, par16) == 0:
                out[b] += c * amps[src]
            else:
                out[b] -= c * amps[src]


@njit(cache=True, inline="always")
def _rotate_inplace(amps, x, z, pref, cos_t, sin_t, par16):
    """amps <- exp(i theta P) amps for one Pauli string, pairwise update."""
    n = amps.shape[0]
    isp = 1j * sin_t * pref
    if x == 0:
        for b in range(n):
            if _parity(z & b, par16) == 0:
                amps[b] = (cos_t + isp) * amps[b]
            else:
                amps[b] = (cos_t - isp) * amps[b]
        return
    for b in range(n):
        c = b ^ x
        if b < c:
            ab = amps[b]
            ac = amps[c]
            if _parity(z & c, par16) == 0:
                amps[b] = cos_t * ab + isp * ac
            else:
                amps[b] = cos_t * ab - isp * ac
            if _parity(z & b, par16) == 0:
                amps[c] = cos_t * ac + isp * ab
            else:
                amps[c] = cos_t * ac - isp * ab


@njit(cache=True)
def k_apply_circuit(amps, gxs, gzs, gprefs, angles, par16):
    """Apply rotations exp(i angles[m] P_m) for m = 0..M-1 in order."""
    for m in range(gxs.shape[0]):
        _rotate_inplace(amps, gxs[m], gzs[m], gprefs[m],
                        np.cos(angles[m]), np.sin(angles[m]), par16)


@njit(cache=True)
def k_adjoint_sweep(psi, lam, gxs, gzs, gprefs, weights, slots, angles,
                    par16, grads):
    """Reverse-sweep parameter gradient accumulation.

    On entry psi is the fully prepared state and lam = H psi. Walking the
    gate list backwards, each step adds the slot's contribution
    2 Re <lam| i w P |psi> and undoes the gate on both vectors; psi ends
    back at the reference state.
    """
    n = psi.shape[0]
    for m in range(gxs.shape[0] - 1, -1, -1):
        x = gxs[m]
        z = gzs[m]
        pref = gprefs[m]
        acc = 0.0 + 0.0j
        for b in range(n):
            src = b ^ x
            if _parity(z & src, par16) == 0:
                acc += np.conj(lam[b]) * psi[src]
            else:
                acc -= np.conj(lam[b]) * psi[src]
        s = pref * acc
        grads[slots[m]] += -2.0 * weights[m] * s.imag
        cos_t = np.cos(-angles[m])
        sin_t = np.sin(-angles[m])
        _rotate_inplace(psi, x, z, pref, cos_t, sin_t, par16)
        _rotate_inplace(lam, x, z, pref, cos_t, sin_t, par16)
