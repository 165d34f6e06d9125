"""Determinant CI over the Bloch MOs, blocked by total crystal momentum.

Spin orbitals are interleaved (q = 2*mu + sigma) and determinants stored
as occupation bitmasks. The Hamiltonian is applied as a list of second
quantized terms with exact Jordan-Wigner-free sign bookkeeping, so this
is an independent oracle for anything built on the same MO tables.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .scf import MoIntegrals

_DENSE_CAP = 700


def sector_masks(n_so: int, n_alpha: int, n_beta: int) -> np.ndarray:
    alphas = [sum(1 << (2 * m) for m in c)
              for c in combinations(range(n_so // 2), n_alpha)]
    betas = [sum(1 << (2 * m + 1) for m in c)
             for c in combinations(range(n_so // 2), n_beta)]
    masks = sorted(a | b for a in alphas for b in betas)
    return np.asarray(masks, dtype=np.uint64)


def momentum_of(masks: np.ndarray, n_orb: int, n_k: int) -> np.ndarray:
    """Total crystal momentum index (mod n_k) per determinant."""
    kappa = np.zeros(len(masks), dtype=np.int64)
    n_so = 2 * n_orb * n_k
    for q in range(n_so):
        k = (q // 2) // n_orb
        bit = np.uint64(1 << q)
        kappa += k * ((masks & bit) != 0)
    return kappa % n_k


def _terms(mo: MoIntegrals, tol: float = 1e-12):
    """Yield (coef, ops) with ops = ((q, dag), ...) applied right to left."""
    n_mo = mo.n_mo
    t_flat = np.zeros((n_mo, n_mo), dtype=complex)
    for j in range(mo.n_k):
        sl = slice(j * mo.n_orb, (j + 1) * mo.n_orb)
        t_flat[sl, sl] = mo.t[j]
    for mu in range(n_mo):
        for nu in range(n_mo):
            if abs(t_flat[mu, nu]) < tol:
                continue
            for s in (0, 1):
                yield t_flat[mu, nu], ((2 * mu + s, 1), (2 * nu + s, 0))
    for mu in range(n_mo):
        for nu in range(n_mo):
            for rho in range(n_mo):
                for sg in range(n_mo):
                    val = mo.w[mu, nu, rho, sg]
                    if abs(val) < tol:
                        continue
                    for s in (0, 1):
                        for t in (0, 1):
                            yield 0.5 * val, ((2 * mu + s, 1), (2 * rho + t, 1),
                                              (2 * sg + t, 0), (2 * nu + s, 0))


def _apply_term(coef, ops, masks):
    """Column action of coef * ops on every determinant in the sector."""
    n = len(masks)
    cur = masks.copy()
    amp = np.full(n, coef, dtype=complex)
    alive = np.ones(n, dtype=bool)
    for q, dag in reversed(ops):
        bit = np.uint64(1 << q)
        below = bit - np.uint64(1)
        occ = (cur & bit) != 0
        alive &= occ != bool(dag)
        parity = np.bitwise_count(cur & below).astype(np.int64)
        amp = np.where(parity & 1, -amp, amp)
        cur = cur ^ bit
    rows_mask = cur[alive]
    cols = np.nonzero(alive)[0]
    rows = np.searchsorted(masks, rows_mask)
    ok = rows < n
    rows = np.where(ok, rows, 0)
    ok &= masks[rows] == rows_mask
    return amp[alive][ok], rows[ok], cols[ok]


def sector_hamiltonian(mo: MoIntegrals, n_alpha: int, n_beta: int,
                       masks: np.ndarray | None = None):
    n_so = 2 * mo.n_mo
    if masks is None:
        masks = sector_masks(n_so, n_alpha, n_beta)
    data, rows, cols = [], [], []
    for coef, ops in _terms(mo):
        d, r, c = _apply_term(coef, ops, masks)
        data.append(d)
        rows.append(r)
        cols.append(c)
    ham = scipy.sparse.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(len(masks), len(masks))).tocsr()
    ham = 0.5 * (ham + ham.conj().T)
    return ham, masks


def sector_spectrum(mo: MoIntegrals, n_alpha: int, n_beta: int,
                    per_block: int = 1):
    """Lowest eigenvalues per momentum block; returns dict kappa -> energy.

    Energies include the nuclear constant. per_block > 1 returns arrays.
    """
    ham, masks = sector_hamiltonian(mo, n_alpha, n_beta)
    kappa = momentum_of(masks, mo.n_orb, mo.n_k)
    result = {}
    for kb in range(mo.n_k):
        sel = np.nonzero(kappa == kb)[0]
        if len(sel) == 0:
            continue
        block = ham[sel, :][:, sel]
        if block.shape[0] <= _DENSE_CAP or per_block >= block.shape[0] - 1:
            vals = np.linalg.eigvalsh(block.toarray())
        else:
            vals = scipy.sparse.linalg.eigsh(
                block, k=per_block, which="SA", return_eigenvectors=False)
            vals = np.sort(vals)
        picked = vals[:per_block] + mo.e_nn
        result[kb] = float(picked[0]) if per_block == 1 else picked
    return result


def leak_between_blocks(mo: MoIntegrals, n_alpha: int, n_beta: int) -> float:
    """Largest matrix element between different momentum blocks."""
    ham, masks = sector_hamiltonian(mo, n_alpha, n_beta)
    kappa = momentum_of(masks, mo.n_orb, mo.n_k)
    coo = ham.tocoo()
    off = kappa[coo.row] != kappa[coo.col]
    if not off.any():
        return 0.0
    return float(np.abs(coo.data[off]).max())


def ci_references(mo: MoIntegrals, n_elec: int) -> dict:
    """FCI ground state plus charged-sector band references.

    ip_ed / ea_ed use the global minima of the N-1 / N+1 sectors; gap_ed
    is the smallest direct (momentum-diagonal) particle-hole gap.
    """
    half = n_elec // 2
    ground = sector_spectrum(mo, half, half)
    kappa0 = min(ground, key=ground.get)
    e0 = ground[kappa0]
    minus = sector_spectrum(mo, half - 1, half)
    plus = sector_spectrum(mo, half + 1, half)
    ip = min(minus.values()) - e0
    ea = e0 - min(plus.values())
    gaps = {}
    for dk in range(mo.n_k):
        kv = (kappa0 - dk) % mo.n_k
        kc = (kappa0 + dk) % mo.n_k
        if kv in minus and kc in plus:
            eps_v = e0 - minus[kv]
            eps_c = plus[kc] - e0
            gaps[dk] = eps_c - eps_v
    return {
        "fci": e0,
        "kappa0": kappa0,
        "ip_ed": ip,
        "ea_ed": ea,
        "gap_ed": min(gaps.values()),
        "direct_gaps": gaps,
        "ground_blocks": ground,
    }
