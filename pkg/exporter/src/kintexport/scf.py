"""Symmetry-adapted restricted HF in the Bloch AO basis of the ring.

The SCF runs per k block (which enforces translation symmetry exactly),
with a global aufbau over all k and DIIS on the orthogonalized gradient.
A converged solution with unequal occupation counts per k or a closed
HOMO-LUMO gap is refused: such exports would not match a band-ordered
reference determinant downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .geometry import UnitCell
from .torus import RingGeometry, TorusIntegrals, ao_integrals


class ExportError(Exception):
    pass


class ScfNotConverged(ExportError):
    pass


def ring_of(cell: UnitCell, n_k: int, shift: float) -> RingGeometry:
    centers = tuple(c * cell.l_bohr + x
                    for c in range(n_k) for x in cell.positions)
    return RingGeometry(centers=centers,
                        circumference=n_k * cell.l_bohr,
                        twist=2 * np.pi * shift)


def bloch_matrix(n_k: int, n_orb: int, shift: float) -> np.ndarray:
    """Unitary from cell AOs (c,o) to Bloch AOs (k,o), both row-major."""
    n = n_k * n_orb
    b = np.zeros((n, n), dtype=complex)
    for c in range(n_k):
        for j in range(n_k):
            phase = np.exp(2j * np.pi * (j + shift) * c / n_k) / np.sqrt(n_k)
            for o in range(n_orb):
                b[c * n_orb + o, j * n_orb + o] = phase
    return b


def _blocks(mat: np.ndarray, n_k: int, n_orb: int) -> list[np.ndarray]:
    out = []
    for j in range(n_k):
        sl = slice(j * n_orb, (j + 1) * n_orb)
        out.append(np.ascontiguousarray(mat[sl, sl]))
    off = mat.copy()
    for j in range(n_k):
        sl = slice(j * n_orb, (j + 1) * n_orb)
        off[sl, sl] = 0.0
    if np.abs(off).max() > 1e-9:
        raise ExportError(
            f"matrix not k-block-diagonal, leak {np.abs(off).max():.2e}")
    return out


@dataclass
class ScfResult:
    e_hf: float
    e_nn: float
    eps: np.ndarray        # (n_k, n_orb) real band energies, ascending
    coeff: np.ndarray      # (n_k, n_orb, n_orb) MO columns in Bloch AOs
    n_occ: int             # occupied bands per k point
    h_bloch: list          # core blocks per k
    eri_bloch: np.ndarray  # chemist (ab|cd) in Bloch AOs
    n_iter: int = 0
    history: list = field(default_factory=list)


def _fock(h: np.ndarray, eri: np.ndarray, dens: np.ndarray) -> np.ndarray:
    j = np.einsum("abcd,dc->ab", eri, dens, optimize=True)
    k = np.einsum("adcb,dc->ab", eri, dens, optimize=True)
    return h + j - 0.5 * k


def run_rhf(ints: TorusIntegrals, n_k: int, n_orb: int, shift: float,
            n_elec: int, tol: float = 1e-11, maxiter: int = 300) -> ScfResult:
    if n_elec % 2:
        raise ExportError(f"restricted HF needs even n_elec, got {n_elec}")
    n_pairs = n_elec // 2
    n = ints.geom.n_ao
    bloch = bloch_matrix(n_k, n_orb, shift)
    s_full = bloch.conj().T @ ints.s @ bloch
    h_full = bloch.conj().T @ (ints.kin + ints.v_ne) @ bloch
    s_blocks = _blocks(s_full, n_k, n_orb)
    h_blocks = _blocks(h_full, n_k, n_orb)
    eri_b = np.einsum("am,bn,cr,ds,abcd->mnrs", bloch.conj(), bloch,
                      bloch.conj(), bloch, ints.eri, optimize=True)

    def solve_blocks(f_full):
        eps = np.empty((n_k, n_orb))
        coeff = np.empty((n_k, n_orb, n_orb), dtype=complex)
        fb = _blocks(f_full, n_k, n_orb)
        for j in range(n_k):
            w, v = scipy.linalg.eigh(fb[j], s_blocks[j])
            eps[j], coeff[j] = w, v
        return eps, coeff

    def density(eps, coeff):
        flat = np.argsort(eps, axis=None, kind="stable")[:n_pairs]
        occ_k = np.zeros(n_k, dtype=int)
        dens = np.zeros((n, n), dtype=complex)
        for idx in flat:
            j, p = divmod(idx, n_orb)
            occ_k[j] += 1
            sl = slice(j * n_orb, (j + 1) * n_orb)
            dens[sl, sl] += 2.0 * np.outer(coeff[j][:, p],
                                           coeff[j][:, p].conj())
        return dens, occ_k

    def energy(dens, fock):
        val = 0.5 * np.einsum("ba,ab->", dens, h_full + fock)
        return float(val.real) + ints.e_nn

    eps, coeff = solve_blocks(h_full)
    dens, _ = density(eps, coeff)
    x = scipy.linalg.fractional_matrix_power(s_full, -0.5)
    diis_f: list = []
    diis_e: list = []
    last_e = np.inf
    history = []
    for it in range(1, maxiter + 1):
        fock = _fock(h_full, eri_b, dens)
        err = fock @ dens @ s_full - s_full @ dens @ fock
        err = x.conj().T @ err @ x
        e_now = energy(dens, fock)
        history.append(e_now)
        if np.abs(err).max() < tol and abs(e_now - last_e) < 1e-13:
            eps, coeff = solve_blocks(fock)
            dens, occ_k = density(eps, coeff)
            if not np.all(occ_k == occ_k[0]):
                raise ExportError(
                    f"metallic aufbau, occupations per k {occ_k.tolist()}")
            n_occ = int(occ_k[0])
            homo = eps[:, n_occ - 1].max()
            lumo = eps[:, n_occ:].min() if n_occ < n_orb else np.inf
            if lumo - homo < 1e-8:
                raise ExportError(f"closed gap at the Fermi level "
                                  f"({lumo - homo:.2e} Hartree)")
            coeff = _fix_gauge(coeff)
            return ScfResult(e_hf=e_now, e_nn=ints.e_nn, eps=eps,
                             coeff=coeff, n_occ=n_occ, h_bloch=h_blocks,
                             eri_bloch=eri_b, n_iter=it, history=history)
        last_e = e_now
        diis_f.append(fock)
        diis_e.append(err)
        if len(diis_f) > 8:
            diis_f.pop(0)
            diis_e.pop(0)
        if len(diis_f) >= 2:
            fock = _diis_mix(diis_f, diis_e)
        eps, coeff = solve_blocks(fock)
        dens, _ = density(eps, coeff)
    raise ScfNotConverged(f"no convergence in {maxiter} iterations, "
                          f"last E={last_e:.10f}")


def _diis_mix(focks: list, errs: list) -> np.ndarray:
    m = len(focks)
    b = np.empty((m + 1, m + 1), dtype=complex)
    b[-1, :] = -1.0
    b[:, -1] = -1.0
    b[-1, -1] = 0.0
    for i in range(m):
        for j in range(m):
            b[i, j] = np.vdot(errs[i], errs[j])
    rhs = np.zeros(m + 1)
    rhs[-1] = -1.0
    try:
        weights = np.linalg.solve(b, rhs)[:m]
    except np.linalg.LinAlgError:
        return focks[-1]
    mixed = np.zeros_like(focks[0])
    for w, f in zip(weights, focks):
        mixed = mixed + w * f
    return mixed


def gauge_anchor(col: np.ndarray) -> int:
    """First index whose magnitude is within 1e-8 of the column max.

    Plain argmax is unstable when two magnitudes nearly tie, which
    happens routinely in 2x2 blocks; this rule is reproducible.
    """
    mags = np.abs(col)
    return int(np.argmax(mags >= mags.max() - 1e-8))


def _fix_gauge(coeff: np.ndarray) -> np.ndarray:
    """Anchor component of each MO column made real positive."""
    out = coeff.copy()
    n_k, n_orb, _ = coeff.shape
    for j in range(n_k):
        for p in range(n_orb):
            col = out[j][:, p]
            anchor = gauge_anchor(col)
            phase = col[anchor] / abs(col[anchor])
            out[j][:, p] = col / phase
    return out


@dataclass
class MoIntegrals:
    n_k: int
    n_orb: int
    n_occ: int
    t: np.ndarray        # (n_k, n_orb, n_orb) core matrix per k, Hermitian
    w: np.ndarray        # chemist MO ERIs over the composite (k p) index
    eps: np.ndarray
    e_nn: float
    e_hf: float

    def k_of(self, mu: int) -> int:
        return mu // self.n_orb

    @property
    def n_mo(self) -> int:
        return self.n_k * self.n_orb


def mo_transform(scf: ScfResult, n_k: int, n_orb: int) -> MoIntegrals:
    c_full = np.zeros((n_k * n_orb, n_k * n_orb), dtype=complex)
    t = np.empty((n_k, n_orb, n_orb), dtype=complex)
    for j in range(n_k):
        sl = slice(j * n_orb, (j + 1) * n_orb)
        c_full[sl, sl] = scf.coeff[j]
        block = scf.coeff[j].conj().T @ scf.h_bloch[j] @ scf.coeff[j]
        t[j] = 0.5 * (block + block.conj().T)
    w = np.einsum("am,bn,cr,ds,abcd->mnrs", c_full.conj(), c_full,
                  c_full.conj(), c_full, scf.eri_bloch, optimize=True)
    return MoIntegrals(n_k=n_k, n_orb=n_orb, n_occ=scf.n_occ, t=t, w=w,
                       eps=scf.eps, e_nn=scf.e_nn, e_hf=scf.e_hf)


def hf_energy_from_mo(mo: MoIntegrals) -> float:
    """Occupied-orbital HF energy straight from the MO tables.

    Independent check that the exported t/w reproduce the SCF energy.
    """
    occ = [j * mo.n_orb + p for j in range(mo.n_k) for p in range(mo.n_occ)]
    one = sum(2.0 * mo.t[mu // mo.n_orb, mu % mo.n_orb, mu % mo.n_orb].real
              for mu in occ)
    two = 0.0
    for i in occ:
        for j in occ:
            two += (2.0 * mo.w[i, i, j, j] - mo.w[i, j, j, i]).real
    return one + two + mo.e_nn


def mp2_energy(mo: MoIntegrals) -> float:
    occ = [(j, p) for j in range(mo.n_k) for p in range(mo.n_occ)]
    virt = [(j, p) for j in range(mo.n_k) for p in range(mo.n_occ, mo.n_orb)]
    idx = lambda jp: jp[0] * mo.n_orb + jp[1]
    corr = 0.0
    for i in occ:
        for j in occ:
            for a in virt:
                for b in virt:
                    denom = (mo.eps[i] + mo.eps[j] - mo.eps[a] - mo.eps[b])
                    iajb = mo.w[idx(i), idx(a), idx(j), idx(b)]
                    ibja = mo.w[idx(i), idx(b), idx(j), idx(a)]
                    corr += (iajb * (2 * iajb.conj() - ibja.conj())).real / denom
    return corr
