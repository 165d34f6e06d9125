"""Exact diagonalization in symmetry sectors, fidelities, and momentum checks.

The full register splits into sectors labeled by electron count, 2*Sz, and
total crystal momentum residue; all three labels are diagonal in the
occupation basis, so projection is a row mask. Dense solves cover small
sectors, Lanczos iteration the rest, and every returned eigenpair is
residual-checked against the sector matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .errors import SectorEmpty, SectorOutOfRange, SizeMismatch
from .integrals import KMesh
from .jw_encoding import PauliSum
from .statevec import StateVector

DENSE_MAX_DIM = 4096
RESIDUAL_TOL = 1e-9

_ALPHA_MASK = 0x5555555555555555


@dataclass(frozen=True)
class SectorSpec:
    """Symmetry labels selecting a block of the Fock space.

    two_sz is n_alpha - n_beta (twice the spin projection); k_residue is the
    total momentum index sum mod n_k. Either may be None, leaving that label
    unconstrained.
    """

    n_elec: int
    two_sz: int | None = None
    k_residue: int | None = None

    def check(self, n_qubits: int) -> None:
        if not 0 <= self.n_elec <= n_qubits:
            raise SectorOutOfRange(
                f"{self.n_elec} electrons on {n_qubits} spin orbitals"
            )
        if self.two_sz is not None:
            if (self.two_sz + self.n_elec) % 2 or abs(self.two_sz) > self.n_elec:
                raise SectorOutOfRange(
                    f"2Sz={self.two_sz} impossible with {self.n_elec} electrons"
                )


def sector_basis(n_qubits: int, spec: SectorSpec,
                 mesh: KMesh | None = None) -> np.ndarray:
    """Basis integers of the sector, ascending."""
    spec.check(n_qubits)
    idx = np.arange(1 << n_qubits, dtype=np.int64)
    keep = np.bitwise_count(idx) == spec.n_elec
    if spec.two_sz is not None:
        n_alpha = np.bitwise_count(idx & _ALPHA_MASK).astype(np.int64)
        keep &= (2 * n_alpha - spec.n_elec) == spec.two_sz
    if spec.k_residue is not None:
        if mesh is None:
            raise SectorOutOfRange("k_residue constraint needs the k-mesh")
        n_k = mesh.n_k
        if n_qubits % (2 * n_k):
            raise SizeMismatch(
                f"{n_qubits} qubits do not tile {n_k} k-points evenly"
            )
        n_orb = n_qubits // (2 * n_k)
        ksum = np.zeros(1 << n_qubits, dtype=np.int64)
        for q in range(n_qubits):
            k = q // (2 * n_orb)
            ksum[(idx >> q) & 1 == 1] += k
        keep &= (ksum % n_k) == (spec.k_residue % n_k)
    basis = idx[keep]
    if basis.size == 0:
        raise SectorEmpty(f"no basis states for {spec} on {n_qubits} qubits")
    return basis


def sector_matrix(ham: PauliSum, basis: np.ndarray) -> scipy.sparse.csr_matrix:
    """H restricted to the sector block, sparse."""
    n_qubits = ham.n_qubits
    dim = basis.shape[0]
    pos = np.full(1 << n_qubits, -1, dtype=np.int64)
    pos[basis] = np.arange(dim, dtype=np.int64)
    xs, zs, cs = ham.to_arrays()
    rows_all, cols_all, vals_all = [], [], []
    cols = np.arange(dim, dtype=np.int64)
    for x, z, c in zip(xs, zs, cs):
        x = int(x)
        z = int(z)
        targets = pos[basis ^ x]
        sel = targets >= 0
        if not np.any(sel):
            continue
        pref = 1j ** (bin(x & z).count("1") & 3)
        signs = 1.0 - 2.0 * (np.bitwise_count(basis[sel] & z) & 1)
        rows_all.append(targets[sel])
        cols_all.append(cols[sel])
        vals_all.append((c * pref) * signs)
    if not rows_all:
        return scipy.sparse.csr_matrix((dim, dim), dtype=np.complex128)
    mat = scipy.sparse.coo_matrix(
        (np.concatenate(vals_all),
         (np.concatenate(rows_all), np.concatenate(cols_all))),
        shape=(dim, dim), dtype=np.complex128)
    return mat.tocsr()


def dense_matrix(psum: PauliSum) -> np.ndarray:
    """Full 2^n x 2^n matrix; only for small registers."""
    n = psum.n_qubits
    if n > 14:
        raise SizeMismatch(f"dense matrix on {n} qubits is out of scope")
    dim = 1 << n
    cols = np.arange(dim, dtype=np.int64)
    mat = np.zeros((dim, dim), dtype=np.complex128)
    for (x, z), c in psum.terms.items():
        pref = 1j ** (bin(x & z).count("1") & 3)
        signs = 1.0 - 2.0 * (np.bitwise_count(cols & z) & 1)
        mat[cols ^ x, cols] += (c * pref) * signs
    return mat


def _embed(basis: np.ndarray, vec: np.ndarray, n_qubits: int) -> StateVector:
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[basis] = vec
    return StateVector(amps, n_qubits)


def sector_eigs(ham: PauliSum, spec: SectorSpec, n_states: int = 1,
                mesh: KMesh | None = None
                ) -> tuple[np.ndarray, list[StateVector]]:
    """Lowest eigenpairs of the sector block, residual-checked.

    Eigenvalues come back ascending with degeneracies intact; each vector is
    embedded into the full register.
    """
    basis = sector_basis(ham.n_qubits, spec, mesh)
    dim = basis.shape[0]
    n_states = min(n_states, dim)
    mat = sector_matrix(ham, basis)
    if dim <= DENSE_MAX_DIM or n_states >= dim - 1:
        dense = mat.toarray()
        evals, evecs = np.linalg.eigh(dense)
        evals = evals[:n_states]
        evecs = evecs[:, :n_states]
    else:
        v0 = np.full(dim, 1.0 / np.sqrt(dim))
        ncv = min(dim, max(4 * n_states + 1, 60))
        evals, evecs = scipy.sparse.linalg.eigsh(
            mat, k=n_states, which="SA", v0=v0, ncv=ncv, tol=0)
        order = np.argsort(evals)
        evals = evals[order]
        evecs = evecs[:, order]
    for i in range(n_states):
        resid = np.linalg.norm(mat @ evecs[:, i] - evals[i] * evecs[:, i])
        if resid > RESIDUAL_TOL * max(1.0, abs(evals[i])):
            raise SectorEmpty(
                f"eigen residual {resid:.2e} above tolerance in sector {spec}"
            )
    states = [_embed(basis, evecs[:, i], ham.n_qubits) for i in range(n_states)]
    return np.asarray(evals, dtype=np.float64), states


def fci_ground(ham: PauliSum, spec: SectorSpec,
               mesh: KMesh | None = None) -> tuple[float, StateVector]:
    """Lowest eigenpair in the sector."""
    evals, states = sector_eigs(ham, spec, n_states=1, mesh=mesh)
    return float(evals[0]), states[0]


def sector_spectrum(ham: PauliSum, spec: SectorSpec, n_states: int,
                    mesh: KMesh | None = None) -> np.ndarray:
    """Lowest n_states sector energies, ascending."""
    evals, _ = sector_eigs(ham, spec, n_states=n_states, mesh=mesh)
    return evals


def ground_in_number_sector(ham: PauliSum, n_elec: int,
                            mesh: KMesh | None = None
                            ) -> tuple[float, StateVector]:
    """Minimum over every Sz in the fixed-particle-number sector."""
    best: tuple[float, StateVector] | None = None
    for two_sz in range(-n_elec, n_elec + 1, 2):
        if abs(two_sz) > ham.n_qubits:
            continue
        try:
            e, state = fci_ground(ham, SectorSpec(n_elec, two_sz), mesh)
        except SectorEmpty:
            continue
        if best is None or e < best[0] - 1e-14:
            best = (e, state)
    if best is None:
        raise SectorEmpty(f"no {n_elec}-electron states fit the register")
    return best


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>| for normalized states."""
    if a.n_qubits != b.n_qubits:
        raise SizeMismatch("states live on different registers")
    return float(abs(np.vdot(a.amps, b.amps)))


def subspace_fidelity(state: StateVector, others: list[StateVector]) -> float:
    """Norm of the projection onto the span of an orthonormal set.

    Removes the arbitrary-rotation ambiguity when the target level is
    degenerate; with a single partner this is plain fidelity.
    """
    total = 0.0
    for other in others:
        if other.n_qubits != state.n_qubits:
            raise SizeMismatch("states live on different registers")
        total += abs(np.vdot(other.amps, state.amps)) ** 2
    return float(np.sqrt(total))


def translation_phases(n_qubits: int, mesh: KMesh) -> np.ndarray:
    """Per-basis-state phase angle of the lattice translation operator.

    The translation by one cell multiplies each occupied orbital at k-point
    j by exp(i 2 pi k_frac(j)), so a determinant picks up the sum of its
    occupied k fractions.
    """
    if n_qubits % (2 * mesh.n_k):
        raise SizeMismatch(
            f"{n_qubits} qubits do not tile {mesh.n_k} k-points evenly"
        )
    n_orb = n_qubits // (2 * mesh.n_k)
    idx = np.arange(1 << n_qubits, dtype=np.int64)
    phases = np.zeros(1 << n_qubits, dtype=np.float64)
    for q in range(n_qubits):
        j = q // (2 * n_orb)
        phases[(idx >> q) & 1 == 1] += 2.0 * np.pi * mesh.k_frac(j)
    return phases


def translation_expectation(state: StateVector, mesh: KMesh) -> complex:
    """<T_L>, the translation operator being diagonal in the Fock basis."""
    phases = translation_phases(state.n_qubits, mesh)
    return complex(np.sum(np.abs(state.amps) ** 2 * np.exp(1j * phases)))


def crystal_momentum(state: StateVector, mesh: KMesh
                     ) -> tuple[float, float, complex]:
    """(K in radians/Bohr, |<T_L>|, <T_L>) for a normalized state.

    K sits on the principal branch arg(<T_L>)/L; |<T_L>| = 1 only for
    translation eigenstates, so the magnitude doubles as a symmetry check.
    """
    t_val = translation_expectation(state, mesh)
    k = float(np.angle(t_val) / mesh.length)
    return k, float(abs(t_val)), t_val
