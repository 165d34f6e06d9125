"""Quasiparticle band structure via subspace expansion.

A converged ground state |psi> with energy E0 is dressed with bare
ionization operators c_{kp,sigma} (occupied bands) or attachment operators
c^dag_{kp,sigma} (virtual bands).  Projecting the Hamiltonian and the
identity onto span{R_j |psi>} yields a small generalized eigenproblem whose
roots approximate N-/+1-electron energies; differences against E0 give the
band energies.

Momentum and Sz selection rules make the projected matrices block diagonal
over (k, spin), so production solves run per block.  A full-pool solve is
kept around mainly to test that claim.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (EmptySubspace, HermiticityViolation, IndexOutOfRange,
                     SizeMismatch)
from .fermion_ops import FermionOperator
from .integrals import CrystalIntegrals
from .jw_encoding import PauliSum, jordan_wigner
from .statevec import (StateVector, apply_operator, expectation,
                       hartree_fock_mask, inner_product)

HERMITICITY_TOL = 1e-10
METRIC_THRESHOLD = 1e-8

IP = "IP"
EA = "EA"


@dataclass(frozen=True)
class SubspaceOperator:
    """One dressing operator: c (kind IP) or c^dag (kind EA) on a mode."""

    kind: str
    k: int
    orbital: int
    spin: int
    mode: int
    encoded: PauliSum


@dataclass
class SubspaceOperatorPool:
    kind: str
    n_qubits: int
    operators: list

    def __len__(self) -> int:
        return len(self.operators)

    def block_keys(self) -> list:
        """Distinct (k, spin) pairs in first-appearance order."""
        keys = []
        for op in self.operators:
            key = (op.k, op.spin)
            if key not in keys:
                keys.append(key)
        return keys

    def block(self, k: int, spin: int) -> "SubspaceOperatorPool":
        ops = [op for op in self.operators if op.k == k and op.spin == spin]
        return SubspaceOperatorPool(self.kind, self.n_qubits, ops)


def build_pool(ints: CrystalIntegrals, kind: str, ks=None,
               spins=(0, 1)) -> SubspaceOperatorPool:
    """Dressing operators over the reference occupation.

    IP pools annihilate occupied spin orbitals, EA pools create on virtual
    ones, so every operator moves the particle number by exactly one.  Each
    requested k must contribute at least one operator.
    """
    if kind not in (IP, EA):
        raise ValueError(f"pool kind must be {IP!r} or {EA!r}, got {kind!r}")
    mask = hartree_fock_mask(ints)
    smap = ints.orbital_map
    if ks is None:
        ks = range(ints.mesh.n_k)
    ks = [int(k) for k in ks]
    for k in ks:
        if not 0 <= k < ints.mesh.n_k:
            raise IndexOutOfRange(f"k index {k} outside mesh of {ints.mesh.n_k}")
    ops = []
    for k in ks:
        found = False
        for spin in spins:
            for p in range(ints.n_orb):
                q = smap.qubit(k, p, spin)
                filled = bool(mask >> q & 1)
                if filled != (kind == IP):
                    continue
                ladder = FermionOperator.from_term(((q, 0 if kind == IP else 1),))
                ops.append(SubspaceOperator(
                    kind, k, p, spin, q, jordan_wigner(ladder, ints.n_qubits)))
                found = True
        if not found:
            which = "occupied" if kind == IP else "virtual"
            raise EmptySubspace(f"no {which} orbitals at k={k} for an {kind} pool")
    return SubspaceOperatorPool(kind, ints.n_qubits, ops)


def ip_pool(ints: CrystalIntegrals, ks=None, spins=(0, 1)) -> SubspaceOperatorPool:
    return build_pool(ints, IP, ks, spins)


def ea_pool(ints: CrystalIntegrals, ks=None, spins=(0, 1)) -> SubspaceOperatorPool:
    return build_pool(ints, EA, ks, spins)


def measurement_count(pool) -> int:
    """Distinct matrix elements behind one (Hsub, Ssub) pair.

    Hermitian symmetry leaves P(P+1)/2 independent entries per matrix; the
    pair costs P(P+1).  Pool sizes grow linearly with the register, so this
    is quadratic in qubit count.
    """
    p = pool if isinstance(pool, int) else len(pool)
    if p < 0:
        raise ValueError("pool size must be nonnegative")
    return p * (p + 1)


def subspace_matrices(psi: StateVector, ham: PauliSum,
                      pool: SubspaceOperatorPool):
    """Hsub_ij = <R_i psi|H|R_j psi>, Ssub_ij = <R_i psi|R_j psi>.

    Both come back exactly Hermitian; construction roundoff beyond
    HERMITICITY_TOL means corrupted inputs and raises instead.
    """
    if pool.n_qubits != psi.n_qubits:
        raise SizeMismatch("pool register differs from state register")
    if ham.n_qubits != psi.n_qubits:
        raise SizeMismatch("operator register differs from state register")
    dressed = [apply_operator(psi, op.encoded) for op in pool.operators]
    hdressed = [apply_operator(phi, ham) for phi in dressed]
    n = len(dressed)
    hsub = np.zeros((n, n), dtype=complex)
    ssub = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            ssub[i, j] = inner_product(dressed[i], dressed[j])
            hsub[i, j] = inner_product(dressed[i], hdressed[j])
    for mat, name in ((hsub, "Hsub"), (ssub, "Ssub")):
        defect = float(np.max(np.abs(mat - mat.conj().T))) if n else 0.0
        if defect > HERMITICITY_TOL:
            raise HermiticityViolation(
                f"{name} hermiticity defect {defect:.3e} exceeds {HERMITICITY_TOL:.0e}")
    hsub = 0.5 * (hsub + hsub.conj().T)
    ssub = 0.5 * (ssub + ssub.conj().T)
    return hsub, ssub


@dataclass
class GeneralizedSolution:
    """Retained eigenpairs of Hsub C = Ssub C E."""

    energies: np.ndarray
    vectors: np.ndarray
    n_discarded: int
    metric_condition: float


def solve_generalized(hsub, ssub,
                      metric_threshold: float = METRIC_THRESHOLD) -> GeneralizedSolution:
    """Canonical orthogonalization, then an ordinary Hermitian solve.

    Metric eigenvalues below metric_threshold are dropped (near-dependent
    pool directions); the count is reported.  Vectors are columns in the
    original pool basis, normalized to unit Ssub-norm.
    """
    hsub = np.asarray(hsub, dtype=complex)
    ssub = np.asarray(ssub, dtype=complex)
    if hsub.shape != ssub.shape or hsub.ndim != 2 or hsub.shape[0] != hsub.shape[1]:
        raise SizeMismatch(
            f"need square matrices of equal shape, got {hsub.shape} and {ssub.shape}")
    if hsub.shape[0] == 0:
        raise EmptySubspace("empty pool")
    s, u = np.linalg.eigh(ssub)
    keep = s >= metric_threshold
    n_discarded = int(np.count_nonzero(~keep))
    if not np.any(keep):
        raise EmptySubspace(
            f"all {len(s)} metric eigenvalues below threshold {metric_threshold:.3e}")
    x = u[:, keep] / np.sqrt(s[keep])
    ht = x.conj().T @ hsub @ x
    ht = 0.5 * (ht + ht.conj().T)
    energies, coeffs = np.linalg.eigh(ht)
    vectors = x @ coeffs
    metric_condition = float(s.max() / s[keep].min())
    return GeneralizedSolution(energies, vectors, n_discarded, metric_condition)


def pool_solution(psi: StateVector, ham: PauliSum, pool: SubspaceOperatorPool,
                  metric_threshold: float = METRIC_THRESHOLD) -> GeneralizedSolution:
    """Solve over the whole pool at once (test mode; blocks are production)."""
    hsub, ssub = subspace_matrices(psi, ham, pool)
    return solve_generalized(hsub, ssub, metric_threshold)


def block_solutions(psi: StateVector, ham: PauliSum, pool: SubspaceOperatorPool,
                    metric_threshold: float = METRIC_THRESHOLD) -> dict:
    """One GeneralizedSolution per (k, spin) block of the pool."""
    out = {}
    for k, spin in pool.block_keys():
        out[(k, spin)] = pool_solution(psi, ham, pool.block(k, spin),
                                       metric_threshold)
    return out


@dataclass
class BandStructure:
    """Quasiparticle energies per k point, raw and aligned.

    Valence entries are E0 - E^(N-1), conduction entries E^(N+1) - E0, both
    with the sector-constant correction folded in.  `shift` is the highest
    valence energy; aligned columns subtract it so the valence top sits at
    zero.
    """

    e0: float
    k_indices: list
    k_fracs: list
    valence: list
    conduction: list
    shift: float
    metric_conditions: dict
    discards: dict

    def aligned_valence(self) -> list:
        return [v - self.shift for v in self.valence]

    def aligned_conduction(self) -> list:
        return [c - self.shift for c in self.conduction]

    def direct_gap(self):
        """(smallest direct gap, k index where it occurs)."""
        gaps = [float(c.min() - v.max())
                for v, c in zip(self.valence, self.conduction)]
        i = int(np.argmin(gaps))
        return gaps[i], self.k_indices[i]

    def to_csv(self) -> str:
        lines = ["k_index,k_frac,band_kind,band_index,"
                 "energy_hartree,energy_aligned_hartree"]
        for pos, k in enumerate(self.k_indices):
            frac = self.k_fracs[pos]
            for kind, arr in (("v", self.valence[pos]),
                              ("c", self.conduction[pos])):
                for band, energy in enumerate(arr):
                    lines.append(
                        f"{k},{frac:.10g},{kind},{band},"
                        f"{energy:.12e},{energy - self.shift:.12e}")
        return "\n".join(lines) + "\n"


def bands(psi: StateVector, ham: PauliSum, ints: CrystalIntegrals, ks=None,
          metric_threshold: float = METRIC_THRESHOLD, spin: int = 0) -> BandStructure:
    """Assemble valence and conduction bands from per-k subspace solves.

    Closed-shell references make the two spin blocks degenerate, so a single
    spin (default up) represents each band.  The charged-sector constants
    enter through `ints.sector_constant`, keeping the madelung convention in
    one place.
    """
    if ks is None:
        ks = list(range(ints.mesh.n_k))
    e0 = float(expectation(psi, ham).real)
    c0 = ints.sector_constant(ints.n_elec)
    c_minus = ints.sector_constant(ints.n_elec - 1)
    c_plus = ints.sector_constant(ints.n_elec + 1)
    k_indices, k_fracs, valence, conduction = [], [], [], []
    metric_conditions, discards = {}, {}
    for k in ks:
        sol = pool_solution(psi, ham, build_pool(ints, IP, (k,), (spin,)),
                            metric_threshold)
        valence.append(np.sort(e0 - (sol.energies + (c_minus - c0))))
        metric_conditions[(k, "v")] = sol.metric_condition
        discards[(k, "v")] = sol.n_discarded
        sol = pool_solution(psi, ham, build_pool(ints, EA, (k,), (spin,)),
                            metric_threshold)
        conduction.append(np.sort(sol.energies + (c_plus - c0) - e0))
        metric_conditions[(k, "c")] = sol.metric_condition
        discards[(k, "c")] = sol.n_discarded
        k_indices.append(int(k))
        k_fracs.append(ints.mesh.k_frac(k))
    shift = max(float(v.max()) for v in valence)
    return BandStructure(e0, k_indices, k_fracs, valence, conduction, shift,
                         metric_conditions, discards)
