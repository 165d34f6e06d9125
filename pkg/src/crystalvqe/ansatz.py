"""Excitation enumeration and compilation into parameterized Pauli rotations.

A circuit is a flat, ordered list of rotation gates exp(i*theta*w*P) grouped
into excitation blocks. Real-amplitude variants spend one parameter slot per
excitation on the anti-Hermitian generator T - T^dag; complex-amplitude
variants add a second slot driving i(T + T^dag), so an amplitude a = x + iy
costs two slots. Blocks keep doubles ahead of singles and gates inside a
block follow the sorted (x, z) bitmask order, which makes compilation
bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidExcitation, ParamLengthMismatch, SizeMismatch
from .fermion_ops import excitation_operator
from .integrals import CrystalIntegrals
from .jw_encoding import PauliString, jordan_wigner
from .statevec import (
    StateVector,
    _kernels,
    _phase_prefactor,
    _use_kernels,
    apply_pauli_rotation,
    hartree_fock_mask,
)

# |Re(coeff)| above this in a mapped anti-Hermitian generator is a bug, not noise.
GENERATOR_REAL_TOL = 1e-12


@dataclass(frozen=True)
class Variant:
    name: str
    include_singles: bool
    complex_params: bool


VARIANTS = {
    "buccsd-real": Variant("buccsd-real", include_singles=True, complex_params=False),
    "iuccsd": Variant("iuccsd", include_singles=True, complex_params=True),
    "buccd-real": Variant("buccd-real", include_singles=False, complex_params=False),
    "iuccd": Variant("iuccd", include_singles=False, complex_params=True),
}


def resolve_variant(name) -> Variant:
    if isinstance(name, Variant):
        return name
    key = str(name).lower().replace("_", "-")
    if key not in VARIANTS:
        raise InvalidExcitation(
            f"unknown ansatz variant {name!r}; choose from {sorted(VARIANTS)}"
        )
    return VARIANTS[key]


@dataclass(frozen=True)
class Excitation:
    """Spin-conserving occupied-to-virtual move, indices canonically sorted.

    occ are the annihilated spin orbitals, virt the created ones; residue is
    the total crystal momentum change in units of the mesh spacing, mod n_k.
    """

    kind: str
    occ: tuple[int, ...]
    virt: tuple[int, ...]
    residue: int

    def __post_init__(self):
        if self.kind not in ("single", "double"):
            raise InvalidExcitation(f"unknown excitation kind {self.kind!r}")
        rank = 1 if self.kind == "single" else 2
        if len(self.occ) != rank or len(self.virt) != rank:
            raise InvalidExcitation(
                f"{self.kind} excitation needs {rank} index(es) per side, "
                f"got {self.occ} -> {self.virt}"
            )
        if tuple(sorted(self.occ)) != self.occ or tuple(sorted(self.virt)) != self.virt:
            raise InvalidExcitation(f"indices not sorted: {self.occ} -> {self.virt}")
        if len(set(self.occ)) != len(self.occ) or len(set(self.virt)) != len(self.virt):
            raise InvalidExcitation(f"repeated index: {self.occ} -> {self.virt}")
        if set(self.occ) & set(self.virt):
            raise InvalidExcitation(f"index on both sides: {self.occ} -> {self.virt}")


def _spin(q: int) -> int:
    return q & 1


def enumerate_excitations(ints: CrystalIntegrals, doubles_only: bool = False,
                          momentum_filter: bool = False) -> list[Excitation]:
    """Spin-conserving occupied->virtual excitations off the HF determinant.

    Doubles come first, then singles; each kind is ordered lexicographically
    by (occ, virt). momentum_filter keeps only zero-residue entries.
    """
    mask = hartree_fock_mask(ints)
    n = ints.n_qubits
    smap = ints.orbital_map
    n_k = ints.mesh.n_k
    occ_q = [q for q in range(n) if (mask >> q) & 1]
    virt_q = [q for q in range(n) if not (mask >> q) & 1]

    def k_of(q: int) -> int:
        return smap.unpack(q)[0]

    out: list[Excitation] = []
    for ii in range(len(occ_q)):
        for jj in range(ii + 1, len(occ_q)):
            i, j = occ_q[ii], occ_q[jj]
            for aa in range(len(virt_q)):
                for bb in range(aa + 1, len(virt_q)):
                    a, b = virt_q[aa], virt_q[bb]
                    if _spin(i) + _spin(j) != _spin(a) + _spin(b):
                        continue
                    res = (k_of(a) + k_of(b) - k_of(i) - k_of(j)) % n_k
                    if momentum_filter and res != 0:
                        continue
                    out.append(Excitation("double", (i, j), (a, b), res))
    if not doubles_only:
        for i in occ_q:
            for a in virt_q:
                if _spin(i) != _spin(a):
                    continue
                res = (k_of(a) - k_of(i)) % n_k
                if momentum_filter and res != 0:
                    continue
                out.append(Excitation("single", (i,), (a,), res))
    return out


@dataclass(frozen=True)
class Block:
    """One parameter slot and its compiled rotation gates."""

    excitation: Excitation
    part: str  # "x" for T - T^dag, "y" for i(T + T^dag)
    slot: int
    gates: tuple[tuple[PauliString, float], ...]


@dataclass
class CircuitStats:
    n_params: int
    n_rotation_gates: int
    n_blocks: int


@dataclass
class AnsatzCircuit:
    """Ordered rotation gates with shared parameter slots, ready to execute."""

    variant: str
    n_qubits: int
    blocks: list[Block]
    n_params: int
    # flat gate arrays, one entry per rotation, in execution order
    gxs: np.ndarray = field(repr=False, default=None)
    gzs: np.ndarray = field(repr=False, default=None)
    gprefs: np.ndarray = field(repr=False, default=None)
    gweights: np.ndarray = field(repr=False, default=None)
    gslots: np.ndarray = field(repr=False, default=None)

    @property
    def n_gates(self) -> int:
        return int(self.gxs.shape[0])

    def stats(self) -> CircuitStats:
        return CircuitStats(self.n_params, self.n_gates, len(self.blocks))

    def angles(self, params: np.ndarray) -> np.ndarray:
        params = np.asarray(params, dtype=np.float64)
        if params.shape != (self.n_params,):
            raise ParamLengthMismatch(
                f"circuit has {self.n_params} parameters, got shape {params.shape}"
            )
        if self.n_gates == 0:
            return np.zeros(0, dtype=np.float64)
        return params[self.gslots] * self.gweights


def _generator_gates(gen, n_qubits: int) -> tuple[tuple[PauliString, float], ...]:
    """JW-map an anti-Hermitian fermionic generator into (string, weight) pairs.

    The image must be sum_j i w_j P_j with real w_j; any real coefficient
    part signals a broken generator and raises.
    """
    psum = jordan_wigner(gen, n_qubits)
    gates = []
    for string, coeff in psum.strings():
        if abs(coeff.real) > GENERATOR_REAL_TOL:
            raise SizeMismatch(
                f"generator term {string.label()} has non-imaginary "
                f"coefficient {coeff}"
            )
        gates.append((string, float(coeff.imag)))
    return tuple(gates)


def compile_circuit(excs: list[Excitation], variant, n_qubits: int) -> AnsatzCircuit:
    """Fix gate order and parameter slots for a list of excitations."""
    spec = resolve_variant(variant)
    blocks: list[Block] = []
    slot = 0
    for exc in excs:
        t_op = excitation_operator(exc.occ, exc.virt)
        t_dag = t_op.adjoint()
        parts = [("x", t_op - t_dag)]
        if spec.complex_params:
            parts.append(("y", 1j * (t_op + t_dag)))
        for part_name, gen in parts:
            blocks.append(Block(exc, part_name, slot,
                                _generator_gates(gen, n_qubits)))
            slot += 1
    n_gates = sum(len(b.gates) for b in blocks)
    gxs = np.zeros(n_gates, dtype=np.int64)
    gzs = np.zeros(n_gates, dtype=np.int64)
    gprefs = np.zeros(n_gates, dtype=np.complex128)
    gweights = np.zeros(n_gates, dtype=np.float64)
    gslots = np.zeros(n_gates, dtype=np.int64)
    m = 0
    for block in blocks:
        for string, w in block.gates:
            gxs[m] = string.x
            gzs[m] = string.z
            gprefs[m] = _phase_prefactor(string.x, string.z)
            gweights[m] = w
            gslots[m] = block.slot
            m += 1
    return AnsatzCircuit(variant=spec.name, n_qubits=n_qubits, blocks=blocks,
                         n_params=slot, gxs=gxs, gzs=gzs, gprefs=gprefs,
                         gweights=gweights, gslots=gslots)


def build_ansatz(ints: CrystalIntegrals, variant,
                 momentum_filter: bool = False) -> AnsatzCircuit:
    """Enumerate and compile in one step for a loaded integral set."""
    spec = resolve_variant(variant)
    excs = enumerate_excitations(ints, doubles_only=not spec.include_singles,
                                 momentum_filter=momentum_filter)
    return compile_circuit(excs, spec, ints.n_qubits)


def prepare_state(circ: AnsatzCircuit, params: np.ndarray,
                  ref: StateVector) -> StateVector:
    """Run the circuit on a copy of the reference state."""
    if ref.n_qubits != circ.n_qubits:
        raise SizeMismatch(
            f"reference has {ref.n_qubits} qubits, circuit {circ.n_qubits}"
        )
    angles = circ.angles(params)
    state = ref.copy()
    if circ.n_gates == 0:
        return state
    if _use_kernels(circ.n_qubits):
        _kernels.k_apply_circuit(state.amps, circ.gxs, circ.gzs, circ.gprefs,
                                 angles, _kernels._PAR16)
    else:
        for m in range(circ.n_gates):
            apply_pauli_rotation(
                state,
                PauliString(int(circ.gxs[m]), int(circ.gzs[m]), circ.n_qubits),
                float(angles[m]),
            )
    return state


def export_text(circ: AnsatzCircuit) -> str:
    """One line per rotation: ROT <pauli-label> <weight> <param-slot>."""
    lines = [f"# variant={circ.variant} n_qubits={circ.n_qubits} "
             f"n_params={circ.n_params} n_gates={circ.n_gates}"]
    for m in range(circ.n_gates):
        label = PauliString(int(circ.gxs[m]), int(circ.gzs[m]),
                            circ.n_qubits).label()
        lines.append(f"ROT {label} {circ.gweights[m]:+.16e} {int(circ.gslots[m])}")
    return "\n".join(lines) + "\n"
