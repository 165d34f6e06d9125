"""Dense statevector engine over the full 2^n qubit register.

Amplitudes live in one contiguous complex128 array indexed by the basis
integer b, qubit q being bit q of b. Pauli strings act through index
arithmetic only (gather on b XOR x plus parity signs), never through dense
matrices; that keeps 16-qubit registers comfortable. The numpy path below
is the reference semantics; jitted kernels from _kernels.py take over for
larger registers and are held to the numpy behavior by the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IndexOutOfRange, OddElectronCount, ParseError, SizeMismatch
from .integrals import CrystalIntegrals
from .jw_encoding import PauliString, PauliSum

try:
    from . import _kernels
    HAVE_KERNELS = True
except ImportError:  # pragma: no cover - numba is a hard dep, but stay usable
    _kernels = None
    HAVE_KERNELS = False

# Registers at or above this size route through the jitted kernels.
KERNEL_MIN_QUBITS = 10
_FORCE_PATH: str | None = None  # "numpy" | "kernel" | None, test hook

_IDX_CACHE: dict[int, np.ndarray] = {}


def _indices(n_qubits: int) -> np.ndarray:
    idx = _IDX_CACHE.get(n_qubits)
    if idx is None:
        idx = np.arange(1 << n_qubits, dtype=np.int64)
        _IDX_CACHE[n_qubits] = idx
    return idx


def _use_kernels(n_qubits: int) -> bool:
    if _FORCE_PATH == "numpy":
        return False
    if _FORCE_PATH == "kernel":
        return HAVE_KERNELS
    return HAVE_KERNELS and n_qubits >= KERNEL_MIN_QUBITS


def _phase_prefactor(x: int, z: int) -> complex:
    return 1j ** (bin(x & z).count("1") & 3)


@dataclass
class StateVector:
    """Amplitudes over the computational basis of a fixed register."""

    amps: np.ndarray
    n_qubits: int
    normalized: bool = True

    def copy(self) -> "StateVector":
        return StateVector(self.amps.copy(), self.n_qubits, self.normalized)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def __len__(self) -> int:
        return self.amps.shape[0]


def zero_state(n_qubits: int) -> StateVector:
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(amps, n_qubits)


def basis_state(n_qubits: int, bits: int) -> StateVector:
    if not 0 <= bits < (1 << n_qubits):
        raise IndexOutOfRange(f"basis index {bits} outside {n_qubits}-qubit register")
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[bits] = 1.0
    return StateVector(amps, n_qubits)


def hartree_fock_mask(ints: CrystalIntegrals) -> int:
    """Occupation bitmask of the restricted reference determinant.

    Spin orbitals are filled in band-major order (band index, then k, then
    spin), matching a generator that stores bands energy-sorted per k.
    """
    if ints.n_elec % 2:
        raise OddElectronCount(
            f"restricted reference needs even n_elec, got {ints.n_elec}"
        )
    smap = ints.orbital_map
    order = [smap.qubit(k, p, spin)
             for p in range(ints.n_orb)
             for k in range(ints.mesh.n_k)
             for spin in (0, 1)]
    mask = 0
    for q in order[:ints.n_elec]:
        mask |= 1 << q
    return mask


def hartree_fock_state(ints: CrystalIntegrals) -> StateVector:
    return basis_state(ints.n_qubits, hartree_fock_mask(ints))


def apply_pauli(state: StateVector, string: PauliString) -> StateVector:
    """P|state>, a new vector."""
    if string.n_qubits != state.n_qubits:
        raise SizeMismatch("Pauli string register differs from state register")
    idx = _indices(state.n_qubits)
    pref = _phase_prefactor(string.x, string.z)
    signs = 1.0 - 2.0 * (np.bitwise_count(idx & string.z) & 1)
    w = signs * state.amps
    out = pref * w[idx ^ string.x]
    return StateVector(out, state.n_qubits, state.normalized)


def apply_pauli_rotation(state: StateVector, string: PauliString,
                         angle: float) -> None:
    """In-place exp(i*angle*P)|state> = cos(angle)|state> + i sin(angle) P|state>."""
    if string.n_qubits != state.n_qubits:
        raise SizeMismatch("Pauli string register differs from state register")
    if _use_kernels(state.n_qubits):
        _kernels.k_apply_circuit(
            state.amps,
            np.array([string.x], dtype=np.int64),
            np.array([string.z], dtype=np.int64),
            np.array([_phase_prefactor(string.x, string.z)], dtype=np.complex128),
            np.array([angle], dtype=np.float64),
            _kernels._PAR16,
        )
        return
    rotated = apply_pauli(state, string)
    state.amps *= np.cos(angle)
    state.amps += (1j * np.sin(angle)) * rotated.amps


def apply_operator(state: StateVector, psum: PauliSum) -> StateVector:
    """O|state>; the result is in general unnormalized."""
    if psum.n_qubits != state.n_qubits:
        raise SizeMismatch("operator register differs from state register")
    xs, zs, cs = psum.to_arrays()
    out = np.zeros_like(state.amps)
    if _use_kernels(state.n_qubits):
        _kernels.k_apply_sum(state.amps, xs, zs, cs,
                             _kernels._PAR16, _kernels._POP16, out)
    else:
        idx = _indices(state.n_qubits)
        for x, z, c in zip(xs, zs, cs):
            x = int(x)
            z = int(z)
            signs = 1.0 - 2.0 * (np.bitwise_count(idx & z) & 1)
            w = signs * state.amps
            out += (c * _phase_prefactor(x, z)) * w[idx ^ x]
    return StateVector(out, state.n_qubits, normalized=False)


def expectation(state: StateVector, psum: PauliSum) -> complex:
    """<state|O|state> without materializing O."""
    if psum.n_qubits != state.n_qubits:
        raise SizeMismatch("operator register differs from state register")
    xs, zs, cs = psum.to_arrays()
    if _use_kernels(state.n_qubits):
        return complex(_kernels.k_expectation(
            state.amps, xs, zs, cs, _kernels._PAR16, _kernels._POP16))
    idx = _indices(state.n_qubits)
    total = 0.0 + 0.0j
    for x, z, c in zip(xs, zs, cs):
        x = int(x)
        z = int(z)
        signs = 1.0 - 2.0 * (np.bitwise_count(idx & z) & 1)
        w = signs * state.amps
        total += c * _phase_prefactor(x, z) * np.vdot(state.amps, w[idx ^ x])
    return complex(total)


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b> with the left argument conjugated."""
    if a.n_qubits != b.n_qubits:
        raise SizeMismatch("states live on different registers")
    return complex(np.vdot(a.amps, b.amps))


def save_state(state: StateVector, path: str) -> None:
    """Debug dump: 8-byte little-endian qubit count, then LE complex128 amps."""
    with open(path, "wb") as fh:
        fh.write(np.uint64(state.n_qubits).astype("<u8").tobytes())
        fh.write(state.amps.astype("<c16").tobytes())


def load_state(path: str) -> StateVector:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 8:
        raise ParseError("state dump shorter than its header")
    n = int(np.frombuffer(raw[:8], dtype="<u8")[0])
    if n > 40:
        raise ParseError(f"implausible qubit count {n} in state dump")
    body = raw[8:]
    if len(body) != 16 * (1 << n):
        raise ParseError(
            f"state dump holds {len(body)} amplitude bytes, expected {16 * (1 << n)}"
        )
    amps = np.frombuffer(body, dtype="<c16").astype(np.complex128)
    return StateVector(amps, n)
