"""Jordan-Wigner mapping onto bitmask-encoded Pauli strings.

A Pauli string on n qubits is a pair of bitmasks (x, z); qubit q carries
I, X, Z, Y for bit patterns (0,0), (1,0), (0,1), (1,1). The string stands
for the Hermitian operator prod_q i^{x_q z_q} X^{x_q} Z^{z_q}, so (1,1) is
exactly Y. Acting on a computational basis state |b> (qubit q is bit q):

    P |b> = i^{popcount(x & z)} * (-1)^{popcount(z & b)} |b XOR x>

The ladder operator of mode j maps as c_j -> (X_j + i Y_j)/2 (x) Z_{j-1..0},
which reproduces the occupation-number sign (-1)^{n_0 + ... + n_{j-1}}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SizeMismatch
from .fermion_ops import FermionOperator

COEFF_PRUNE = 1e-14
HERMITIAN_TOL = 1e-12

_PAULI_CHAR = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}


@dataclass(frozen=True)
class PauliString:
    """One Pauli word as (x-mask, z-mask) over a fixed register size."""

    x: int
    z: int
    n_qubits: int

    def __post_init__(self):
        limit = 1 << self.n_qubits
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise SizeMismatch(
                f"masks ({self.x:#x},{self.z:#x}) exceed {self.n_qubits} qubits"
            )

    @property
    def weight(self) -> int:
        """Number of non-identity tensor factors."""
        return int(bin(self.x | self.z).count("1"))

    def label(self) -> str:
        """Letters with qubit 0 leftmost, e.g. 'XYI' on three qubits."""
        out = []
        for q in range(self.n_qubits):
            out.append(_PAULI_CHAR[((self.x >> q) & 1, (self.z >> q) & 1)])
        return "".join(out)

    def __str__(self) -> str:
        return self.label()


def pauli_product(a: PauliString, b: PauliString) -> tuple[PauliString, complex]:
    """Product a*b as (string, phase), phase in {1, -1, i, -i}.

    Derived from i^{x.z} X^x Z^z normal form: commuting b's X block past
    a's Z block contributes (-1)^{popcount(z_a & x_b)}.
    """
    if a.n_qubits != b.n_qubits:
        raise SizeMismatch(f"register sizes differ: {a.n_qubits} vs {b.n_qubits}")
    x3 = a.x ^ b.x
    z3 = a.z ^ b.z
    phi = (bin(a.x & a.z).count("1") + bin(b.x & b.z).count("1")
           - bin(x3 & z3).count("1") + 2 * bin(a.z & b.x).count("1")) % 4
    return PauliString(x3, z3, a.n_qubits), (1j) ** phi


class PauliSum:
    """Linear combination of Pauli strings with complex coefficients.

    Terms are keyed by (x, z); the register size is fixed at construction.
    Mask/coefficient arrays for kernel-style evaluation are built lazily
    and invalidated on mutation.
    """

    __slots__ = ("n_qubits", "terms", "_arrays")

    def __init__(self, n_qubits: int, terms: dict[tuple[int, int], complex] | None = None):
        self.n_qubits = int(n_qubits)
        self.terms: dict[tuple[int, int], complex] = {}
        self._arrays = None
        if terms:
            for key, c in terms.items():
                if abs(c) > COEFF_PRUNE:
                    self.terms[key] = complex(c)

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> "PauliSum":
        return cls(n_qubits, {(0, 0): complex(coeff)})

    def copy(self) -> "PauliSum":
        return PauliSum(self.n_qubits, dict(self.terms))

    def add_term(self, x: int, z: int, coeff: complex) -> None:
        key = (x, z)
        c = self.terms.get(key, 0.0) + coeff
        if abs(c) > COEFF_PRUNE:
            self.terms[key] = c
        else:
            self.terms.pop(key, None)
        self._arrays = None

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if self.n_qubits != other.n_qubits:
            raise SizeMismatch("cannot add sums on different registers")
        out = dict(self.terms)
        for key, c in other.terms.items():
            out[key] = out.get(key, 0.0) + c
        return PauliSum(self.n_qubits, out)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (-1.0) * other

    def __rmul__(self, scalar) -> "PauliSum":
        return PauliSum(self.n_qubits,
                        {k: c * scalar for k, c in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, PauliSum):
            return self.__rmul__(other)
        if self.n_qubits != other.n_qubits:
            raise SizeMismatch("cannot multiply sums on different registers")
        out: dict[tuple[int, int], complex] = {}
        n = self.n_qubits
        for (x1, z1), c1 in self.terms.items():
            s1 = PauliString(x1, z1, n)
            for (x2, z2), c2 in other.terms.items():
                s3, ph = pauli_product(s1, PauliString(x2, z2, n))
                key = (s3.x, s3.z)
                out[key] = out.get(key, 0.0) + c1 * c2 * ph
        return PauliSum(n, out)

    def adjoint(self) -> "PauliSum":
        return PauliSum(self.n_qubits,
                        {k: np.conj(c) for k, c in self.terms.items()})

    def hermiticity_defect(self) -> float:
        """Largest imaginary part over the coefficients."""
        if not self.terms:
            return 0.0
        return max(abs(c.imag) for c in self.terms.values())

    def __len__(self) -> int:
        return len(self.terms)

    def strings(self) -> list[tuple[PauliString, complex]]:
        """Terms in the deterministic (x, z) sort order."""
        return [(PauliString(x, z, self.n_qubits), c)
                for (x, z), c in sorted(self.terms.items())]

    def to_arrays(self):
        """(x-masks, z-masks, coefficients) as numpy arrays, sorted order."""
        if self._arrays is None:
            keys = sorted(self.terms)
            xs = np.array([k[0] for k in keys], dtype=np.int64)
            zs = np.array([k[1] for k in keys], dtype=np.int64)
            cs = np.array([self.terms[k] for k in keys], dtype=np.complex128)
            self._arrays = (xs, zs, cs)
        return self._arrays

    def __repr__(self) -> str:
        return f"PauliSum<{len(self.terms)} terms on {self.n_qubits} qubits>"


def _ladder_factor(mode: int, dagger: int, n_qubits: int) -> PauliSum:
    """JW image of a single ladder operator."""
    chain = (1 << mode) - 1
    x = 1 << mode
    sign = -1.0 if dagger else 1.0
    out = PauliSum(n_qubits)
    out.add_term(x, chain, 0.5)
    out.add_term(x, chain | x, sign * 0.5j)
    return out


def jordan_wigner(op: FermionOperator, n_qubits: int) -> PauliSum:
    """Map a fermionic operator onto the qubit register.

    Modes index qubits directly; the register must cover every mode. A
    Hermitian input yields real coefficients up to roundoff (checked by the
    caller where it matters, see HERMITIAN_TOL).
    """
    top = op.max_mode()
    if top >= n_qubits:
        raise SizeMismatch(f"operator touches mode {top}, register has {n_qubits}")
    total = PauliSum(n_qubits)
    for term, coeff in op.terms.items():
        part = PauliSum.identity(n_qubits, coeff)
        for mode, dagger in term:
            part = part * _ladder_factor(mode, dagger, n_qubits)
        total = total + part
    return total


def real_coefficients(psum: PauliSum, tol: float = HERMITIAN_TOL) -> PauliSum:
    """Drop imaginary coefficient parts, checking they are below tol."""
    defect = psum.hermiticity_defect()
    if defect > tol:
        raise SizeMismatch(
            f"coefficients carry imaginary parts up to {defect:.3e}, "
            f"not a Hermitian combination (tol {tol:.1e})"
        )
    return PauliSum(psum.n_qubits,
                    {k: complex(c.real, 0.0) for k, c in psum.terms.items()})
