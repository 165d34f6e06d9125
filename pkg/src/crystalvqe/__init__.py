"""Ground states and quasiparticle bands of periodic lattice models.

The toolkit loads crystalline integral tables (KINT files), assembles the
second-quantized Hamiltonian, maps it to qubits, prepares unitary
coupled-cluster states on an exact statevector engine, optimizes them
variationally, and extracts quasiparticle band structures by subspace
expansion. An exact-diagonalization oracle backs every approximate number.
"""

from . import (  # noqa: F401
    ansatz,
    cli,
    errors,
    fermion_ops,
    integrals,
    jw_encoding,
    oracle,
    qse,
    refdata,
    statevec,
    vqe,
)
from .fermion_ops import build_hamiltonian  # noqa: F401
from .integrals import CrystalIntegrals, KMesh, SpinOrbitalMap  # noqa: F401

__version__ = "0.1.0"
