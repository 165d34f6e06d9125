"""Integral exporter for 1D periodic hydrogen systems.

Builds wrapped-Gaussian AO integrals on a twisted torus, runs a
symmetry-adapted restricted HF, attaches determinant-CI reference
energies, and writes the result in the KINT interchange format.
"""

from . import ci, emit, geometry, scf, sto3g, torus

__all__ = ["ci", "emit", "geometry", "scf", "sto3g", "torus"]
__version__ = "0.1.0"
