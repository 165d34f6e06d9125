"""Exception types shared across the toolkit."""


class CrystalVqeError(Exception):
    """Base class for all toolkit errors."""


class ParseError(CrystalVqeError):
    """Input file is malformed or violates the KINT schema."""


class MomentumViolation(CrystalVqeError):
    """A two-body record breaks crystal-momentum conservation."""


class HermiticityViolation(CrystalVqeError):
    """Data that must be Hermitian fails its symmetry check."""


class SectorOutOfRange(CrystalVqeError):
    """Requested particle-number sector does not fit the register."""


class IndexOutOfRange(CrystalVqeError):
    """Mode or qubit index outside the register."""


class SizeMismatch(CrystalVqeError):
    """Operands act on registers of different sizes."""


class OddElectronCount(CrystalVqeError):
    """Restricted reference determinant needs an even electron count."""


class InvalidExcitation(CrystalVqeError):
    """Excitation indices are not a valid occupied-to-virtual move."""


class ParamLengthMismatch(CrystalVqeError):
    """Parameter vector length does not match the circuit."""


class SectorEmpty(CrystalVqeError):
    """No basis state satisfies the sector constraints."""


class EmptySubspace(CrystalVqeError):
    """Subspace solve has no retained vectors (pool empty or metric rank 0)."""
