"""Unit cells of 1D hydrogen lattices and the export job description."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class UnitCell:
    """Atom x-positions (Bohr) inside one cell of length l_bohr."""

    positions: tuple
    l_bohr: float
    label: str = ""

    def __post_init__(self):
        if self.l_bohr <= 0:
            raise ValueError(f"cell length must be positive, got {self.l_bohr}")
        for x in self.positions:
            if not 0 <= x < self.l_bohr:
                raise ValueError(f"atom at {x} outside cell [0, {self.l_bohr})")

    @property
    def n_atoms(self) -> int:
        return len(self.positions)


def parse_geometry(spec: str) -> UnitCell:
    """chain:R=<bond> puts two equally spaced H per cell (L = 2R);
    dimer:intra=<a>,inter=<b> puts a compressed pair per cell with the
    closest atoms of neighboring pairs <b> apart (L = a + b).
    """
    kind, _, args = spec.partition(":")
    params = {}
    for chunk in args.split(","):
        if not chunk:
            continue
        key, _, value = chunk.partition("=")
        try:
            params[key.strip()] = float(value)
        except ValueError:
            raise ValueError(f"bad geometry parameter {chunk!r} in {spec!r}")
    if kind == "chain":
        if set(params) != {"R"}:
            raise ValueError(f"chain needs exactly R=<bond>, got {spec!r}")
        r = params["R"]
        return UnitCell(positions=(0.0, r), l_bohr=2 * r,
                        label=f"chain_r{r:g}")
    if kind == "dimer":
        if set(params) != {"intra", "inter"}:
            raise ValueError(f"dimer needs intra=,inter=, got {spec!r}")
        a, b = params["intra"], params["inter"]
        return UnitCell(positions=(0.0, a), l_bohr=a + b,
                        label=f"dimer_a{a:g}_b{b:g}")
    raise ValueError(f"unknown geometry kind {kind!r} in {spec!r}")


@dataclass
class ExportJob:
    cell: UnitCell
    n_k: int
    shift: float
    out: str
    with_ci: bool = True
    scf_tol: float = 1e-12
    scf_maxiter: int = 200
    v0: float = 0.0
    meta_notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n_k < 1:
            raise ValueError(f"n_k must be positive, got {self.n_k}")
        if not 0.0 <= self.shift < 1.0:
            raise ValueError(f"mesh shift must lie in [0, 1), got {self.shift}")
        if not math.isfinite(self.v0):
            raise ValueError(f"zero-mode constant must be finite, got {self.v0}")
        n_qubits = 2 * self.cell.n_atoms * self.n_k  # 2 spins per AO
        if n_qubits > 16:
            raise ValueError(f"{n_qubits} qubits exceeds the 16-qubit budget")
