"""Second-quantized operators on spin-orbital modes, kept normal ordered.

A term is a tuple of (mode, dagger) pairs, dagger 1 for creation. The
canonical form puts creation operators first in strictly decreasing mode
order, then annihilation operators in strictly decreasing mode order; every
constructor and arithmetic result is reduced to that form, summing the
anticommutator delta terms as it goes. Coefficients with magnitude below
PRUNE_TOL are dropped after each arithmetic operation.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidExcitation
from .integrals import CrystalIntegrals

PRUNE_TOL = 1e-14

LadderOp = tuple[int, int]
Term = tuple[LadderOp, ...]


def _insert_annihilation(term: Term, mode: int) -> list[tuple[Term, complex]]:
    """Multiply a canonical term by a_mode on the right."""
    n_cre = sum(1 for _, d in term if d)
    ann = [m for m, d in term[n_cre:]]
    # a_mode commutes (anti) past trailing annihilations into sorted position.
    sign = 1.0
    pos = len(ann)
    while pos > 0 and ann[pos - 1] < mode:
        sign = -sign
        pos -= 1
    if pos > 0 and ann[pos - 1] == mode:
        return []
    new_ann = ann[:pos] + [mode] + ann[pos:]
    new_term = term[:n_cre] + tuple((m, 0) for m in new_ann)
    return [(new_term, sign)]


def _insert_creation(term: Term, mode: int) -> list[tuple[Term, complex]]:
    """Multiply a canonical term by c^dag_mode on the right."""
    n_cre = sum(1 for _, d in term if d)
    cre = [m for m, d in term[:n_cre]]
    ann = [m for m, d in term[n_cre:]]
    results: list[tuple[Term, complex]] = []
    # Walk the creation past the annihilation string, spawning a delta term
    # at the matching mode.
    sign = 1.0
    for idx in range(len(ann) - 1, -1, -1):
        if ann[idx] == mode:
            reduced = ann[:idx] + ann[idx + 1:]
            rest = tuple((m, 1) for m in cre) + tuple((m, 0) for m in reduced)
            results.append((rest, sign))
        sign = -sign
    # Now the creation sits left of all annihilations; insert into the
    # descending creation string.
    pos = len(cre)
    csign = sign
    while pos > 0 and cre[pos - 1] < mode:
        csign = -csign
        pos -= 1
    if not (pos > 0 and cre[pos - 1] == mode):
        new_cre = cre[:pos] + [mode] + cre[pos:]
        new_term = (tuple((m, 1) for m in new_cre)
                    + tuple((m, 0) for m in ann))
        results.append((new_term, csign))
    return results


def _normal_order_raw(ops: tuple[LadderOp, ...], coeff: complex) -> dict[Term, complex]:
    """Reduce an arbitrary ladder-operator product to canonical terms."""
    acc: dict[Term, complex] = {(): coeff}
    for mode, dagger in ops:
        nxt: dict[Term, complex] = {}
        insert = _insert_creation if dagger else _insert_annihilation
        for term, c in acc.items():
            for new_term, sign in insert(term, mode):
                nxt[new_term] = nxt.get(new_term, 0.0) + c * sign
        acc = nxt
    return acc


class FermionOperator:
    """A complex linear combination of normal-ordered ladder products."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict[Term, complex] | None = None):
        self.terms: dict[Term, complex] = {}
        if terms:
            for t, c in terms.items():
                if abs(c) > PRUNE_TOL:
                    self.terms[t] = complex(c)

    @classmethod
    def from_term(cls, ops, coeff: complex = 1.0) -> "FermionOperator":
        """Build from a raw product of (mode, dagger) pairs, any order."""
        ops = tuple((int(m), int(d)) for m, d in ops)
        for m, _ in ops:
            if m < 0:
                raise InvalidExcitation(f"negative mode index {m}")
        return cls(_normal_order_raw(ops, complex(coeff)))

    @classmethod
    def identity(cls, coeff: complex = 1.0) -> "FermionOperator":
        return cls({(): complex(coeff)})

    @classmethod
    def zero(cls) -> "FermionOperator":
        return cls({})

    def __add__(self, other: "FermionOperator") -> "FermionOperator":
        out = dict(self.terms)
        for t, c in other.terms.items():
            out[t] = out.get(t, 0.0) + c
        return FermionOperator(out)

    def __sub__(self, other: "FermionOperator") -> "FermionOperator":
        out = dict(self.terms)
        for t, c in other.terms.items():
            out[t] = out.get(t, 0.0) - c
        return FermionOperator(out)

    def __mul__(self, other):
        if isinstance(other, FermionOperator):
            out: dict[Term, complex] = {}
            for t1, c1 in self.terms.items():
                for t2, c2 in other.terms.items():
                    for t, c in _normal_order_raw(t1 + t2, c1 * c2).items():
                        out[t] = out.get(t, 0.0) + c
            return FermionOperator(out)
        return FermionOperator({t: c * other for t, c in self.terms.items()})

    def __rmul__(self, scalar) -> "FermionOperator":
        return FermionOperator({t: c * scalar for t, c in self.terms.items()})

    def adjoint(self) -> "FermionOperator":
        out: dict[Term, complex] = {}
        for term, c in self.terms.items():
            rev = tuple((m, 1 - d) for m, d in reversed(term))
            for t, cc in _normal_order_raw(rev, np.conj(c)).items():
                out[t] = out.get(t, 0.0) + cc
        return FermionOperator(out)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        diff = self - self.adjoint()
        return all(abs(c) <= tol for c in diff.terms.values())

    def max_mode(self) -> int:
        """Largest mode index appearing, -1 for scalar operators."""
        mx = -1
        for term in self.terms:
            for m, _ in term:
                mx = max(mx, m)
        return mx

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        if not self.terms:
            return "FermionOperator<0>"
        parts = []
        for term, c in sorted(self.terms.items()):
            ops = " ".join(f"{m}^" if d else f"{m}" for m, d in term)
            parts.append(f"({c:.6g}) [{ops}]")
        return "FermionOperator<" + " + ".join(parts) + ">"


def normal_order(op: FermionOperator) -> FermionOperator:
    """Canonical form of an operator; a no-op on class instances.

    Exists so raw term lists can be pushed through the same reduction:
    normal_order(FermionOperator.from_term(...)) is idempotent.
    """
    out: dict[Term, complex] = {}
    for term, c in op.terms.items():
        for t, cc in _normal_order_raw(term, c).items():
            out[t] = out.get(t, 0.0) + cc
    return FermionOperator(out)


def build_hamiltonian(ints: CrystalIntegrals) -> FermionOperator:
    """Assemble the electronic Hamiltonian of an integral table.

    H = sum_k sum_pq sum_s t[k][p][q] c^_{pks} c_{qks}
      + 1/2 sum' v[pq|rs] sum_{s,t} c^_{p kp s} c^_{r kr t} c_{s ks t} c_{q kq s}
      + sector_constant(n_elec) * 1

    The primed sum runs over every momentum-conserving chemist key of the
    expanded v map; spin is expanded here, the table stores spatial orbitals.
    """
    smap = ints.orbital_map
    acc: dict[Term, complex] = {}

    def add(ops, coeff):
        for t, c in _normal_order_raw(ops, coeff).items():
            acc[t] = acc.get(t, 0.0) + c

    for k in range(ints.mesh.n_k):
        for p in range(ints.n_orb):
            for q in range(ints.n_orb):
                coeff = ints.t[k, p, q]
                if abs(coeff) <= PRUNE_TOL:
                    continue
                for spin in (0, 1):
                    add(((smap.qubit(k, p, spin), 1),
                         (smap.qubit(k, q, spin), 0)), coeff)

    for (kp, p, kq, q, kr, r, ks, s), val in ints.v.items():
        if abs(val) <= PRUNE_TOL:
            continue
        half = 0.5 * val
        for sig in (0, 1):
            for tau in (0, 1):
                add(((smap.qubit(kp, p, sig), 1),
                     (smap.qubit(kr, r, tau), 1),
                     (smap.qubit(ks, s, tau), 0),
                     (smap.qubit(kq, q, sig), 0)), half)

    acc[()] = acc.get((), 0.0) + ints.sector_constant(ints.n_elec)
    return FermionOperator(acc)


def excitation_operator(occ: tuple[int, ...], virt: tuple[int, ...]) -> FermionOperator:
    """Bare excitation T moving electrons from occ modes into virt modes.

    Singles: T = c^_a c_i for occ=(i,), virt=(a,).
    Doubles: T = c^_a c^_b c_j c_i for occ=(i, j), virt=(a, b).
    """
    if len(occ) != len(virt) or len(occ) not in (1, 2):
        raise InvalidExcitation(f"unsupported excitation rank {len(occ)}x{len(virt)}")
    if len(set(occ)) != len(occ) or len(set(virt)) != len(virt):
        raise InvalidExcitation(f"repeated mode in excitation {occ} -> {virt}")
    if set(occ) & set(virt):
        raise InvalidExcitation(f"modes {set(occ) & set(virt)} on both sides")
    if len(occ) == 1:
        ops = ((virt[0], 1), (occ[0], 0))
    else:
        ops = ((virt[0], 1), (virt[1], 1), (occ[1], 0), (occ[0], 0))
    return FermionOperator.from_term(ops)


def excitation_generator(occ: tuple[int, ...], virt: tuple[int, ...],
                         amplitude: complex) -> FermionOperator:
    """Anti-Hermitian generator a*T - conj(a)*T^dag for one excitation."""
    t_op = excitation_operator(occ, virt)
    return amplitude * t_op - np.conj(amplitude) * t_op.adjoint()
