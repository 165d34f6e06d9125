"""Determinant CI checks: a dense ladder-matrix oracle for the fermion
sign bookkeeping, an analytic two-site interacting case, and the
momentum block structure of real exports."""

import numpy as np
import pytest
from itertools import combinations

from kintexport.ci import (ci_references, leak_between_blocks, momentum_of,
                           sector_hamiltonian, sector_masks, sector_spectrum)
from kintexport.geometry import parse_geometry
from kintexport.scf import MoIntegrals, mo_transform, ring_of, run_rhf
from kintexport.torus import ao_integrals


def dense_ladders(n_so):
    """Annihilation matrices over the full Fock space, basis index = mask."""
    dim = 1 << n_so
    ops = []
    for q in range(n_so):
        bit = 1 << q
        mat = np.zeros((dim, dim))
        for mask in range(dim):
            if mask & bit:
                sign = (-1.0) ** bin(mask & (bit - 1)).count("1")
                mat[mask ^ bit, mask] = sign
        ops.append(mat)
    return ops


def dense_hamiltonian(mo: MoIntegrals):
    """H over the full Fock space by explicit ladder matrix products."""
    n_so = 2 * mo.n_mo
    a = dense_ladders(n_so)
    adag = [m.T for m in a]
    dim = 1 << n_so
    h = np.zeros((dim, dim), dtype=complex)
    t_flat = np.zeros((mo.n_mo, mo.n_mo), dtype=complex)
    for j in range(mo.n_k):
        sl = slice(j * mo.n_orb, (j + 1) * mo.n_orb)
        t_flat[sl, sl] = mo.t[j]
    for mu in range(mo.n_mo):
        for nu in range(mo.n_mo):
            if abs(t_flat[mu, nu]) < 1e-14:
                continue
            for s in (0, 1):
                h += t_flat[mu, nu] * adag[2 * mu + s] @ a[2 * nu + s]
    for mu in range(mo.n_mo):
        for nu in range(mo.n_mo):
            for rho in range(mo.n_mo):
                for sg in range(mo.n_mo):
                    val = mo.w[mu, nu, rho, sg]
                    if abs(val) < 1e-14:
                        continue
                    for s in (0, 1):
                        for t in (0, 1):
                            h += (0.5 * val * adag[2 * mu + s]
                                  @ adag[2 * rho + t] @ a[2 * sg + t]
                                  @ a[2 * nu + s])
    return h


def random_mo(n_orb, seed):
    """Random Hermitian one-body and chemist-symmetric two-body tables
    on a single k point."""
    rng = np.random.default_rng(seed)
    t = rng.normal(size=(n_orb, n_orb)) + 1j * rng.normal(size=(n_orb, n_orb))
    t = 0.5 * (t + t.conj().T)
    w = (rng.normal(size=(n_orb,) * 4)
         + 1j * rng.normal(size=(n_orb,) * 4))
    w = 0.25 * (w + np.conj(np.transpose(w, (1, 0, 3, 2)))
                + np.transpose(w, (2, 3, 0, 1))
                + np.conj(np.transpose(w, (3, 2, 1, 0))))
    eps = np.zeros((1, n_orb))
    return MoIntegrals(n_k=1, n_orb=n_orb, n_occ=1, t=t[None, :, :], w=w,
                       eps=eps, e_nn=0.3, e_hf=0.0)


class TestSignOracle:
    @pytest.mark.parametrize("n_orb,seed", [(2, 0), (2, 5), (3, 1)])
    def test_sector_blocks_match_dense_ladders(self, n_orb, seed):
        mo = random_mo(n_orb, seed)
        dense = dense_hamiltonian(mo)
        assert np.abs(dense - dense.conj().T).max() < 1e-12
        n_so = 2 * n_orb
        for n_a, n_b in [(1, 1), (1, 0), (2, 1), (1, 2)]:
            if n_a > n_orb or n_b > n_orb:
                continue
            ham, masks = sector_hamiltonian(mo, n_a, n_b)
            proj = dense[np.ix_(masks.astype(int), masks.astype(int))]
            assert np.abs(ham.toarray() - proj).max() < 1e-12

    def test_dense_oracle_respects_sector_structure(self):
        mo = random_mo(2, 3)
        dense = dense_hamiltonian(mo)
        masks = sector_masks(4, 1, 1).astype(int)
        outside = [m for m in range(16) if m not in set(masks)]
        assert np.abs(dense[np.ix_(outside, masks)]).max() < 1e-14


class TestTwoSiteInteracting:
    def test_half_filled_ground_energy_analytic(self):
        # two orbitals, hopping -th, on-site repulsion u: the singlet
        # ground energy is (u - sqrt(u^2 + 16 th^2)) / 2
        th, u = 0.9, 1.7
        n_orb = 2
        t = np.array([[0.0, -th], [-th, 0.0]], dtype=complex)
        w = np.zeros((2, 2, 2, 2), dtype=complex)
        w[0, 0, 0, 0] = u
        w[1, 1, 1, 1] = u
        mo = MoIntegrals(n_k=1, n_orb=2, n_occ=1, t=t[None, :, :], w=w,
                         eps=np.zeros((1, 2)), e_nn=0.0, e_hf=0.0)
        spec = sector_spectrum(mo, 1, 1)
        expected = 0.5 * (u - np.sqrt(u * u + 16 * th * th))
        assert spec[0] == pytest.approx(expected, abs=1e-12)

    def test_single_particle_sector_is_band_theory(self):
        th = 0.7
        t = np.array([[0.0, -th], [-th, 0.0]], dtype=complex)
        mo = MoIntegrals(n_k=1, n_orb=2, n_occ=1, t=t[None, :, :],
                         w=np.zeros((2, 2, 2, 2), dtype=complex),
                         eps=np.zeros((1, 2)), e_nn=0.0, e_hf=0.0)
        spec = sector_spectrum(mo, 1, 0, per_block=2)
        assert spec[0][0] == pytest.approx(-th, abs=1e-12)
        assert spec[0][1] == pytest.approx(th, abs=1e-12)


class TestCombinatorics:
    def test_sector_sizes(self):
        from math import comb
        for n_orb, na, nb in [(2, 1, 1), (3, 2, 1), (4, 2, 2)]:
            masks = sector_masks(2 * n_orb, na, nb)
            assert len(masks) == comb(n_orb, na) * comb(n_orb, nb)
            assert (np.diff(masks.astype(np.int64)) > 0).all()

    def test_momentum_of_hand_case(self):
        # two orbitals per cell, two k points: spin orbitals 0..3 at k=0,
        # 4..7 at k=1
        masks = np.array([0b00000011, 0b00010000, 0b00010011],
                         dtype=np.uint64)
        kappa = momentum_of(masks, 2, 2)
        assert kappa.tolist() == [0, 1, 1]


@pytest.fixture(scope="module")
def dimer_mo():
    cell = parse_geometry("dimer:intra=1.2,inter=2.8")
    ints = ao_integrals(ring_of(cell, 2, 0.25))
    scf = run_rhf(ints, 2, 2, 0.25, 4)
    return mo_transform(scf, 2, 2)


class TestMomentumBlocks:
    def test_no_leak_between_blocks(self, dimer_mo):
        assert leak_between_blocks(dimer_mo, 2, 2) < 1e-12

    def test_block_minima_cover_the_full_sector(self, dimer_mo):
        ham, masks = sector_hamiltonian(dimer_mo, 2, 2)
        full = np.linalg.eigvalsh(ham.toarray()).min() + dimer_mo.e_nn
        spec = sector_spectrum(dimer_mo, 2, 2)
        assert min(spec.values()) == pytest.approx(full, abs=1e-11)


class TestReferences:
    def test_reference_relations(self, dimer_mo):
        refs = ci_references(dimer_mo, 4)
        assert refs["fci"] <= dimer_mo.e_hf + 1e-12
        assert refs["gap_ed"] == pytest.approx(min(refs["direct_gaps"].values()),
                                               abs=0)
        # direct gaps cannot undercut the fully relaxed charge gap
        assert refs["gap_ed"] >= refs["ip_ed"] - refs["ea_ed"] - 1e-10
        assert refs["ground_blocks"][refs["kappa0"]] == refs["fci"]
