"""Subspace expansion: matrices, generalized solves, band assembly."""

import numpy as np
import pytest
import scipy.linalg

import oracles
from crystalvqe import integrals, qse
from crystalvqe.errors import (EmptySubspace, IndexOutOfRange, SizeMismatch)
from crystalvqe.fermion_ops import build_hamiltonian
from crystalvqe.integrals import KMesh
from crystalvqe.jw_encoding import jordan_wigner, real_coefficients
from crystalvqe.oracle import (SectorSpec, fci_ground, ground_in_number_sector,
                               sector_spectrum)
from crystalvqe.statevec import StateVector, hartree_fock_state


def qubit_hamiltonian(ints):
    return real_coefficients(jordan_wigner(build_hamiltonian(ints), ints.n_qubits))


def free_ints(e_const=0.45, madelung=0.0):
    """Two diagonal bands on two k points, no interaction, band 0 filled."""
    t = np.zeros((2, 2, 2), dtype=complex)
    t[0, 0, 0] = -1.3
    t[0, 1, 1] = 0.9
    t[1, 0, 0] = -0.7
    t[1, 1, 1] = 1.4
    mesh = KMesh(n_k=2, shift=0.0, length=4.0)
    return integrals.from_dense(mesh, 2, 4, t, {}, e_const=e_const,
                                madelung=madelung)


def ring_ints(u=2.0):
    """Half-filled 2-site ring in the momentum basis."""
    t = np.zeros((2, 1, 1), dtype=complex)
    for k in range(2):
        t[k, 0, 0] = -2.0 * np.cos(np.pi * k)
    v = {(k1, 0, k2, 0, k3, 0, (k1 - k2 + k3) % 2, 0): u / 2
         for k1 in range(2) for k2 in range(2) for k3 in range(2)}
    mesh = KMesh(n_k=2, shift=0.0, length=2.0)
    return integrals.from_dense(mesh, 1, 2, t, v)


def two_band_ints():
    """8-qubit interacting model, band 0 occupied at both k points."""
    t = np.zeros((2, 2, 2), dtype=complex)
    t[0] = [[-1.1, 0.12 + 0.07j], [0.12 - 0.07j, 0.8]]
    t[1] = [[-0.4, -0.05j], [0.05j, 1.3]]
    v = {
        (0, 0, 0, 0, 0, 0, 0, 0): 0.55,
        (1, 0, 1, 0, 1, 0, 1, 0): 0.52,
        (0, 0, 0, 0, 1, 0, 1, 0): 0.31,
        (0, 1, 0, 1, 1, 1, 1, 1): 0.44,
        (0, 0, 0, 1, 0, 0, 0, 1): 0.11 + 0.02j,
        (0, 0, 1, 0, 1, 1, 0, 1): 0.07 + 0.01j,
    }
    mesh = KMesh(n_k=2, shift=0.0, length=4.0)
    return integrals.from_dense(mesh, 2, 4, t, v, e_const=0.3)


@pytest.fixture(scope="module")
def two_band_fci():
    """Exact correlated ground state, checked nondegenerate."""
    ints = two_band_ints()
    ham = qubit_hamiltonian(ints)
    spectrum = sector_spectrum(ham, SectorSpec(4, 0), 2, mesh=ints.mesh)
    assert spectrum[1] - spectrum[0] > 1e-6
    _, state = fci_ground(ham, SectorSpec(4, 0), mesh=ints.mesh)
    return ints, ham, state


def test_ip_and_ea_pool_contents():
    ints = free_ints()
    smap = ints.orbital_map
    ip = qse.ip_pool(ints)
    ea = qse.ea_pool(ints)
    # band 0 holds the four electrons, band 1 is empty
    assert [op.orbital for op in ip.operators] == [0, 0, 0, 0]
    assert [op.orbital for op in ea.operators] == [1, 1, 1, 1]
    assert {(op.k, op.spin) for op in ip.operators} == {(0, 0), (0, 1),
                                                        (1, 0), (1, 1)}
    for op in ip.operators:
        assert op.mode == smap.qubit(op.k, op.orbital, op.spin)
    assert ip.block_keys() == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert len(ip.block(0, 1)) == 1
    assert ip.block(0, 1).operators[0].spin == 1


def test_pool_requires_each_requested_k():
    # quarter filling: only k=0 is occupied
    t = np.zeros((2, 2, 2), dtype=complex)
    t[0, 0, 0], t[0, 1, 1] = -1.3, 0.9
    t[1, 0, 0], t[1, 1, 1] = -0.7, 1.4
    mesh = KMesh(n_k=2, shift=0.0, length=4.0)
    ints = integrals.from_dense(mesh, 2, 2, t, {})
    with pytest.raises(EmptySubspace):
        qse.ip_pool(ints, ks=(1,))
    with pytest.raises(EmptySubspace):
        qse.ip_pool(ints)
    assert len(qse.ip_pool(ints, ks=(0,))) == 2
    assert len(qse.ea_pool(ints)) == 6
    with pytest.raises(IndexOutOfRange):
        qse.ip_pool(ints, ks=(2,))
    with pytest.raises(ValueError):
        qse.build_pool(ints, "XX")


def test_ssub_identity_on_determinant():
    ints = free_ints()
    psi = hartree_fock_state(ints)
    ham = qubit_hamiltonian(ints)
    for pool in (qse.ip_pool(ints), qse.ea_pool(ints)):
        _, ssub = qse.subspace_matrices(psi, ham, pool)
        assert np.max(np.abs(ssub - np.eye(len(pool)))) < 1e-12


def test_matrices_match_dense_sandwich():
    ints = ring_ints()
    ham = qubit_hamiltonian(ints)
    rng = np.random.default_rng(7)
    amps = rng.normal(size=16) + 1j * rng.normal(size=16)
    amps /= np.linalg.norm(amps)
    psi = StateVector(amps.astype(complex), 4, normalized=True)
    pool = qse.ip_pool(ints, ks=(0,))
    hsub, ssub = qse.subspace_matrices(psi, ham, pool)
    hd = oracles.dense_pauli_sum(ham)
    rd = [oracles.dense_pauli_sum(op.encoded) for op in pool.operators]
    for i in range(len(pool)):
        for j in range(len(pool)):
            left = rd[i] @ amps
            right = rd[j] @ amps
            assert hsub[i, j] == pytest.approx(np.vdot(left, hd @ right),
                                               abs=1e-12)
            assert ssub[i, j] == pytest.approx(np.vdot(left, right), abs=1e-12)


def test_matrices_hermitian_and_metric_psd(two_band_fci):
    ints, ham, psi = two_band_fci
    for pool in (qse.ip_pool(ints), qse.ea_pool(ints)):
        hsub, ssub = qse.subspace_matrices(psi, ham, pool)
        assert np.max(np.abs(hsub - hsub.conj().T)) == 0.0
        assert np.max(np.abs(ssub - ssub.conj().T)) == 0.0
        assert np.linalg.eigvalsh(ssub).min() > -1e-12


def test_offblock_entries_vanish_for_momentum_eigenstate(two_band_fci):
    ints, ham, psi = two_band_fci
    pool = qse.ip_pool(ints)
    hsub, ssub = qse.subspace_matrices(psi, ham, pool)
    keys = [(op.k, op.spin) for op in pool.operators]
    off = np.array([[keys[i] != keys[j] for j in range(len(keys))]
                    for i in range(len(keys))])
    assert np.max(np.abs(hsub[off])) < 1e-10
    assert np.max(np.abs(ssub[off])) < 1e-10


def test_size_mismatch_rejected():
    ints = ring_ints()
    pool = qse.ip_pool(ints, ks=(0,))
    ham = qubit_hamiltonian(ints)
    small = StateVector(np.array([1.0 + 0j, 0, 0, 0]), 2, normalized=True)
    with pytest.raises(SizeMismatch):
        qse.subspace_matrices(small, ham, pool)
    with pytest.raises(SizeMismatch):
        qse.solve_generalized(np.eye(3), np.eye(4))


def test_solve_with_identity_metric_is_plain_eigh():
    rng = np.random.default_rng(11)
    a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    h = 0.5 * (a + a.conj().T)
    sol = qse.solve_generalized(h, np.eye(5))
    np.testing.assert_allclose(sol.energies, np.linalg.eigvalsh(h),
                               atol=1e-12)
    assert sol.n_discarded == 0
    assert sol.metric_condition == pytest.approx(1.0)


def test_solve_matches_generalized_eigen_oracle():
    rng = np.random.default_rng(13)
    a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    h = 0.5 * (a + a.conj().T)
    m = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    s = m @ m.conj().T + 0.1 * np.eye(5)
    sol = qse.solve_generalized(h, s, metric_threshold=0.0)
    ref = scipy.linalg.eigh(h, s, eigvals_only=True)
    np.testing.assert_allclose(sol.energies, ref, atol=1e-10)
    for i in range(5):
        resid = h @ sol.vectors[:, i] - sol.energies[i] * (s @ sol.vectors[:, i])
        assert np.linalg.norm(resid) < 1e-10
        # unit metric norm per retained vector
        norm = sol.vectors[:, i].conj() @ s @ sol.vectors[:, i]
        assert norm == pytest.approx(1.0, abs=1e-10)


def test_duplicate_pool_operator_discarded():
    ints = ring_ints()
    ham = qubit_hamiltonian(ints)
    psi = hartree_fock_state(ints)
    pool = qse.ip_pool(ints, ks=(0,))
    doubled = qse.SubspaceOperatorPool(
        pool.kind, pool.n_qubits, pool.operators + [pool.operators[0]])
    clean = qse.pool_solution(psi, ham, pool)
    dup = qse.pool_solution(psi, ham, doubled)
    assert clean.n_discarded == 0
    assert dup.n_discarded == 1
    np.testing.assert_allclose(dup.energies, clean.energies, atol=1e-10)


def test_all_metric_eigenvalues_discarded_raises():
    with pytest.raises(EmptySubspace):
        qse.solve_generalized(np.eye(3), 1e-12 * np.eye(3))
    with pytest.raises(EmptySubspace):
        qse.solve_generalized(np.zeros((0, 0)), np.zeros((0, 0)))


def test_measurement_count_formula():
    ints = free_ints()
    pool = qse.ip_pool(ints)
    assert qse.measurement_count(pool) == 4 * 5
    assert qse.measurement_count(7) == 7 * 8
    assert qse.measurement_count(0) == 0
    with pytest.raises(ValueError):
        qse.measurement_count(-1)


def test_rayleigh_ritz_bound_vs_sector_oracle(two_band_fci):
    ints, ham, psi = two_band_fci
    ip = qse.pool_solution(psi, ham, qse.ip_pool(ints), metric_threshold=0.0)
    ea = qse.pool_solution(psi, ham, qse.ea_pool(ints), metric_threshold=0.0)
    e_minus, _ = ground_in_number_sector(ham, ints.n_elec - 1, mesh=ints.mesh)
    e_plus, _ = ground_in_number_sector(ham, ints.n_elec + 1, mesh=ints.mesh)
    assert ip.energies.min() >= e_minus - 1e-9
    assert ea.energies.min() >= e_plus - 1e-9


def test_pool_growth_never_raises_minimum(two_band_fci):
    ints, ham, psi = two_band_fci
    small = qse.ip_pool(ints, ks=(0,), spins=(0,))
    grown = qse.ip_pool(ints, spins=(0, 1))
    e_small = qse.pool_solution(psi, ham, small, metric_threshold=0.0)
    e_grown = qse.pool_solution(psi, ham, grown, metric_threshold=0.0)
    assert e_grown.energies.min() <= e_small.energies.min() + 1e-12


def test_block_union_equals_full_pool(two_band_fci):
    ints, ham, psi = two_band_fci
    pool = qse.ip_pool(ints)
    full = qse.pool_solution(psi, ham, pool, metric_threshold=0.0)
    blocks = qse.block_solutions(psi, ham, pool, metric_threshold=0.0)
    merged = np.sort(np.concatenate([s.energies for s in blocks.values()]))
    np.testing.assert_allclose(np.sort(full.energies), merged, atol=1e-10)


def test_spin_blocks_degenerate(two_band_fci):
    ints, ham, psi = two_band_fci
    blocks = qse.block_solutions(psi, ham, qse.ip_pool(ints))
    for k in (0, 1):
        np.testing.assert_allclose(blocks[(k, 0)].energies,
                                   blocks[(k, 1)].energies, atol=1e-10)


def test_free_fermion_bands_are_one_body_levels():
    ints = free_ints()
    ham = qubit_hamiltonian(ints)
    psi = hartree_fock_state(ints)
    bs = qse.bands(psi, ham, ints)
    # removal and attachment energies of a determinant are the bare levels
    np.testing.assert_allclose(bs.valence[0], [-1.3], atol=1e-9)
    np.testing.assert_allclose(bs.valence[1], [-0.7], atol=1e-9)
    np.testing.assert_allclose(bs.conduction[0], [0.9], atol=1e-9)
    np.testing.assert_allclose(bs.conduction[1], [1.4], atol=1e-9)
    assert bs.shift == pytest.approx(-0.7, abs=1e-9)
    assert max(v.max() for v in bs.aligned_valence()) == pytest.approx(0.0)
    gap, k_at = bs.direct_gap()
    assert gap == pytest.approx(2.1, abs=1e-9)
    assert k_at == 1
    assert bs.k_fracs == [0.0, 0.5]
    assert all(bs.discards[key] == 0 for key in bs.discards)


def test_madelung_only_shifts_raw_bands():
    plain = free_ints(madelung=0.0)
    charged = free_ints(madelung=0.7)
    bs0 = qse.bands(hartree_fock_state(plain), qubit_hamiltonian(plain), plain)
    bs1 = qse.bands(hartree_fock_state(charged), qubit_hamiltonian(charged),
                    charged)
    for k in (0, 1):
        np.testing.assert_allclose(bs1.valence[k], bs0.valence[k] + 0.7,
                                   atol=1e-9)
        np.testing.assert_allclose(bs1.conduction[k], bs0.conduction[k] + 0.7,
                                   atol=1e-9)
        np.testing.assert_allclose(bs1.aligned_valence()[k],
                                   bs0.aligned_valence()[k], atol=1e-9)
        np.testing.assert_allclose(bs1.aligned_conduction()[k],
                                   bs0.aligned_conduction()[k], atol=1e-9)
    assert bs1.direct_gap()[0] == pytest.approx(bs0.direct_gap()[0], abs=1e-9)


def test_interacting_bands_vs_block_solutions(two_band_fci):
    ints, ham, psi = two_band_fci
    e_fci, _ = fci_ground(ham, SectorSpec(4, 0), mesh=ints.mesh)
    bs = qse.bands(psi, ham, ints, metric_threshold=0.0)
    assert bs.e0 == pytest.approx(e_fci, abs=1e-10)
    blocks = qse.block_solutions(psi, ham, qse.ip_pool(ints),
                                 metric_threshold=0.0)
    for k in (0, 1):
        assert len(bs.valence[k]) == 1 and len(bs.conduction[k]) == 1
        assert bs.valence[k][0] == pytest.approx(
            bs.e0 - blocks[(k, 0)].energies.min(), abs=1e-10)
    # subspace roots upper-bound the charged-sector grounds
    e_minus, _ = ground_in_number_sector(ham, 3, mesh=ints.mesh)
    e_plus, _ = ground_in_number_sector(ham, 5, mesh=ints.mesh)
    assert max(v.max() for v in bs.valence) <= bs.e0 - e_minus + 1e-12
    assert min(c.min() for c in bs.conduction) >= e_plus - bs.e0 - 1e-12
    assert bs.direct_gap()[0] > 0


def test_metallic_model_propagates_empty_pool():
    ints = ring_ints()
    ham = qubit_hamiltonian(ints)
    psi = hartree_fock_state(ints)
    with pytest.raises(EmptySubspace):
        qse.bands(psi, ham, ints)


def test_bands_csv_schema():
    ints = free_ints()
    bs = qse.bands(hartree_fock_state(ints), qubit_hamiltonian(ints), ints)
    text = bs.to_csv()
    lines = text.strip().split("\n")
    assert lines[0] == ("k_index,k_frac,band_kind,band_index,"
                        "energy_hartree,energy_aligned_hartree")
    assert len(lines) == 1 + 4
    assert lines[1] == f"0,0,v,0,{-1.3:.12e},{-0.6:.12e}"
    kinds = [row.split(",")[2] for row in lines[1:]]
    assert kinds == ["v", "c", "v", "c"]
    for row in lines[1:]:
        fields = row.split(",")
        assert len(fields) == 6
        raw, aligned = float(fields[4]), float(fields[5])
        assert aligned == pytest.approx(raw - bs.shift, abs=1e-12)
