"""Pauli algebra and the fermion-to-qubit mapping against dense oracles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from crystalvqe.errors import SizeMismatch
from crystalvqe.fermion_ops import FermionOperator
from crystalvqe.jw_encoding import (
    PauliString,
    PauliSum,
    jordan_wigner,
    pauli_product,
    real_coefficients,
)


def test_label_examples():
    s = PauliString(x=0b01, z=0b10, n_qubits=2)
    assert s.label() == "XZ"
    assert PauliString(x=0b1, z=0b1, n_qubits=1).label() == "Y"
    assert PauliString(x=0, z=0, n_qubits=2).label() == "II"
    assert PauliString(x=0b01, z=0b01, n_qubits=2).label() == "YI"


def test_weight():
    assert PauliString(x=0b101, z=0b011, n_qubits=3).weight == 3
    assert PauliString(x=0, z=0, n_qubits=3).weight == 0


def test_product_xz_on_same_qubit():
    x = PauliString(x=1, z=0, n_qubits=1)
    z = PauliString(x=0, z=1, n_qubits=1)
    out, phase = pauli_product(x, z)
    assert out.label() == "Y"
    assert phase == pytest.approx(-1j)
    out, phase = pauli_product(z, x)
    assert phase == pytest.approx(1j)


def test_product_size_mismatch():
    a = PauliString(x=0, z=0, n_qubits=1)
    b = PauliString(x=0, z=0, n_qubits=2)
    with pytest.raises(SizeMismatch):
        pauli_product(a, b)


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 15), st.integers(0, 15), st.integers(0, 15),
       st.integers(0, 15))
def test_product_matches_dense(x1, z1, x2, z2):
    n = 4
    a = PauliString(x=x1, z=z1, n_qubits=n)
    b = PauliString(x=x2, z=z2, n_qubits=n)
    out, phase = pauli_product(a, b)
    left = oracles.dense_pauli_string(a) @ oracles.dense_pauli_string(b)
    right = phase * oracles.dense_pauli_string(out)
    assert np.allclose(left, right, atol=1e-14)


def test_phase_prefactor_convention():
    """The (x=1, z=1) string IS Y, with no hidden prefactor."""
    y = PauliString(x=1, z=1, n_qubits=1)
    dense = oracles.dense_pauli_string(y)
    assert np.allclose(dense, np.array([[0, -1j], [1j, 0]]), atol=0)


def test_pauli_sum_collects_terms():
    n = 2
    s = PauliSum(n_qubits=n)
    s.add_term(1, 0, 0.5)
    s.add_term(1, 0, 0.25)
    s.add_term(0, 1, 1.0)
    assert len(s.terms) == 2
    assert s.terms[(1, 0)] == pytest.approx(0.75)


def test_pauli_sum_prunes_cancellations():
    n = 1
    s = PauliSum(n_qubits=n)
    s.add_term(1, 0, 1.0)
    s.add_term(1, 0, -1.0)
    assert len(s.terms) == 0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_pauli_sum_product_matches_dense(seed):
    rng = np.random.default_rng(seed)
    n = 3
    a = PauliSum(n_qubits=n)
    b = PauliSum(n_qubits=n)
    for _ in range(4):
        a.add_term(int(rng.integers(8)), int(rng.integers(8)),
                   complex(rng.normal(), rng.normal()))
        b.add_term(int(rng.integers(8)), int(rng.integers(8)),
                   complex(rng.normal(), rng.normal()))
    left = oracles.dense_pauli_sum(a) @ oracles.dense_pauli_sum(b)
    right = oracles.dense_pauli_sum(a * b)
    assert np.allclose(left, right, atol=1e-12)


def test_adjoint_conjugates_coefficients():
    n = 2
    s = PauliSum(n_qubits=n)
    s.add_term(1, 2, 0.5 + 0.25j)
    adj = s.adjoint()
    assert adj.terms[(1, 2)] == pytest.approx(0.5 - 0.25j)
    dense = oracles.dense_pauli_sum(s)
    assert np.allclose(oracles.dense_pauli_sum(adj), dense.conj().T, atol=1e-14)


def test_jw_single_mode_number_operator():
    """c_0^dag c_0 maps to (I - Z_0)/2."""
    op = FermionOperator.from_term(((0, 1), (0, 0)), 1.0)
    psum = jordan_wigner(op, n_qubits=1)
    terms = dict(psum.terms)
    assert terms[(0, 0)] == pytest.approx(0.5)
    assert terms[(0, 1)] == pytest.approx(-0.5)
    assert len(terms) == 2


def test_jw_annihilator_matrix():
    """c_1 on two modes: the dense image matches the Fock-space oracle."""
    op = FermionOperator.from_term(((1, 0),), 1.0)
    psum = jordan_wigner(op, n_qubits=2)
    dense = oracles.dense_pauli_sum(psum)
    ref = oracles.dense_annihilator(1, 2)
    assert np.allclose(dense, ref, atol=1e-14)


def from_raw(pairs):
    op = FermionOperator.zero()
    for ops, coeff in pairs:
        op = op + FermionOperator.from_term(ops, coeff)
    return op


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 4))
def test_jw_matches_dense_fock(seed, n_modes):
    """Core mapping oracle: JW image equals the dense Fock-space matrix."""
    rng = np.random.default_rng(seed)
    pairs = oracles.random_fermion_terms(rng, n_modes=n_modes, n_terms=5)
    psum = jordan_wigner(from_raw(pairs), n_qubits=n_modes)
    left = oracles.dense_pauli_sum(psum)
    right = oracles.dense_raw_terms(pairs, n_modes)
    assert np.allclose(left, right, atol=1e-12)


def test_jw_mode_out_of_range():
    op = FermionOperator.from_term(((3, 1), (3, 0)), 1.0)
    with pytest.raises(SizeMismatch):
        jordan_wigner(op, n_qubits=3)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_jw_spectrum_matches(seed):
    """Hermitized random operator: eigenvalues agree through the mapping."""
    rng = np.random.default_rng(seed)
    n = 3
    op = from_raw(oracles.random_fermion_terms(rng, n_modes=n, n_terms=6))
    herm = op + op.adjoint()
    psum = jordan_wigner(herm, n_qubits=n)
    left = np.linalg.eigvalsh(oracles.dense_pauli_sum(psum))
    right = np.linalg.eigvalsh(oracles.dense_fermion_operator(herm, n))
    assert np.allclose(left, right, atol=1e-10)


def test_real_coefficients_accepts_hermitian():
    op = FermionOperator.from_term(((1, 1), (0, 0)), 0.3 + 0.4j)
    herm = op + op.adjoint()
    psum = jordan_wigner(herm, n_qubits=2)
    cleaned = real_coefficients(psum)
    assert cleaned.hermiticity_defect() == 0.0
    assert all(c.imag == 0.0 for c in cleaned.terms.values())
    dense = oracles.dense_pauli_sum(cleaned)
    assert np.allclose(dense, oracles.dense_fermion_operator(herm, 2),
                       atol=1e-12)


def test_real_coefficients_rejects_non_hermitian():
    op = FermionOperator.from_term(((1, 1), (0, 0)), 0.3 + 0.4j)
    psum = jordan_wigner(op, n_qubits=2)
    with pytest.raises(SizeMismatch):
        real_coefficients(psum)


def test_to_arrays_deterministic_and_int64():
    n = 2
    s = PauliSum(n_qubits=n)
    s.add_term(2, 1, 1.0)
    s.add_term(1, 0, 2.0)
    xs, zs, coeffs = s.to_arrays()
    assert xs.dtype == np.int64 and zs.dtype == np.int64
    # sorted by (x, z) key
    assert list(xs) == [1, 2]
    xs2, zs2, coeffs2 = s.to_arrays()
    assert np.array_equal(xs, xs2) and np.array_equal(coeffs, coeffs2)
