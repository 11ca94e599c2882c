import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hdl.errors import DimensionMismatchError, DomainError
from hdl.linalg_core import Frame, random_frame, random_unitary
from hdl.ov_measures import (
    POVM, PVM, DiscreteOVMeasure, compress_measure, herglotz_transform, matrix_element_measure,
    measure_from_json, measure_to_json, random_povm, spectral_measure_of_unitary, validate,
)

TWO_ATOM = DiscreteOVMeasure(2, [0.0, np.pi], [np.diag([0.75, 0.25]), np.diag([0.25, 0.75])], POVM)


def test_validate_single_atom():
    assert validate(DiscreteOVMeasure(2, [0.0], [np.eye(2)], PVM)).ok


def test_validate_two_atom_povm():
    assert validate(TWO_ATOM).ok


def test_validate_flags_non_idempotent_pvm():
    m = DiscreteOVMeasure(2, TWO_ATOM.thetas, TWO_ATOM.weights, PVM)
    rep = validate(m)
    assert "idempotent" in rep.names()
    mags = [v.magnitude for v in rep.violations if v.invariant == "idempotent"]
    # ||diag(3/4,1/4)^2 - diag(3/4,1/4)||_F = sqrt(2) * 3/16
    assert mags[0] == pytest.approx(np.sqrt(2) * 3 / 16)


def test_validate_reports_everything_at_once():
    m = DiscreteOVMeasure(2, [0.0, 0.0], [np.diag([1.0, -0.5]), np.array([[0, 1], [0, 0]])], POVM)
    names = validate(m).names()
    assert {"positive", "hermitian", "sum_to_identity", "distinct_points"} <= names


def test_spectral_measure_identity():
    m = spectral_measure_of_unitary(np.eye(3))
    assert len(m) == 1 and m.thetas[0] == 0.0
    np.testing.assert_allclose(m.weights[0], np.eye(3), atol=1e-14)


def test_spectral_measure_reflection():
    m = spectral_measure_of_unitary(np.diag([1.0, -1.0]))
    np.testing.assert_allclose(m.thetas, [0.0, np.pi])
    np.testing.assert_allclose(m.weights[0], np.diag([1, 0]), atol=1e-14)
    np.testing.assert_allclose(m.weights[1], np.diag([0, 1]), atol=1e-14)


def test_spectral_measure_reconstructs(rng):
    U = random_unitary(8, rng)
    m = spectral_measure_of_unitary(U)
    assert m.kind == PVM and validate(m).ok
    assert np.linalg.norm(np.tensordot(m.points, m.weights, axes=1) - U) < 1e-12


def test_compress_full_space_unchanged(rng):
    m = spectral_measure_of_unitary(random_unitary(4, rng))
    c = compress_measure(m, Frame.full(4))
    np.testing.assert_allclose(c.weights, m.weights, atol=1e-15)
    assert c.kind == POVM


def test_compress_reflection_to_diagonal_vector():
    U = np.diag([1.0, -1.0]).astype(complex)
    K = Frame(np.array([1, 1]) / np.sqrt(2))
    B = compress_measure(spectral_measure_of_unitary(U), K)
    np.testing.assert_allclose(B.thetas, [0.0, np.pi])
    np.testing.assert_allclose(B.weights.reshape(-1), [0.5, 0.5], atol=1e-15)
    k = K.basis[:, 0]
    for z in (0.2, -0.4j, 0.5 + 0.5j):
        resolvent = np.vdot(k, (U + z * np.eye(2)) @ np.linalg.inv(U - z * np.eye(2)) @ k)
        assert abs(herglotz_transform(B, z)[0, 0] - resolvent) < 1e-14


def test_compress_to_eigenvector(rng):
    U = random_unitary(5, rng)
    m = spectral_measure_of_unitary(U)
    K = Frame(m.weights[2][:, [np.argmax(np.abs(np.diag(m.weights[2])))]] /
              np.linalg.norm(m.weights[2][:, np.argmax(np.abs(np.diag(m.weights[2])))]))
    B = compress_measure(m, K)
    assert len(B) == 1
    assert B.thetas[0] == m.thetas[2]
    assert abs(B.weights[0, 0, 0] - 1) < 1e-12


def test_compress_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        compress_measure(TWO_ATOM, Frame.full(3))


def test_herglotz_at_zero_is_identity(rng):
    m = random_povm(3, 4, rng)
    np.testing.assert_allclose(herglotz_transform(m, 0), np.eye(3), atol=1e-10)


def test_herglotz_single_atom():
    m = DiscreteOVMeasure(2, [0.0], [np.eye(2)], PVM)
    np.testing.assert_allclose(herglotz_transform(m, 0.5), 3 * np.eye(2), atol=1e-15)


def test_herglotz_two_atom_matches_extended_precision():
    mpmath.mp.dps = 40
    z = mpmath.mpc(0, 0.3)
    expected = mpmath.zeros(2, 2)
    # atoms sit exactly at +1 and -1
    for xi, W in zip((mpmath.mpf(1), mpmath.mpf(-1)), TWO_ATOM.weights):
        expected += (xi + z) / (xi - z) * mpmath.matrix(W.real.tolist())
    got = herglotz_transform(TWO_ATOM, 0.3j)
    ref = np.array(expected.tolist(), dtype=complex)
    assert np.max(np.abs(got - ref)) < 1e-15


def test_herglotz_positive_real_part(rng):
    m = random_povm(4, 6, rng)
    for z in 0.95 * np.exp(2j * np.pi * np.arange(12) / 12):
        F = herglotz_transform(m, z)
        assert np.linalg.eigvalsh((F + F.conj().T) / 2).min() > -1e-10


def test_herglotz_domain():
    with pytest.raises(DomainError):
        herglotz_transform(TWO_ATOM, 1.0)


def test_matrix_element_identity_pvm():
    m = spectral_measure_of_unitary(np.eye(2))
    s = matrix_element_measure(m, [1, 0], [1, 0])
    assert len(s.masses) == 1 and s.masses[0] == 1 and s.thetas[0] == 0


def test_matrix_element_orthogonal_vectors():
    m = spectral_measure_of_unitary(np.diag([1.0, -1.0]))
    s = matrix_element_measure(m, [1, 0], [0, 1])
    assert np.all(s.masses == 0)


def test_matrix_element_total_mass(rng):
    m = spectral_measure_of_unitary(random_unitary(6, rng))
    h = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    s = matrix_element_measure(m, h, h)
    assert np.all(s.masses.real >= -1e-12) and np.all(s.masses.imag == 0)
    assert abs(s.total() - np.vdot(h, h).real) < 1e-9


def test_matrix_element_hermitian_symmetry(rng):
    m = spectral_measure_of_unitary(random_unitary(5, rng))
    h1, h2 = (rng.standard_normal((2, 5)) + 1j * rng.standard_normal((2, 5)))
    a = matrix_element_measure(m, h1, h2).masses
    b = matrix_element_measure(m, h2, h1).masses
    np.testing.assert_allclose(a, b.conj(), atol=1e-14)


def test_matrix_element_length_mismatch():
    with pytest.raises(DimensionMismatchError):
        matrix_element_measure(TWO_ATOM, [1, 0, 0], [1, 0])


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 9))
def test_resolvent_identity(seed, n):
    rng = np.random.default_rng(seed)
    U = random_unitary(n, rng)
    E = spectral_measure_of_unitary(U)
    h1, h2 = rng.standard_normal((2, n)) + 1j * rng.standard_normal((2, n))
    for z in 0.9 * np.exp(2j * np.pi * np.arange(8) / 8) * rng.uniform(0, 1, 8):
        lhs = np.vdot(h2, (U + z * np.eye(n)) @ np.linalg.inv(U - z * np.eye(n)) @ h1)
        rhs = matrix_element_measure(E, h1, h2).herglotz(z)
        assert abs(lhs - rhs) < 1e-9


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 9), data=st.data())
def test_compressed_pvm_is_povm_and_commutes_with_herglotz(seed, n, data):
    k = data.draw(st.integers(1, n))
    rng = np.random.default_rng(seed)
    E = spectral_measure_of_unitary(random_unitary(n, rng))
    K = random_frame(n, k, rng)
    B = compress_measure(E, K)
    assert validate(B).ok
    for z in (0.0, 0.5j, -0.8, 0.6 + 0.3j):
        lhs = herglotz_transform(B, z)
        rhs = K.basis.conj().T @ herglotz_transform(E, z) @ K.basis
        assert np.linalg.norm(lhs - rhs) < 1e-10


def test_random_povm_rank_deficient(rng):
    m = random_povm(3, 4, rng, rank=1)
    assert validate(m).ok
    assert all(np.linalg.matrix_rank(W, tol=1e-10) == 1 for W in m.weights)


def test_measure_json_roundtrip(rng):
    m = random_povm(2, 3, rng)
    back = measure_from_json(measure_to_json(m))
    assert back.kind == m.kind
    np.testing.assert_array_equal(back.thetas, m.thetas)
    np.testing.assert_array_equal(back.weights, m.weights)
