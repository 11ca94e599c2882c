import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hdl.clark_spectra import shift_operator
from hdl.errors import BoundarySingularityError, InvalidInputError, NotContractionError
from hdl.linalg_core import Frame, random_frame, random_unitary
from hdl.contractions import (
    characteristic_function, cnu_split, defect_data, is_partial_isometry, is_pure,
    purity_margin, spectral_radius,
)

from conftest import Z_SAMPLES


def random_contraction(n, rng, scale=1.0):
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * G / np.linalg.norm(G, 2)


def test_defect_data_unitary(rng):
    dd = defect_data(random_unitary(4, rng))
    assert dd.index_t == dd.index_ts == 0


def test_defect_data_zero():
    dd = defect_data(np.zeros((3, 3)))
    np.testing.assert_allclose(dd.d_t, np.eye(3), atol=1e-15)
    np.testing.assert_allclose(dd.d_ts, np.eye(3), atol=1e-15)
    assert dd.index_t == dd.index_ts == 3


def test_defect_data_shift():
    dd = defect_data(shift_operator(2))
    np.testing.assert_allclose(dd.d_t, np.diag([0, 1]), atol=1e-15)
    np.testing.assert_allclose(dd.d_ts, np.diag([1, 0]), atol=1e-15)
    assert (dd.index_t, dd.index_ts) == (1, 1)


def test_defect_data_rejects_non_contraction():
    with pytest.raises(NotContractionError) as info:
        defect_data(2 * np.eye(2))
    assert info.value.norm == pytest.approx(2.0)


def test_defect_data_rejects_wrong_frame():
    with pytest.raises(InvalidInputError):
        defect_data(shift_operator(2), frame_dt=Frame(np.array([1.0, 0.0])))


def test_intertwining(rng):
    for _ in range(5):
        T = random_contraction(6, rng, 0.9)
        dd = defect_data(T)
        assert np.linalg.norm(dd.d_ts @ T - T @ dd.d_t) < 1e-9


def test_char_fn_of_zero_is_z():
    dd = defect_data(np.zeros((3, 3)))
    for z in Z_SAMPLES:
        np.testing.assert_allclose(characteristic_function(dd, z).theta, z * np.eye(3), atol=1e-15)


def test_char_fn_partial_isometry_vanishes_at_zero(rng):
    U = random_unitary(6, rng)
    T = random_frame(6, 3, rng).projector() @ U
    assert np.linalg.norm(characteristic_function(defect_data(T), 0).theta) < 1e-12


def test_char_fn_shift_is_z_squared():
    dd = defect_data(shift_operator(2))
    for z in Z_SAMPLES + [1.0, 1j, -1.0]:
        th = characteristic_function(dd, z).theta
        assert th.shape == (1, 1)
        # canonical frames are e2 (for D_S) and e1 (for D_S*), both with phase +1
        assert abs(th[0, 0] - z**2) < 1e-15


def test_char_fn_boundary_singularity():
    # T = diag(1, 0): I - z T^H is singular at z = 1
    dd = defect_data(np.diag([1.0, 0.0]))
    with pytest.raises(BoundarySingularityError):
        characteristic_function(dd, 1.0)


def test_char_fn_coordinates_are_pinned(rng):
    T = random_contraction(5, rng, 0.8)
    dd = defect_data(T)
    a = characteristic_function(dd, 0.3).theta
    b = characteristic_function(dd, 0.3).theta
    np.testing.assert_array_equal(a, b)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 10))
def test_char_fn_is_contraction(seed, n):
    rng = np.random.default_rng(seed)
    T = random_contraction(n, rng, rng.uniform(0.1, 0.999))
    dd = defect_data(T)
    for r in (0.0, 0.5, 0.9, 1.0):
        for z in r * np.exp(2j * np.pi * np.arange(16) / 16):
            th = characteristic_function(dd, z).theta
            if th.size:
                assert np.linalg.norm(th, 2) <= 1 + 1e-9


def test_is_partial_isometry_cases(rng):
    assert is_partial_isometry(random_unitary(4, rng))
    assert not is_partial_isometry(0.5 * np.eye(3))
    U = random_unitary(5, rng)
    assert is_partial_isometry(random_frame(5, 2, rng).projector() @ U)


def test_partial_isometry_agrees_with_theta_zero(rng):
    for T in (random_contraction(4, rng, 0.7), shift_operator(4), np.eye(2)):
        th0 = characteristic_function(defect_data(T), 0).theta
        nrm = np.linalg.norm(th0) if th0.size else 0.0
        assert is_partial_isometry(T) == (nrm < 1e-9)


def test_purity():
    assert is_pure(defect_data(shift_operator(3))) is True
    assert purity_margin(defect_data(shift_operator(3))) == pytest.approx(1.0)
    assert is_pure(defect_data(0.5 * np.eye(2))) is True


def test_purity_grey_zone():
    # ||Theta(0)|| = ||T restricted to defect spaces||: here 1 - 1e-12, undecidable
    T = np.diag([1 - 1e-12, 0.0])
    assert is_pure(defect_data(T)) is None


def test_cnu_split_unitary(rng):
    unitary, cnu = cnu_split(random_unitary(4, rng))
    assert unitary.dim == 4 and cnu.dim == 0


def test_cnu_split_zero():
    unitary, cnu = cnu_split(np.zeros((3, 3)))
    assert unitary.dim == 0 and cnu.dim == 3


def test_cnu_split_block(rng):
    T = np.zeros((3, 3), dtype=complex)
    T[:2, :2] = random_unitary(2, rng)
    T[2, 2] = 0.5
    unitary, cnu = cnu_split(T)
    assert (unitary.dim, cnu.dim) == (2, 1)
    np.testing.assert_allclose(unitary.projector(), np.diag([1, 1, 0]), atol=1e-10)
    for F in (unitary, cnu):
        resid = (np.eye(3) - F.projector()) @ T @ F.basis
        assert np.linalg.norm(resid) < 1e-9


def test_cnu_split_hidden_unitary_block(rng):
    W = random_unitary(5, rng)
    D = np.diag([1.0, np.exp(0.4j), 0.3, 0.6, 0.0])
    T = W @ D @ W.conj().T
    unitary, cnu = cnu_split(T)
    assert unitary.dim == 2
    assert np.linalg.norm(T @ unitary.basis - unitary.projector() @ T @ unitary.basis) < 1e-9


def test_cnu_criterion_matches_spectral_radius(rng):
    for _ in range(10):
        T = random_contraction(5, rng, rng.uniform(0.5, 0.99))
        _, cnu = cnu_split(T)
        assert (cnu.dim == 5) == (spectral_radius(T) < 1 - 1e-10)
    T = shift_operator(4)
    assert cnu_split(T)[1].dim == 4 and spectral_radius(T) < 1 - 1e-10
