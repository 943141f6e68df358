import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from evlab.errors import DegenerateEigenvalue, MuInSpectrum, NormTooLarge, SingularMatrix
from evlab.numerics import (apply_multiplier, complex_gap, dft_matrix, eigenpair_near, fourier_frequencies, local_dips,
                            lu_factor, matrix_exponential, real_dft_multiplier_matrix, resolvent, sigma_min,
                            nearest_eigenvalues, spectral_gap, sup_norm)


def second_difference(n):
    return (np.diag(-2.0 * np.ones(n)) + np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1)) * (n + 1) ** 2


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**31 - 1))
def test_lu_reconstructs_and_solves(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n)) + n * np.eye(n)
    lu = lu_factor(A)
    np.testing.assert_allclose(lu.L @ lu.U, A[lu.perm], atol=1e-12 * n)
    b = rng.standard_normal(n)
    np.testing.assert_allclose(A @ lu.solve(b), b, atol=1e-10)
    np.testing.assert_allclose(A.T @ lu.solve(b, trans=True), b, atol=1e-10)
    assert lu.parity * np.prod(np.diag(lu.U)) == pytest.approx(np.linalg.det(A), rel=1e-9)


def test_lu_flags_singular_pivot():
    A = np.array([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(SingularMatrix) as info:
        lu_factor(A)
    assert info.value.pivot_index == 1


def test_resolvent_inverts_and_rejects_eigenvalues():
    A = np.diag([1.0, 2.0, 3.0])
    np.testing.assert_allclose(resolvent(A, 0.0), np.diag([-1.0, -0.5, -1 / 3]))
    with pytest.raises(MuInSpectrum):
        resolvent(A, 2.0)


def test_sup_norm_is_max_row_sum():
    assert sup_norm(np.array([[1.0, -2.0], [0.5, 0.5]])) == 3.0


def test_eigenpair_of_dirichlet_stencil():
    n = 60
    A = second_difference(n)
    pair = eigenpair_near(A, -9.0)
    h = 1.0 / (n + 1)
    exact = -4 / h**2 * np.sin(np.pi * h / 2) ** 2
    assert pair.value == pytest.approx(exact, rel=1e-10)
    v = pair.right_vector
    assert np.all(v > 0)
    np.testing.assert_allclose(A @ v, pair.value * v, atol=1e-8 * np.max(np.abs(A)))
    assert pair.left_vector @ v == pytest.approx(1.0)


def test_eigenpair_nonsymmetric_left_vector():
    A = np.array([[-1.0, 0.5, 0.0], [0.2, -2.0, 0.3], [0.0, 0.4, -3.0]])
    pair = eigenpair_near(A, -0.9)
    vals, left, right = scipy.linalg.eig(A, left=True)
    k = int(np.argmax(vals.real))
    assert pair.value == pytest.approx(vals[k].real, rel=1e-12)
    np.testing.assert_allclose(pair.left_vector @ A, pair.value * pair.left_vector, atol=1e-10)


def test_eigenpair_detects_double_eigenvalue():
    n = 40
    A = np.diag(-2.0 * np.ones(n)) + np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1)
    A[0, -1] = A[-1, 0] = 1.0  # periodic: every nonzero eigenvalue is double
    second = -4 * np.sin(np.pi / n) ** 2
    with pytest.raises(DegenerateEigenvalue):
        eigenpair_near(A, second + 1e-4)


def test_sigma_min_and_local_dips_locate_eigenvalues():
    A = np.diag([-1.0, -4.0, -9.0])
    assert sigma_min(A, -2.0) == pytest.approx(1.0, rel=1e-6)
    grid = np.linspace(-10, 0, 101)
    dips = local_dips(A, grid)
    assert len(dips) == 3
    np.testing.assert_allclose(sorted(dips), [-9.0, -4.0, -1.0], atol=1e-4)


def test_spectral_gap_of_diagonal():
    A = np.diag([0.0, -3.0, -7.0])
    assert spectral_gap(A, 0.0) == pytest.approx(3.0, rel=1e-3)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**31 - 1), st.floats(-2, 2))
def test_matrix_exponential_matches_scipy(n, seed, t):
    A = np.random.default_rng(seed).standard_normal((n, n))
    np.testing.assert_allclose(matrix_exponential(A, t), scipy.linalg.expm(t * A), rtol=1e-10, atol=1e-12)


def test_matrix_exponential_semigroup_and_limit():
    A = np.array([[0.0, 1.0], [-1.0, 0.0]])
    E = matrix_exponential(A, np.pi / 2)
    np.testing.assert_allclose(E, [[0.0, 1.0], [-1.0, 0.0]], atol=1e-13)
    np.testing.assert_allclose(matrix_exponential(A, 0.3) @ matrix_exponential(A, 0.4), matrix_exponential(A, 0.7),
                               atol=1e-13)
    with pytest.raises(NormTooLarge):
        matrix_exponential(1e5 * np.eye(2))


def test_fourier_frequencies_are_symmetric():
    np.testing.assert_array_equal(fourier_frequencies(5), [-2, -1, 0, 1, 2])


@pytest.mark.parametrize("n", [7, 15, 31])
def test_real_multiplier_matrix_differentiates_trig_polynomials(n):
    D = real_dft_multiplier_matrix(n, lambda k: 2j * np.pi * np.asarray(k))
    x = np.arange(n) / n
    np.testing.assert_allclose(D @ np.sin(2 * np.pi * x), 2 * np.pi * np.cos(2 * np.pi * x), atol=1e-11)
    # odd symbol -> exactly antisymmetric circulant
    assert np.array_equal(D, -D.T)
    np.testing.assert_allclose(D @ np.ones(n), 0.0, atol=1e-12)


def test_apply_multiplier_agrees_with_matrix():
    n = 15
    symbol = lambda k: (2j * np.pi * np.asarray(k)) ** 3
    M = real_dft_multiplier_matrix(n, symbol)
    f = np.random.default_rng(1).standard_normal(n)
    k, _ = dft = dft_matrix(n)
    np.testing.assert_allclose(apply_multiplier(n, symbol(k), f, dft), M @ f, rtol=1e-9, atol=1e-6)


def test_complex_gap_sees_eigenvalues_off_the_real_axis():
    # lambda0 = 0 shadows the pair -1 +- 3i on the real axis
    rot = np.array([[-1.0, 3.0], [-3.0, -1.0]])
    A = scipy.linalg.block_diag(np.zeros((1, 1)), rot, -20.0 * np.eye(2))
    assert complex_gap(A, 0.0, 1e-3) == pytest.approx(np.sqrt(10.0))
    assert spectral_gap(A, 0.0) > np.sqrt(10.0)


def test_nearest_eigenvalues_arnoldi_matches_dense():
    rng = np.random.default_rng(4)
    A = np.diag(-np.arange(100.0)) + 0.01 * rng.standard_normal((100, 100))
    near = nearest_eigenvalues(A, 0.3, count=4)
    dense = np.linalg.eigvals(A)
    expected = dense[np.argsort(np.abs(dense - 0.3))][:4]
    np.testing.assert_allclose(near, expected, atol=1e-8)
