import numpy as np
import pytest
import scipy.linalg

from locsketch.core.exc import (
    ConvergenceError,
    DimensionMismatchError,
    NotPositiveDefiniteError,
    ValidationError,
)
from locsketch.core.matrix import (
    frobenius_norm,
    gaussian_matrix,
    matmul,
    orthonormality_deviation,
    qr_thin,
    singular_values,
    solve_spd,
    spectral_norm,
)
from locsketch.core.structure import RandomSource


def test_matmul_checks_inner_dimension() -> None:
    with pytest.raises(DimensionMismatchError) as error:
        matmul(np.ones((2, 3)), np.ones((4, 2)))
    assert error.value.left_shape == (2, 3)
    assert np.array_equal(matmul(np.eye(2), np.ones((2, 3))), np.ones((2, 3)))


def test_spectral_norm_matches_svd(rng: np.random.Generator) -> None:
    A = rng.standard_normal((40, 7))
    assert spectral_norm(A) == pytest.approx(scipy.linalg.svdvals(A)[0], rel=1e-8)
    assert spectral_norm(np.zeros((3, 3))) == 0.0


def test_spectral_norm_start_vector_orthogonal_to_top_direction() -> None:
    # the all-ones start has no component along the dominant right vector
    A = np.diag([1.0, 3.0])
    A = A @ np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    assert spectral_norm(A) == pytest.approx(3.0, rel=1e-10)


def test_spectral_norm_without_fallback_raises() -> None:
    A = np.diag([1.0, 1.0 - 1e-9, 0.5])
    with pytest.raises(ConvergenceError):
        spectral_norm(A, tol=1e-300, max_iters=3, fallback=False)


def test_qr_thin_signs(rng: np.random.Generator) -> None:
    A = rng.standard_normal((20, 4))
    Q, R = qr_thin(A)
    assert np.all(np.diag(R) >= 0)
    assert np.allclose(Q @ R, A)
    assert orthonormality_deviation(Q) < 1e-12
    with pytest.raises(ValidationError):
        qr_thin(np.ones((2, 3)))


def test_singular_values_descending(rng: np.random.Generator) -> None:
    s = singular_values(rng.standard_normal((6, 4)))
    assert s.shape == (4,)
    assert np.all(np.diff(s) <= 0)


def test_solve_spd(rng: np.random.Generator) -> None:
    B = rng.standard_normal((8, 5))
    M = B.T @ B + np.eye(5)
    rhs = rng.standard_normal(5)
    x = solve_spd(M, rhs)
    assert np.allclose(M @ x, rhs)
    X = solve_spd(M, np.eye(5))
    assert np.allclose(X @ M, np.eye(5))


def test_solve_spd_reports_pivot() -> None:
    M = np.diag([1.0, 2.0, -1.0])
    with pytest.raises(NotPositiveDefiniteError) as error:
        solve_spd(M, np.ones(3))
    assert error.value.pivot == 2


def test_solve_spd_rejects_asymmetric() -> None:
    M = np.array([[2.0, 1.0], [0.0, 2.0]])
    with pytest.raises(ValidationError):
        solve_spd(M, np.ones(2))


def test_gaussian_matrix_variance() -> None:
    G = gaussian_matrix(400, 100, 0.25, RandomSource(5))
    assert G.shape == (400, 100)
    assert np.var(G) == pytest.approx(0.25, rel=0.05)
    assert np.array_equal(G, gaussian_matrix(400, 100, 0.25, RandomSource(5)))


def test_matmul_is_associative(rng: np.random.Generator) -> None:
    A = rng.standard_normal((6, 4))
    B = rng.standard_normal((4, 5))
    C = rng.standard_normal((5, 3))
    left = matmul(matmul(A, B), C)
    right = matmul(A, matmul(B, C))
    assert np.linalg.norm(left - right) <= 1e-10 * np.linalg.norm(left)


def test_norm_sandwich(rng: np.random.Generator) -> None:
    low_rank = rng.standard_normal((15, 3)) @ rng.standard_normal((3, 9))
    for A, rank in ((rng.standard_normal((12, 5)), 5), (low_rank, 3), (np.eye(4), 4)):
        spectral = spectral_norm(A)
        assert spectral <= frobenius_norm(A) * (1 + 1e-12)
        assert frobenius_norm(A) <= np.sqrt(rank) * spectral * (1 + 1e-12)


def test_singular_values_of_transpose(rng: np.random.Generator) -> None:
    A = rng.standard_normal((9, 4))
    assert np.allclose(singular_values(A), singular_values(A.T), rtol=0, atol=1e-10)


def test_qr_thin_of_orthonormal_columns(rng: np.random.Generator) -> None:
    A, _ = qr_thin(rng.standard_normal((10, 4)))
    Q, R = qr_thin(A)
    assert np.allclose(Q, A, atol=1e-12)
    assert np.allclose(R, np.eye(4), atol=1e-12)


def test_qr_thin_of_orthogonal_columns() -> None:
    A = np.array([[2.0, 0.0], [0.0, 0.0], [0.0, 3.0]])
    Q, R = qr_thin(A)
    assert np.allclose(R, np.diag([2.0, 3.0]), atol=1e-14)
    assert np.allclose(Q, np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]]), atol=1e-14)


def test_gaussian_streams_are_uncorrelated() -> None:
    first = gaussian_matrix(100, 100, 1.0, RandomSource(11, 0))
    second = gaussian_matrix(100, 100, 1.0, RandomSource(11, 1))
    rho = np.corrcoef(first.ravel(), second.ravel())[0, 1]
    assert abs(rho) < 0.05
