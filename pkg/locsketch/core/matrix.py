"""
Dense linear algebra kernels.

All functions take float64 arrays (validated with as_dense) and return new arrays;
nothing is modified in place. Factorizations call LAPACK through scipy.linalg.
"""
import logging

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from locsketch.core.constants import SYMMETRY_TOL
from locsketch.core.exc import (
    ConvergenceError,
    DimensionMismatchError,
    NotPositiveDefiniteError,
    ValidationError,
)
from locsketch.core.structure import RandomSource, as_dense

logger = logging.getLogger(__name__)


def matmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    A = as_dense(A, "left operand")
    B = as_dense(B, "right operand")
    if A.shape[1] != B.shape[0]:
        logger.error("Cannot multiply %s by %s", A.shape, B.shape)
        raise DimensionMismatchError("Inner dimensions differ", A.shape, B.shape)
    return A @ B


def frobenius_norm(A: np.ndarray) -> float:
    return float(np.linalg.norm(as_dense(A), "fro"))


def spectral_norm(
    A: np.ndarray, tol: float = 1e-10, max_iters: int = 1000, fallback: bool = True
) -> float:
    """
    Largest singular value of A by power iteration on A^T A.

    Parameters:
        A: the matrix.
        tol: relative tolerance on the eigen-residual ||A^T A v - mu v|| / mu.
        max_iters: iteration cap.
        fallback: if True, fall back to a full singular value computation when the
            iteration does not converge, or when the converged value is below the
            largest row or column norm (which means the all-ones start vector had
            no component along the top singular vector).

    Returns:
        sigma_max, 0.0 for the zero matrix.
    """
    A = as_dense(A)
    if tol <= 0:
        raise ValidationError("tol must be positive")
    if A.size == 0 or not np.any(A):
        return 0.0

    n = A.shape[1]
    v = np.full(n, 1.0 / np.sqrt(n))
    mu = 0.0
    gap = np.inf
    converged = False
    for _ in range(max_iters):
        w = A.T @ (A @ v)
        w_norm = np.linalg.norm(w)
        if w_norm == 0.0:
            break
        mu = float(v @ w)
        gap = np.linalg.norm(w - mu * v) / w_norm
        v = w / w_norm
        if gap <= tol:
            converged = True
            break

    # sigma_max^2 is at least the largest squared row or column norm
    lower = max(np.max(np.sum(A * A, axis=0)), np.max(np.sum(A * A, axis=1)))
    if converged and mu >= lower * (1.0 - 1e-12):
        return float(np.sqrt(mu))
    if not fallback:
        raise ConvergenceError(max_iters, float(gap))
    logger.debug("Power iteration fell back to full singular values (gap %.2e)", gap)
    return float(scipy.linalg.svdvals(A)[0])


def qr_thin(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Householder thin QR with the signs fixed so that diag(R) >= 0.

    Rank-deficient input is accepted; R then has near-zero diagonal entries.
    """
    A = as_dense(A)
    if A.shape[0] < A.shape[1]:
        raise ValidationError(
            f"Thin QR needs rows >= cols, got {A.shape[0]} x {A.shape[1]}"
        )
    Q, R = scipy.linalg.qr(A, mode="economic")
    signs = np.where(np.diag(R) < 0.0, -1.0, 1.0)
    return Q * signs, R * signs[:, None]


def singular_values(A: np.ndarray) -> np.ndarray:
    """All min(rows, cols) singular values in descending order."""
    A = as_dense(A)
    if A.size == 0:
        raise ValidationError("Singular values of an empty matrix are undefined")
    return scipy.linalg.svdvals(A)


def solve_spd(M: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """
    Solve M x = rhs for symmetric positive definite M via Cholesky.

    rhs may be a vector or a matrix; the result has the same shape as rhs.
    """
    M = as_dense(M, "system matrix")
    rhs = np.asarray(rhs, dtype=np.float64)
    if M.shape[0] != M.shape[1]:
        raise DimensionMismatchError("System matrix must be square", M.shape, M.shape)
    if rhs.shape[0] != M.shape[0]:
        raise DimensionMismatchError(
            "Right-hand side does not conform", M.shape, rhs.shape
        )
    if not np.all(np.isfinite(rhs)):
        raise ValidationError("Right-hand side contains NaN or Inf entries")

    scale = max(1.0, float(np.max(np.abs(M))))
    asymmetry = float(np.max(np.abs(M - M.T)))
    if asymmetry > SYMMETRY_TOL * scale:
        logger.error("System matrix is not symmetric (max asymmetry %.3e)", asymmetry)
        raise ValidationError(
            f"Matrix is not symmetric (max asymmetry {asymmetry:.3e})"
        )

    factor, info = lapack.dpotrf(M, lower=False, clean=True)
    if info > 0:
        raise NotPositiveDefiniteError(pivot=int(info) - 1)
    if info < 0:
        raise ValidationError(
            f"Invalid argument {-info} passed to the Cholesky routine"
        )
    return scipy.linalg.cho_solve((factor, False), rhs)


def gaussian_matrix(
    rows: int, cols: int, variance: float, src: RandomSource
) -> np.ndarray:
    """I.i.d. N(0, variance) entries drawn from the stream src."""
    if variance <= 0:
        raise ValidationError("variance must be positive")
    if rows < 1 or cols < 1:
        raise ValidationError(f"Invalid shape {rows} x {cols}")
    return src.generator().standard_normal((rows, cols)) * np.sqrt(variance)


def orthonormality_deviation(U: np.ndarray) -> float:
    """Largest absolute entry of U^T U - I."""
    U = as_dense(U)
    gram = U.T @ U
    return float(np.max(np.abs(gram - np.eye(U.shape[1]))))
