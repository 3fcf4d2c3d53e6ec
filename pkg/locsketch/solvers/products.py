"""
Sketched matrix products and the embedding deviation of a sketch.
"""
import logging

import numpy as np

from locsketch.core.exc import DimensionMismatchError, ZeroMatrixError
from locsketch.core.matrix import matmul, singular_values, spectral_norm
from locsketch.core.structure import PartitionedMatrix, as_dense, check_same_partition
from locsketch.measures.complexity import check_orthonormal
from locsketch.sketch.operators import SketchOperator, apply

logger = logging.getLogger(__name__)


def approx_matmul(
    S: SketchOperator, W: PartitionedMatrix, Y: PartitionedMatrix, workers: int = 1
) -> np.ndarray:
    """(S W)^T (S Y), an estimate of W^T Y."""
    check_same_partition(W, Y)
    SW = apply(S, W, workers=workers)
    SY = apply(S, Y, workers=workers)
    return matmul(SW.T, SY)


def _dense(X: PartitionedMatrix | np.ndarray) -> np.ndarray:
    if isinstance(X, PartitionedMatrix):
        return X.flatten()
    return as_dense(X)


def matmul_error(
    W: PartitionedMatrix | np.ndarray,
    Y: PartitionedMatrix | np.ndarray,
    P_hat: np.ndarray,
) -> float:
    """||P_hat - W^T Y||_2 / (||W||_2 ||Y||_2)."""
    W, Y, P_hat = _dense(W), _dense(Y), as_dense(P_hat, "estimate")
    if P_hat.shape != (W.shape[1], Y.shape[1]):
        raise DimensionMismatchError(
            "Estimate does not match W^T Y", P_hat.shape, (W.shape[1], Y.shape[1])
        )
    scale = spectral_norm(W) * spectral_norm(Y)
    if scale == 0.0:
        raise ZeroMatrixError("Relative product error is undefined for zero W or Y")
    return spectral_norm(P_hat - matmul(W.T, Y)) / scale


def embedding_deviation(
    S: SketchOperator, U: PartitionedMatrix, workers: int = 1
) -> float:
    """||(S U)^T (S U) - I||_2 for an orthonormal basis U."""
    check_orthonormal(U.flatten())
    SU = apply(S, U, workers=workers)
    delta = SU.T @ SU - np.eye(U.cols)
    return float(singular_values(delta)[0])
