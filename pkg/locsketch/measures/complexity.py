"""
Complexity measures of a data matrix: stable rank, statistical dimension, block
coherence, and the per-block sketch sizes derived from the coherence.
"""
import logging
import math
from typing import Sequence

import numpy as np
from pydantic import BaseModel, Field, model_validator

from locsketch.core.constants import (
    ALLOCATION_ROUNDING_TOL,
    COHERENCE_NORM_TOL,
    ORTHONORMAL_TOL,
    RANK_TOL,
)
from locsketch.core.exc import (
    NotOrthonormalError,
    ValidationError,
    ZeroMatrixError,
)
from locsketch.core.matrix import (
    frobenius_norm,
    orthonormality_deviation,
    singular_values,
    spectral_norm,
)
from locsketch.core.structure import PartitionedMatrix, as_dense, equal_block_rows

logger = logging.getLogger(__name__)

# Slack on the coherence bounds, which are only met up to rounding.
_BOUND_SLACK = 1e-8


class CoherenceProfile(BaseModel):
    gammas: list[float]
    basis_cols: int = Field(ge=0)
    block_rows: list[int]

    @model_validator(mode="after")
    def check_bounds(self) -> "CoherenceProfile":
        if len(self.gammas) != len(self.block_rows):
            raise ValueError("One coherence value per block is required")
        if any(g < -_BOUND_SLACK or g > 1 + _BOUND_SLACK for g in self.gammas):
            raise ValueError(f"Coherence values must lie in [0, 1]: {self.gammas}")
        if self.basis_cols > 0 and max(self.gammas) < 1 / len(self.gammas) - 1e-6:
            raise ValueError("The largest block coherence must be at least 1/J")
        return self

    @property
    def num_blocks(self) -> int:
        return len(self.gammas)


class BlockAllocation(BaseModel):
    m0: int = Field(ge=1)
    block_sizes: list[int]

    @model_validator(mode="after")
    def check_sizes(self) -> "BlockAllocation":
        if not self.block_sizes or min(self.block_sizes) < 1:
            raise ValueError("Every block needs at least one sketch row")
        return self

    @property
    def total(self) -> int:
        return sum(self.block_sizes)


def allocation_record(profile: CoherenceProfile, allocation: BlockAllocation) -> dict:
    """The JSON-ready record combining coherence values and block sizes."""
    return {
        "gammas": list(profile.gammas),
        "block_rows": list(profile.block_rows),
        "m0": allocation.m0,
        "block_sizes": list(allocation.block_sizes),
        "total": allocation.total,
    }


def stable_rank(W: np.ndarray) -> float:
    """sr(W) = ||W||_F^2 / ||W||_2^2, a value in [1, min(rows, cols)]."""
    W = as_dense(W)
    sigma = spectral_norm(W)
    if sigma == 0.0:
        raise ZeroMatrixError("stable rank undefined for zero matrix")
    return frobenius_norm(W) ** 2 / sigma**2


def statistical_dimension_of_spectrum(
    sigmas: Sequence[float] | np.ndarray, lam: float
) -> float:
    """sum_i s_i^2 / (s_i^2 + lam), with numerically-zero values contributing zero."""
    if lam < 0:
        raise ValidationError("lambda must be nonnegative")
    s = np.asarray(sigmas, dtype=np.float64)
    if s.size == 0 or s.max() == 0.0:
        return 0.0
    s = s[s > RANK_TOL * s.max()]
    s2 = s * s
    return float(np.sum(s2 / (s2 + lam)))


def statistical_dimension(A: np.ndarray, lam: float) -> float:
    """sd_lambda(A); equals rank(A) at lambda = 0."""
    if lam < 0:
        raise ValidationError("lambda must be nonnegative")
    return statistical_dimension_of_spectrum(singular_values(A), lam)


def orthobasis(A: PartitionedMatrix, rank_tol: float = RANK_TOL) -> PartitionedMatrix:
    """
    Orthonormal basis for the column space of A, partitioned like A.

    Left singular vectors with singular value above rank_tol * sigma_max are kept,
    so rank-deficient input yields fewer columns.
    """
    flat = A.flatten()
    if A.total_rows < A.cols:
        raise ValidationError(
            f"An orthobasis needs total_rows >= cols, got {A.total_rows} x {A.cols}"
        )
    U, s, _ = np.linalg.svd(flat, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        rank = 0
    else:
        rank = int(np.sum(s > rank_tol * s[0]))
    if rank < A.cols:
        logger.info("Column space has numerical rank %d of %d", rank, A.cols)
    if rank == 0:
        # keep the partition shape with a single zero column
        return PartitionedMatrix.from_dense(np.zeros((A.total_rows, 1)), A.block_rows)
    return PartitionedMatrix.from_dense(U[:, :rank], A.block_rows)


def check_orthonormal(U: np.ndarray, tol: float = ORTHONORMAL_TOL) -> None:
    deviation = orthonormality_deviation(U)
    if deviation > tol:
        logger.error("Basis is not orthonormal (deviation %.3e)", deviation)
        raise NotOrthonormalError(deviation, tol)


def block_coherence(U: PartitionedMatrix) -> CoherenceProfile:
    """
    Gamma(U_j) = min(N_j * max|U_j|^2, ||U_j||_2^2) for every block of an
    orthonormal basis U.
    """
    check_orthonormal(U.flatten())
    gammas = []
    for block in U.blocks:
        entry_term = block.shape[0] * float(np.max(np.abs(block))) ** 2
        norm_term = spectral_norm(block, tol=COHERENCE_NORM_TOL) ** 2
        gammas.append(min(entry_term, norm_term))
    return CoherenceProfile(gammas=gammas, basis_cols=U.cols, block_rows=U.block_rows)


def _ceil(value: float) -> int:
    return math.ceil(value - ALLOCATION_ROUNDING_TOL * max(1.0, value))


def allocate(m0: int, profile: CoherenceProfile) -> BlockAllocation:
    """M_j = max(1, ceil(m0 * Gamma_j))."""
    if m0 < 1:
        raise ValidationError("m0 must be at least 1")
    sizes = [max(1, _ceil(m0 * gamma)) for gamma in profile.gammas]
    return BlockAllocation(m0=m0, block_sizes=sizes)


def allocate_to_total(m_total: int, profile: CoherenceProfile) -> BlockAllocation:
    """
    The coherence-proportional allocation whose total is closest to m_total.

    The total is nondecreasing in m0, so m0 is found by bisection.
    """
    num_blocks = profile.num_blocks
    if m_total < num_blocks:
        raise ValidationError(
            f"A total of {m_total} rows cannot give each of {num_blocks} blocks a row"
        )
    low, high = 1, max(1, m_total) * num_blocks + 1
    if allocate(low, profile).total > m_total:
        return allocate(low, profile)
    # invariant: total(low) <= m_total < total(high)
    while high - low > 1:
        mid = (low + high) // 2
        if allocate(mid, profile).total <= m_total:
            low = mid
        else:
            high = mid
    below, above = allocate(low, profile), allocate(high, profile)
    if abs(above.total - m_total) < abs(m_total - below.total):
        return above
    return below


def uniform_allocation(m_total: int, num_blocks: int) -> BlockAllocation:
    """Equal block sizes floor(m_total / J), the remainder spread over the first."""
    if m_total < num_blocks:
        raise ValidationError(
            f"A total of {m_total} rows cannot give each of {num_blocks} blocks a row"
        )
    sizes = equal_block_rows(m_total, num_blocks)
    return BlockAllocation(m0=m_total, block_sizes=sizes)


def matmul_sample_size(
    k: float, eps: float, delta: float, constant: float = 1.0
) -> int:
    """m0 = C k log(2 / delta) / eps^2 for products with spectral error eps."""
    if k <= 0 or eps <= 0 or not 0 < delta < 1:
        raise ValidationError("Need k > 0, eps > 0 and 0 < delta < 1")
    return max(1, _ceil(constant * k * math.log(2.0 / delta) / eps**2))


def ridge_sample_size(sd: float, eps: float, constant: float = 1.0) -> int:
    """m0 = C sd_lambda / eps for a (1 + eps)-optimal sketched ridge solution."""
    if sd <= 0 or eps <= 0:
        raise ValidationError("Need a positive statistical dimension and eps")
    return max(1, _ceil(constant * sd / eps))
