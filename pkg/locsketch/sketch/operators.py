"""
Sketch operators: block-diagonal Gaussian, dense Gaussian and subsampled fast
transform, plus the identity-block operator used to check exactness.

Every operator is immutable after construction and reconstructable from its
SketchDescriptor. Block-diagonal operators store only their diagonal blocks S_j;
the full S_D is formed only by materialize(), which is meant for small checks.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import Sequence

import numpy as np
import scipy.fft
from pydantic import BaseModel

from locsketch.core.exc import (
    DimensionMismatchError,
    PartitionMismatchError,
    ValidationError,
)
from locsketch.core.matrix import gaussian_matrix
from locsketch.core.structure import PartitionedMatrix, RandomSource
from locsketch.measures.complexity import BlockAllocation

logger = logging.getLogger(__name__)


class SketchKind(str, Enum):
    BLOCK_DIAGONAL_GAUSSIAN = "block_diagonal_gaussian"
    DENSE_GAUSSIAN = "dense_gaussian"
    SUBSAMPLED_FOURIER = "subsampled_fourier"
    IDENTITY = "identity"


class SketchDescriptor(BaseModel):
    kind: SketchKind
    root_seed: int = 0
    stream_id: int = 0
    allocation: BlockAllocation | None = None
    block_rows: list[int] | None = None
    n: int
    m: int


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _as_operand(X: PartitionedMatrix | np.ndarray) -> tuple[np.ndarray, bool]:
    """Flatten X into a 2-D array; the flag records whether X was a vector."""
    if isinstance(X, PartitionedMatrix):
        return X.flatten(), False
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 1:
        return arr[:, None], True
    return arr, False


class SketchOperator:
    """
    Base class for sketch operators. Subclasses implement apply and materialize.
    """

    kind: SketchKind

    def __init__(self, m: int, n: int, seed: RandomSource | None) -> None:
        if m < 1 or n < 1:
            raise ValidationError(f"Invalid sketch shape {m} x {n}")
        self._m = m
        self._n = n
        self.seed = seed

    @property
    def total_rows(self) -> int:
        return self._m

    @property
    def total_cols(self) -> int:
        return self._n

    def apply(self, X: PartitionedMatrix | np.ndarray, workers: int = 1) -> np.ndarray:
        raise NotImplementedError(
            "Sketch operators must implement apply by inheriting from SketchOperator"
        )

    def materialize(self) -> np.ndarray:
        raise NotImplementedError(
            "Sketch operators must implement materialize by inheriting from "
            "SketchOperator"
        )

    def descriptor(self) -> SketchDescriptor:
        seed = self.seed or RandomSource(0)
        return SketchDescriptor(
            kind=self.kind,
            root_seed=seed.root_seed,
            stream_id=seed.stream_id,
            n=self._n,
            m=self._m,
        )

    def _check_rows(self, rows: int) -> None:
        if rows != self._n:
            raise DimensionMismatchError(
                "Operand rows do not match the sketch", (self._m, self._n), (rows,)
            )


class BlockDiagonalSketch(SketchOperator):
    """S_D = diag(S_1, ..., S_J) with S_j of shape M_j x N_j."""

    kind = SketchKind.BLOCK_DIAGONAL_GAUSSIAN

    def __init__(
        self,
        blocks: Sequence[np.ndarray],
        seed: RandomSource | None = None,
        allocation: BlockAllocation | None = None,
    ) -> None:
        self.blocks = tuple(np.asarray(b, dtype=np.float64) for b in blocks)
        if not self.blocks:
            raise ValidationError("A block-diagonal sketch needs at least one block")
        super().__init__(
            sum(b.shape[0] for b in self.blocks),
            sum(b.shape[1] for b in self.blocks),
            seed,
        )
        self.allocation = allocation or BlockAllocation(
            m0=self._m, block_sizes=[b.shape[0] for b in self.blocks]
        )

    @property
    def block_rows(self) -> list[int]:
        return [b.shape[1] for b in self.blocks]

    @property
    def block_sizes(self) -> list[int]:
        return [b.shape[0] for b in self.blocks]

    def apply_blocks(
        self, x_blocks: Sequence[np.ndarray], workers: int = 1
    ) -> np.ndarray:
        """
        Stack S_j X_j over the blocks. Output rows of block j depend on X_j only.
        """
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                pieces = list(pool.map(np.matmul, self.blocks, x_blocks))
        else:
            pieces = [s @ x for s, x in zip(self.blocks, x_blocks)]
        return np.vstack(pieces)

    def apply(self, X: PartitionedMatrix | np.ndarray, workers: int = 1) -> np.ndarray:
        if isinstance(X, PartitionedMatrix):
            if X.block_rows != self.block_rows:
                logger.error("Sketch and data partitions differ")
                raise PartitionMismatchError(
                    "Sketch and data partitions differ", self.block_rows, X.block_rows
                )
            return self.apply_blocks(X.blocks, workers)
        arr, is_vector = _as_operand(X)
        self._check_rows(arr.shape[0])
        out = self.apply_blocks(
            PartitionedMatrix.from_dense(arr, self.block_rows).blocks, workers
        )
        return out[:, 0] if is_vector else out

    def materialize(self) -> np.ndarray:
        dense = np.zeros((self._m, self._n))
        row, col = 0, 0
        for block in self.blocks:
            dense[row : row + block.shape[0], col : col + block.shape[1]] = block
            row += block.shape[0]
            col += block.shape[1]
        return dense

    def descriptor(self) -> SketchDescriptor:
        desc = super().descriptor()
        desc.allocation = self.allocation
        desc.block_rows = self.block_rows
        return desc


class IdentitySketch(BlockDiagonalSketch):
    """Block-diagonal operator with S_j = I; sketching with it changes nothing."""

    kind = SketchKind.IDENTITY

    def __init__(self, block_rows: Sequence[int]) -> None:
        super().__init__([np.eye(n) for n in block_rows])

    def apply_blocks(
        self, x_blocks: Sequence[np.ndarray], workers: int = 1
    ) -> np.ndarray:
        return np.vstack([np.array(x, dtype=np.float64) for x in x_blocks])


class DenseGaussianSketch(SketchOperator):
    kind = SketchKind.DENSE_GAUSSIAN

    def __init__(self, m: int, n: int, seed: RandomSource) -> None:
        super().__init__(m, n, seed)
        self.matrix = gaussian_matrix(m, n, 1.0 / m, seed)

    def apply(self, X: PartitionedMatrix | np.ndarray, workers: int = 1) -> np.ndarray:
        arr, is_vector = _as_operand(X)
        self._check_rows(arr.shape[0])
        out = self.matrix @ arr
        return out[:, 0] if is_vector else out

    def materialize(self) -> np.ndarray:
        return self.matrix.copy()


class SubsampledFourierSketch(SketchOperator):
    """
    x -> sqrt(n/m) * P F D x with D a random sign diagonal, F the orthonormal
    type-II DCT and P a uniform selection of m rows without replacement.
    """

    kind = SketchKind.SUBSAMPLED_FOURIER

    def __init__(self, m: int, n: int, seed: RandomSource) -> None:
        if not is_power_of_two(n):
            raise ValidationError(f"n = {n} is not a power of two")
        if m > n:
            raise ValidationError(f"Cannot sample m = {m} rows out of n = {n}")
        super().__init__(m, n, seed)
        rng = seed.generator()
        self.signs = rng.integers(0, 2, size=n).astype(np.float64) * 2.0 - 1.0
        self.rows = np.sort(rng.choice(n, size=m, replace=False))
        self.scale = np.sqrt(n / m)

    def apply(self, X: PartitionedMatrix | np.ndarray, workers: int = 1) -> np.ndarray:
        arr, is_vector = _as_operand(X)
        self._check_rows(arr.shape[0])
        transformed = scipy.fft.dct(
            self.signs[:, None] * arr, type=2, norm="ortho", axis=0, workers=workers
        )
        out = self.scale * transformed[self.rows]
        return out[:, 0] if is_vector else out

    def adjoint_apply(self, Y: np.ndarray) -> np.ndarray:
        arr = np.asarray(Y, dtype=np.float64)
        is_vector = arr.ndim == 1
        if is_vector:
            arr = arr[:, None]
        if arr.shape[0] != self._m:
            raise DimensionMismatchError(
                "Operand rows do not match the sketch", (self._m, self._n), arr.shape
            )
        full = np.zeros((self._n, arr.shape[1]))
        full[self.rows] = self.scale * arr
        out = self.signs[:, None] * scipy.fft.idct(full, type=2, norm="ortho", axis=0)
        return out[:, 0] if is_vector else out

    def materialize(self) -> np.ndarray:
        return self.apply(np.eye(self._n))


def build_block_diagonal(
    alloc: BlockAllocation, block_rows: Sequence[int], seed: RandomSource
) -> BlockDiagonalSketch:
    """
    Block j is M_j x N_j with N(0, 1/M_j) entries drawn from seed.derive(j), so
    blocks are independent of each other and of construction order.
    """
    if len(alloc.block_sizes) != len(block_rows):
        raise PartitionMismatchError(
            "Allocation and data partition have different lengths",
            alloc.block_sizes,
            block_rows,
        )
    if min(block_rows) < 1:
        raise ValidationError("Every data block needs at least one row")
    blocks = [
        gaussian_matrix(m_j, n_j, 1.0 / m_j, seed.derive(j))
        for j, (m_j, n_j) in enumerate(zip(alloc.block_sizes, block_rows))
    ]
    return BlockDiagonalSketch(blocks, seed=seed, allocation=alloc)


def build_dense_gaussian(m: int, n: int, seed: RandomSource) -> DenseGaussianSketch:
    return DenseGaussianSketch(m, n, seed)


def build_subsampled_fourier(
    m: int, n: int, seed: RandomSource
) -> SubsampledFourierSketch:
    return SubsampledFourierSketch(m, n, seed)


def build_identity_blocks(block_rows: Sequence[int]) -> IdentitySketch:
    return IdentitySketch(block_rows)


def build_from_descriptor(desc: SketchDescriptor) -> SketchOperator:
    seed = RandomSource(desc.root_seed, desc.stream_id)
    if desc.kind == SketchKind.BLOCK_DIAGONAL_GAUSSIAN:
        if desc.allocation is None or desc.block_rows is None:
            raise ValidationError("Block-diagonal descriptors need an allocation")
        return build_block_diagonal(desc.allocation, desc.block_rows, seed)
    if desc.kind == SketchKind.IDENTITY:
        if desc.block_rows is None:
            raise ValidationError("Identity descriptors need block rows")
        return build_identity_blocks(desc.block_rows)
    if desc.kind == SketchKind.DENSE_GAUSSIAN:
        return build_dense_gaussian(desc.m, desc.n, seed)
    return build_subsampled_fourier(desc.m, desc.n, seed)


def apply(
    S: SketchOperator, X: PartitionedMatrix | np.ndarray, workers: int = 1
) -> np.ndarray:
    """Compute S X without forming block-diagonal operators densely."""
    return S.apply(X, workers=workers)
