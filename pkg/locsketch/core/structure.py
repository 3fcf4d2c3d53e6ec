"""
Containers shared by every module: the row-partitioned data matrix and the seeded
random stream.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from locsketch.core.exc import NonFiniteError, PartitionMismatchError, ValidationError


def as_dense(x: np.ndarray | Sequence, name: str = "matrix") -> np.ndarray:
    """Return x as a C-ordered 2-D float64 array, rejecting NaN and Inf."""
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be 2-D, got {arr.ndim} dimensions")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{name} contains NaN or Inf entries")
    return arr


def as_vector(x: np.ndarray | Sequence, name: str = "vector") -> np.ndarray:
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be 1-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{name} contains NaN or Inf entries")
    return arr


def equal_block_rows(total_rows: int, num_blocks: int) -> list[int]:
    """Split total_rows into num_blocks contiguous sizes, remainder to the first."""
    if num_blocks < 1 or num_blocks > total_rows:
        raise ValidationError(
            f"Cannot split {total_rows} rows into {num_blocks} non-empty blocks"
        )
    base, remainder = divmod(total_rows, num_blocks)
    return [base + 1 if j < remainder else base for j in range(num_blocks)]


@dataclass(frozen=True)
class PartitionedMatrix:
    """A matrix split into J row blocks A_1, ..., A_J sharing a column count.

    Blocks are validated on construction and never modified afterwards.
    """

    blocks: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if len(self.blocks) == 0:
            raise ValidationError("A partitioned matrix needs at least one block")
        blocks = tuple(
            as_dense(block, name=f"block {j}") for j, block in enumerate(self.blocks)
        )
        cols = blocks[0].shape[1]
        for j, block in enumerate(blocks):
            if block.shape[0] < 1:
                raise ValidationError(f"Block {j} has no rows")
            if block.shape[1] != cols:
                raise ValidationError(
                    f"Block {j} has {block.shape[1]} columns, expected {cols}"
                )
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_dense(
        cls, matrix: np.ndarray, block_rows: Sequence[int]
    ) -> PartitionedMatrix:
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim == 1:
            matrix = matrix[:, None]
        if sum(block_rows) != matrix.shape[0]:
            raise PartitionMismatchError(
                "Block sizes do not add up to the number of rows",
                list(block_rows),
                [matrix.shape[0]],
            )
        offsets = np.cumsum([0, *block_rows])
        return cls(
            tuple(
                matrix[offsets[j] : offsets[j + 1]] for j in range(len(block_rows))
            )
        )

    @classmethod
    def from_equal_blocks(
        cls, matrix: np.ndarray, num_blocks: int
    ) -> PartitionedMatrix:
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim == 1:
            matrix = matrix[:, None]
        return cls.from_dense(matrix, equal_block_rows(matrix.shape[0], num_blocks))

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    @property
    def block_rows(self) -> list[int]:
        return [block.shape[0] for block in self.blocks]

    @property
    def cols(self) -> int:
        return self.blocks[0].shape[1]

    @property
    def total_rows(self) -> int:
        return sum(self.block_rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.total_rows, self.cols)

    def __iter__(self) -> Iterator[np.ndarray]:
        return iter(self.blocks)

    def flatten(self) -> np.ndarray:
        """Stack the blocks back into the unpartitioned matrix."""
        return np.vstack(self.blocks)

    def block_slices(self) -> list[slice]:
        offsets = np.cumsum([0, *self.block_rows])
        return [
            slice(int(offsets[j]), int(offsets[j + 1])) for j in range(self.num_blocks)
        ]

    def with_blocks(self, blocks: Sequence[np.ndarray]) -> PartitionedMatrix:
        """Build a new matrix on the same row partition from replacement blocks."""
        new = PartitionedMatrix(tuple(blocks))
        check_same_partition(self, new)
        return new

    def select_columns(self, columns: Sequence[int]) -> PartitionedMatrix:
        columns = list(columns)
        return PartitionedMatrix(tuple(block[:, columns] for block in self.blocks))

    def permuted(self, order: Sequence[int]) -> PartitionedMatrix:
        """Reorder the blocks: block k of the result is block order[k] of self."""
        if sorted(order) != list(range(self.num_blocks)):
            raise ValidationError(f"{list(order)} is not a permutation of the blocks")
        return PartitionedMatrix(tuple(self.blocks[j] for j in order))


def check_same_partition(left: PartitionedMatrix, right: PartitionedMatrix) -> None:
    if left.block_rows != right.block_rows:
        raise PartitionMismatchError(
            "Row partitions differ", left.block_rows, right.block_rows
        )


@dataclass(frozen=True)
class RandomSource:
    """A reproducible random stream identified by (root_seed, stream_id).

    Draws come from numpy's counter-based Philox generator seeded through
    SeedSequence(root_seed, spawn_key=(stream_id,)), so the same pair always yields
    the same sequence, independently of threads or call order.
    """

    root_seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        for name in ("root_seed", "stream_id"):
            value = getattr(self, name)
            if not 0 <= int(value) < 2**64:
                raise ValidationError(f"{name} must be an unsigned 64-bit integer")
            object.__setattr__(self, name, int(value))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.root_seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.Philox(seq))

    def derive(self, *keys: int) -> RandomSource:
        """Return the child stream keyed by (root_seed, stream_id, *keys)."""
        entropy = [self.root_seed, self.stream_id, *(int(k) for k in keys)]
        child = np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)[0]
        return RandomSource(self.root_seed, int(child))
