import numpy as np
import pytest

from locsketch.core.exc import (
    DimensionMismatchError,
    PartitionMismatchError,
    ValidationError,
)
from locsketch.core.matrix import qr_thin
from locsketch.core.structure import PartitionedMatrix, RandomSource
from locsketch.measures.complexity import BlockAllocation, uniform_allocation
from locsketch.sketch.operators import (
    BlockDiagonalSketch,
    SketchKind,
    apply,
    build_block_diagonal,
    build_dense_gaussian,
    build_from_descriptor,
    build_identity_blocks,
    build_subsampled_fourier,
)


def test_block_diagonal_shape_and_sparsity(seed: RandomSource) -> None:
    S = build_block_diagonal(BlockAllocation(m0=5, block_sizes=[2, 3]), [4, 4], seed)
    dense = S.materialize()
    assert dense.shape == (5, 8)
    assert np.count_nonzero(dense) == 2 * 4 + 3 * 4
    assert np.count_nonzero(dense[:2, 4:]) == 0
    assert np.count_nonzero(dense[2:, :4]) == 0
    assert (S.total_rows, S.total_cols) == (5, 8)


def test_block_diagonal_is_reproducible(seed: RandomSource) -> None:
    alloc = BlockAllocation(m0=7, block_sizes=[3, 4])
    first = build_block_diagonal(alloc, [5, 6], seed)
    second = build_block_diagonal(alloc, [5, 6], seed)
    for a, b in zip(first.blocks, second.blocks):
        assert np.array_equal(a, b)


def test_block_depends_only_on_its_index(seed: RandomSource) -> None:
    short = build_block_diagonal(BlockAllocation(m0=2, block_sizes=[2]), [5], seed)
    long = build_block_diagonal(
        BlockAllocation(m0=5, block_sizes=[2, 3]), [5, 7], seed
    )
    assert np.array_equal(short.blocks[0], long.blocks[0])


def test_apply_matches_materialized(
    seed: RandomSource, small_matrix: PartitionedMatrix
) -> None:
    S = build_block_diagonal(uniform_allocation(9, 3), small_matrix.block_rows, seed)
    expected = S.materialize() @ small_matrix.flatten()
    assert np.allclose(apply(S, small_matrix), expected, atol=1e-12)
    assert np.allclose(S.apply(small_matrix.flatten()), expected, atol=1e-12)
    assert np.allclose(apply(S, small_matrix, workers=3), expected, atol=1e-12)
    vector = small_matrix.flatten()[:, 0]
    assert S.apply(vector).shape == (9,)


def test_apply_is_local(seed: RandomSource, small_matrix: PartitionedMatrix) -> None:
    S = build_block_diagonal(uniform_allocation(9, 3), small_matrix.block_rows, seed)
    before = apply(S, small_matrix)
    poisoned = list(small_matrix.blocks)
    poisoned[1] = np.full_like(poisoned[1], np.nan)
    after = S.apply_blocks(poisoned)
    rows = S.block_sizes
    assert np.array_equal(after[: rows[0]], before[: rows[0]])
    assert np.array_equal(after[rows[0] + rows[1] :], before[rows[0] + rows[1] :])
    assert np.all(np.isnan(after[rows[0] : rows[0] + rows[1]]))


def test_apply_rejects_other_partition(
    seed: RandomSource, small_matrix: PartitionedMatrix
) -> None:
    S = build_block_diagonal(uniform_allocation(9, 3), [20, 20, 20], seed)
    with pytest.raises(PartitionMismatchError):
        apply(S, small_matrix)
    with pytest.raises(DimensionMismatchError):
        S.apply(np.ones((59, 2)))


def test_identity_blocks_return_input(small_matrix: PartitionedMatrix) -> None:
    S = build_identity_blocks(small_matrix.block_rows)
    assert np.array_equal(apply(S, small_matrix), small_matrix.flatten())
    assert S.kind == SketchKind.IDENTITY


def test_single_block_matches_dense_distribution(seed: RandomSource) -> None:
    S = build_block_diagonal(BlockAllocation(m0=4, block_sizes=[4]), [6], seed)
    assert S.materialize().shape == (4, 6)
    dense = build_dense_gaussian(4, 6, seed)
    assert dense.materialize().shape == (4, 6)


def test_dense_gaussian(seed: RandomSource) -> None:
    S = build_dense_gaussian(1, 1, seed)
    assert S.materialize().shape == (1, 1)
    S = build_dense_gaussian(5, 10, seed)
    X = np.arange(20.0).reshape(10, 2)
    assert np.allclose(apply(S, X), S.materialize() @ X)
    assert np.array_equal(
        S.materialize(), build_dense_gaussian(5, 10, seed).materialize()
    )


def test_block_sketch_is_unbiased_on_unit_vector() -> None:
    rng = np.random.default_rng(1)
    U = PartitionedMatrix.from_equal_blocks(qr_thin(rng.standard_normal((60, 3)))[0], 3)
    z = np.array([0.6, 0.0, 0.8])
    Uz = PartitionedMatrix.from_dense(U.flatten() @ z, U.block_rows)
    alloc = BlockAllocation(m0=60, block_sizes=[20, 20, 20])
    norms = []
    for s in range(500):
        S = build_block_diagonal(alloc, U.block_rows, RandomSource(s))
        norms.append(np.sum(apply(S, Uz) ** 2))
    assert np.mean(norms) == pytest.approx(1.0, abs=0.05)


def test_fourier_full_sampling_is_orthogonal(seed: RandomSource) -> None:
    S = build_subsampled_fourier(16, 16, seed)
    X = np.random.default_rng(2).standard_normal((16, 3))
    assert np.allclose(S.adjoint_apply(S.apply(X)), X, atol=1e-10)
    assert np.allclose(S.materialize().T @ S.materialize(), np.eye(16), atol=1e-10)


def test_fourier_isometry_in_expectation() -> None:
    e1 = np.zeros(8)
    e1[0] = 1.0
    norms = [
        np.sum(build_subsampled_fourier(2, 8, RandomSource(s)).apply(e1) ** 2)
        for s in range(2000)
    ]
    assert np.mean(norms) == pytest.approx(1.0, rel=0.05)


def test_fourier_validation(seed: RandomSource) -> None:
    with pytest.raises(ValidationError):
        build_subsampled_fourier(4, 12, seed)
    with pytest.raises(ValidationError):
        build_subsampled_fourier(9, 8, seed)


def test_descriptor_rebuilds_operator(seed: RandomSource) -> None:
    S = build_block_diagonal(BlockAllocation(m0=5, block_sizes=[2, 3]), [4, 6], seed)
    rebuilt = build_from_descriptor(S.descriptor())
    assert isinstance(rebuilt, BlockDiagonalSketch)
    assert np.array_equal(rebuilt.materialize(), S.materialize())
    for op in (build_dense_gaussian(3, 8, seed), build_subsampled_fourier(3, 8, seed)):
        assert np.array_equal(
            build_from_descriptor(op.descriptor()).materialize(), op.materialize()
        )
    json_text = S.descriptor().model_dump_json()
    assert '"block_diagonal_gaussian"' in json_text


@pytest.mark.slow
def test_block_sketch_is_unbiased_on_subspace() -> None:
    rng = np.random.default_rng(3)
    U = PartitionedMatrix.from_equal_blocks(
        qr_thin(rng.standard_normal((1000, 10)))[0], 10
    )
    alloc = BlockAllocation(m0=60, block_sizes=[3, 4, 5, 6, 7, 8, 9, 10, 4, 4])
    total = np.zeros((10, 10))
    for s in range(500):
        SU = apply(build_block_diagonal(alloc, U.block_rows, RandomSource(s)), U)
        total += SU.T @ SU
    assert np.linalg.norm(total / 500 - np.eye(10)) <= 0.05 * np.sqrt(10)
