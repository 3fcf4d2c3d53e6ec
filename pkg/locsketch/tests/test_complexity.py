import numpy as np
import pytest

from locsketch.core.exc import NotOrthonormalError, ValidationError, ZeroMatrixError
from locsketch.core.matrix import qr_thin
from locsketch.core.structure import PartitionedMatrix
from locsketch.measures.complexity import (
    CoherenceProfile,
    allocate,
    allocate_to_total,
    allocation_record,
    block_coherence,
    matmul_sample_size,
    orthobasis,
    ridge_sample_size,
    stable_rank,
    statistical_dimension,
    statistical_dimension_of_spectrum,
    uniform_allocation,
)


def _profile(gammas: list[float]) -> CoherenceProfile:
    return CoherenceProfile(gammas=gammas, basis_cols=1, block_rows=[10] * len(gammas))


def test_stable_rank() -> None:
    assert stable_rank(np.eye(4)) == pytest.approx(4.0)
    assert stable_rank(np.outer([1.0, 2.0, 3.0], [1.0, -1.0])) == pytest.approx(1.0)
    assert stable_rank(np.diag([2.0, 1.0, 1.0])) == pytest.approx(1.5)
    with pytest.raises(ZeroMatrixError, match="stable rank undefined for zero matrix"):
        stable_rank(np.zeros((3, 2)))


def test_statistical_dimension(rng: np.random.Generator) -> None:
    A = rng.standard_normal((30, 6))
    assert statistical_dimension(A, 0.0) == pytest.approx(6.0)
    assert statistical_dimension_of_spectrum([1.0, 1.0], 1.0) == pytest.approx(1.0)
    assert statistical_dimension(A, 1e12) < 1e-6
    with pytest.raises(ValidationError):
        statistical_dimension(A, -1.0)


def test_orthobasis_spans_columns(rng: np.random.Generator) -> None:
    A = PartitionedMatrix.from_equal_blocks(rng.standard_normal((200, 10)), 4)
    U = orthobasis(A)
    assert U.block_rows == A.block_rows
    flat_U, flat_A = U.flatten(), A.flatten()
    residual = flat_U @ (flat_U.T @ flat_A) - flat_A
    assert np.linalg.norm(residual) <= 1e-8 * np.linalg.norm(flat_A)


def test_orthobasis_of_canonical_embedding() -> None:
    A = PartitionedMatrix.from_dense(np.vstack([np.eye(3), np.zeros((6, 3))]), [3, 6])
    U = orthobasis(A).flatten()
    assert np.allclose(np.abs(U.T @ A.flatten()), np.eye(3))
    assert np.allclose(U[3:], 0.0)


def test_orthobasis_rank_deficient(rng: np.random.Generator) -> None:
    base = rng.standard_normal((40, 2))
    dependent = np.hstack([base, base.sum(axis=1)[:, None]])
    A = PartitionedMatrix.from_equal_blocks(dependent, 2)
    assert orthobasis(A).cols == 2


def test_block_coherence_flat_basis() -> None:
    # columns of a scaled Hadamard matrix have all entries +-1/sqrt(N)
    H = np.array([[1.0, 1.0], [1.0, -1.0]])
    for _ in range(2):
        H = np.kron(H, np.array([[1.0, 1.0], [1.0, -1.0]]))
    U = PartitionedMatrix.from_equal_blocks(H[:, :2] / np.sqrt(8.0), 4)
    profile = block_coherence(U)
    assert profile.gammas == pytest.approx([0.25] * 4)


def test_block_coherence_aligned_basis() -> None:
    aligned = np.vstack([np.eye(3), np.zeros((9, 3))])
    U = PartitionedMatrix.from_dense(aligned, [3, 3, 6])
    assert block_coherence(U).gammas == pytest.approx([1.0, 0.0, 0.0])


def test_block_coherence_matches_direct_formula(rng: np.random.Generator) -> None:
    Q = qr_thin(rng.standard_normal((1000, 8)))[0]
    U = PartitionedMatrix.from_equal_blocks(Q, 10)
    profile = block_coherence(U)
    for gamma, block in zip(profile.gammas, U.blocks):
        direct = min(
            block.shape[0] * np.max(np.abs(block)) ** 2,
            np.linalg.norm(block, 2) ** 2,
        )
        assert gamma == pytest.approx(direct, rel=1e-8, abs=1e-12)
    assert max(profile.gammas) >= 1 / 10


def test_block_coherence_rejects_non_orthonormal(
    small_matrix: PartitionedMatrix,
) -> None:
    with pytest.raises(NotOrthonormalError):
        block_coherence(small_matrix)


def test_coherence_decreases_on_column_subsets() -> None:
    violations = 0
    for instance in range(50):
        rng = np.random.default_rng(instance)
        U = PartitionedMatrix.from_equal_blocks(
            qr_thin(rng.standard_normal((400, 12)))[0], 8
        )
        full = block_coherence(U).gammas
        subset = rng.choice(12, size=4, replace=False)
        sub = block_coherence(U.select_columns(subset)).gammas
        violations += sum(s > g + 1e-8 for s, g in zip(sub, full))
    assert violations == 0


def test_allocate() -> None:
    uniform = allocate(100, _profile([0.1] * 10))
    assert uniform.block_sizes == [10] * 10
    assert uniform.total == 100
    assert allocate(50, _profile([1.0, 0.0, 0.0])).block_sizes == [50, 1, 1]
    mixed = allocate(40, _profile([0.3, 0.25, 0.45]))
    assert mixed.block_sizes == [12, 10, 18]
    assert mixed.total == 40
    with pytest.raises(ValidationError):
        allocate(0, _profile([1.0]))


def test_allocate_to_total() -> None:
    profile = _profile([0.3, 0.25, 0.45])
    assert allocate_to_total(40, profile).total == 40
    assert abs(allocate_to_total(101, profile).total - 101) <= 2
    with pytest.raises(ValidationError):
        allocate_to_total(2, profile)


def test_uniform_allocation() -> None:
    assert uniform_allocation(23, 5).block_sizes == [5, 5, 5, 4, 4]
    with pytest.raises(ValidationError):
        uniform_allocation(3, 5)


def test_profile_validation() -> None:
    with pytest.raises(ValueError):
        _profile([1.5, 0.0])
    with pytest.raises(ValueError):
        _profile([0.1, 0.1, 0.1])


def test_allocation_record() -> None:
    profile = _profile([0.5, 0.5])
    record = allocation_record(profile, allocate(4, profile))
    assert record["block_sizes"] == [2, 2]
    assert record["total"] == 4


def test_sample_sizes() -> None:
    assert ridge_sample_size(8.5, 0.5, constant=8) == 136
    assert matmul_sample_size(5, 0.5, 0.1) == int(np.ceil(5 * np.log(20) / 0.25))
    with pytest.raises(ValidationError):
        ridge_sample_size(8.5, 0.0)


def test_stable_rank_is_scale_invariant(rng: np.random.Generator) -> None:
    A = rng.standard_normal((20, 6))
    for c in (-3.0, 0.5, 1e3):
        assert stable_rank(c * A) == pytest.approx(stable_rank(A), rel=1e-12)


def test_statistical_dimension_nonincreasing_in_lambda(
    rng: np.random.Generator,
) -> None:
    A = rng.standard_normal((30, 6))
    dims = [statistical_dimension(A, lam) for lam in (0.0, 0.1, 1.0, 10.0, 100.0)]
    assert dims[0] == pytest.approx(6.0, rel=1e-12)
    assert all(later <= earlier + 1e-12 for earlier, later in zip(dims, dims[1:]))
    assert max(dims) <= 6.0 + 1e-12


def test_allocation_total_bounds(rng: np.random.Generator) -> None:
    A = PartitionedMatrix.from_equal_blocks(rng.standard_normal((200, 5)), 8)
    profile = block_coherence(orthobasis(A))
    mass = sum(profile.gammas)
    for m0 in (1, 7, 40, 333):
        total = allocate(m0, profile).total
        assert m0 * mass - 1e-6 <= total <= m0 * mass + profile.num_blocks
