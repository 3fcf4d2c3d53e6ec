"""Configuration module for unit tests."""
import numpy as np
import pytest

from locsketch.core.structure import PartitionedMatrix, RandomSource
from locsketch.harness.synthetic import SyntheticData, SyntheticSpec, generate

TEST_SEED = 20200826


@pytest.fixture()
def seed() -> RandomSource:
    return RandomSource(TEST_SEED)


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(TEST_SEED)


@pytest.fixture()
def small_matrix(rng: np.random.Generator) -> PartitionedMatrix:
    """A 60 x 5 Gaussian matrix in blocks of 10, 20 and 30 rows."""
    return PartitionedMatrix.from_dense(rng.standard_normal((60, 5)), [10, 20, 30])


@pytest.fixture(scope="session")
def reference_data() -> SyntheticData:
    """The incoherent 2000 x 50 problem in 10 blocks with sd_lambda 8.5."""
    return generate(SyntheticSpec.reference(RandomSource(TEST_SEED)))


@pytest.fixture(scope="session")
def planted_data() -> SyntheticData:
    spec = SyntheticSpec.reference(
        RandomSource(TEST_SEED), coherence_mode="planted", planted_strength=0.9
    )
    return generate(spec)
