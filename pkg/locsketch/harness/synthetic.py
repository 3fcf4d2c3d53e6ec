"""
Synthetic ridge problems with a controlled spectrum and block coherence.

A = U diag(sigma) V^T with U an orthonormal basis that is either spread evenly over
the row blocks ("incoherent") or concentrated on one block ("planted"), and
b = A x_true + noise.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Literal

import numpy as np
import scipy.optimize
from pydantic import BaseModel, Field, model_validator

from locsketch.core.constants import DEFAULT_ROOT_SEED
from locsketch.core.exc import InfeasibleTargetError, NumericalError, ValidationError
from locsketch.core.matrix import gaussian_matrix, qr_thin
from locsketch.core.structure import PartitionedMatrix, RandomSource, equal_block_rows
from locsketch.harness.config import ConfigSynthetic
from locsketch.measures.complexity import statistical_dimension_of_spectrum
from locsketch.solvers.ridge import RidgeProblem

logger = logging.getLogger(__name__)

SPECTRUM_TOL = 1e-6

# keys of the random streams used by generate
_BASIS_STREAM = 0
_RIGHT_BASIS_STREAM = 1
_SOLUTION_STREAM = 2
_NOISE_STREAM = 3


class SyntheticSpec(BaseModel):
    n_total: int = Field(ge=1)
    blocks: int = Field(ge=1)
    cols: int = Field(ge=1)
    spectrum: list[float] | None = None
    target_sd: float | None = None
    lam: float = Field(default=0.15, ge=0.0)
    rank: int | None = None
    coherence_mode: Literal["incoherent", "planted"] = "incoherent"
    planted_block: int = 0
    planted_strength: float = Field(default=0.9, ge=0.0, le=1.0)
    noise_sigma: float = Field(default=1.0, ge=0.0)
    root_seed: int = DEFAULT_ROOT_SEED
    stream_id: int = 0

    @model_validator(mode="after")
    def check_spectrum(self) -> "SyntheticSpec":
        if self.spectrum is not None:
            s = self.spectrum
            if not s or min(s) <= 0 or any(a < b for a, b in zip(s, s[1:])):
                raise ValueError("An explicit spectrum must be positive and descending")
        elif self.target_sd is None or self.rank is None:
            raise ValueError("Give either a spectrum or target_sd together with rank")
        if not 0 <= self.planted_block < self.blocks:
            raise ValueError(f"planted_block must be in [0, {self.blocks})")
        return self

    @classmethod
    def from_config(
        cls, config: ConfigSynthetic | None = None, seed: RandomSource | None = None
    ) -> SyntheticSpec:
        config = config or ConfigSynthetic()
        seed = seed or RandomSource(DEFAULT_ROOT_SEED)
        return cls(
            **config.model_dump(), root_seed=seed.root_seed, stream_id=seed.stream_id
        )

    @classmethod
    def reference(
        cls, seed: RandomSource | None = None, **overrides: Any
    ) -> SyntheticSpec:
        """The 2000 x 50 problem in 10 blocks with sd_lambda 8.5 at lam = 0.15."""
        config = ConfigSynthetic(
            n_total=2000,
            blocks=10,
            cols=50,
            target_sd=8.5,
            lam=0.15,
            rank=50,
            coherence_mode="incoherent",
        )
        spec = cls.from_config(config, seed)
        return cls(**{**spec.model_dump(), **overrides})

    @property
    def seed(self) -> RandomSource:
        return RandomSource(self.root_seed, self.stream_id)


@dataclass(frozen=True)
class SyntheticData:
    A: PartitionedMatrix
    b: np.ndarray
    x_true: np.ndarray
    spectrum: np.ndarray
    lam: float

    def problem(self, lam: float | None = None) -> RidgeProblem:
        return RidgeProblem(self.A, self.b, self.lam if lam is None else lam)


def design_spectrum(target_sd: float, lam: float, rank: int) -> list[float]:
    """
    Geometric spectrum sigma_i = rho ** (i - 1), i = 1..rank, whose statistical
    dimension at lam equals target_sd. rho in (0, 1] is found by bisection; the
    reachable targets are (1 / (1 + lam), rank / (1 + lam)].
    """
    if rank < 1:
        raise ValidationError("rank must be at least 1")
    if lam == 0:
        if abs(target_sd - rank) > SPECTRUM_TOL:
            raise InfeasibleTargetError(target_sd, rank, rank)
        return [1.0] * rank

    low, high = 1.0 / (1.0 + lam), rank / (1.0 + lam)
    if not low < target_sd <= high + SPECTRUM_TOL:
        logger.error("Statistical dimension %s cannot be reached", target_sd)
        raise InfeasibleTargetError(target_sd, low, high)

    exponents = np.arange(rank)

    def excess(rho: float) -> float:
        return statistical_dimension_of_spectrum(rho**exponents, lam) - target_sd

    if abs(excess(1.0)) <= SPECTRUM_TOL:
        return [1.0] * rank
    rho = scipy.optimize.bisect(excess, 1e-12, 1.0, xtol=1e-15, maxiter=200)
    spectrum = rho**exponents
    if abs(excess(rho)) > SPECTRUM_TOL:
        raise NumericalError(
            f"Bisection stopped at rho = {rho} with error {excess(rho):.3e}"
        )
    return spectrum.tolist()


def _planted_basis(
    block_rows: list[int], block: int, rank: int, strength: float, random: np.ndarray
) -> np.ndarray:
    if block_rows[block] < rank:
        raise ValidationError(
            f"Planted block {block} has {block_rows[block]} rows, fewer than the "
            f"rank {rank}"
        )
    canonical = np.zeros((sum(block_rows), rank))
    start = sum(block_rows[:block])
    canonical[start + np.arange(rank), np.arange(rank)] = 1.0
    return strength * canonical + (1.0 - strength) * qr_thin(random)[0]


def generate(spec: SyntheticSpec) -> SyntheticData:
    """Draw (A, b, x_true) for the given spec; a pure function of the spec."""
    if spec.spectrum is not None:
        spectrum = np.asarray(spec.spectrum, dtype=np.float64)
    else:
        spectrum = np.asarray(design_spectrum(spec.target_sd, spec.lam, spec.rank))
    rank = spectrum.size
    if rank > min(spec.n_total, spec.cols):
        raise ValidationError(
            f"rank {rank} exceeds min(n_total, cols) = {min(spec.n_total, spec.cols)}"
        )
    block_rows = equal_block_rows(spec.n_total, spec.blocks)
    src = spec.seed

    random = gaussian_matrix(spec.n_total, rank, 1.0, src.derive(_BASIS_STREAM))
    if spec.coherence_mode == "planted":
        basis = _planted_basis(
            block_rows, spec.planted_block, rank, spec.planted_strength, random
        )
    else:
        basis = random
    U = qr_thin(basis)[0]
    right = gaussian_matrix(spec.cols, rank, 1.0, src.derive(_RIGHT_BASIS_STREAM))
    V = qr_thin(right)[0]
    A = (U * spectrum) @ V.T

    x_true = src.derive(_SOLUTION_STREAM).generator().standard_normal(spec.cols)
    noise = src.derive(_NOISE_STREAM).generator().standard_normal(spec.n_total)
    b = A @ x_true + spec.noise_sigma * noise
    logger.info(
        "Generated %s problem: %d x %d in %d blocks, rank %d",
        spec.coherence_mode,
        spec.n_total,
        spec.cols,
        spec.blocks,
        rank,
    )
    return SyntheticData(
        A=PartitionedMatrix.from_dense(A, block_rows),
        b=b,
        x_true=x_true,
        spectrum=spectrum,
        lam=spec.lam,
    )
