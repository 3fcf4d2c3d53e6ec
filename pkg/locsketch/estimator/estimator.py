"""
Estimate the relative importance of the row blocks of a data matrix without forming
an exact orthobasis.

Each round draws a short independent sketch of every block, appends the stacked
results to the accumulated sketch, and refactors it with a thin QR. Once the
numerical rank of R has settled, the importance of block j is ||A_j R^+||_F^2, and
the normalised values are returned.
"""
import logging
from typing import Sequence

import numpy as np
import pandas as pd
import scipy.linalg
from pydantic import BaseModel

from locsketch.core.constants import DEFAULT_ROOT_SEED
from locsketch.core.exc import ValidationError, ZeroMatrixError
from locsketch.core.matrix import gaussian_matrix, qr_thin, singular_values
from locsketch.core.structure import PartitionedMatrix, RandomSource
from locsketch.estimator.config import EstimatorConfig
from locsketch.measures.complexity import orthobasis
from locsketch.sketch.operators import SubsampledFourierSketch

logger = logging.getLogger(__name__)


class EstimateResult(BaseModel):
    gammas_hat: list[float]
    rounds_used: int
    converged: bool
    numerical_rank: int
    sketch_rows: int


def _next_power_of_two(n: int) -> int:
    return 1 << (n - 1).bit_length()


def _sketch_block(
    block: np.ndarray, rows: int, cfg: EstimatorConfig, src: RandomSource
) -> np.ndarray:
    if cfg.sketch_kind == "gaussian":
        omega = gaussian_matrix(rows, block.shape[0], 1.0 / rows, src)
        return omega @ block
    padded_rows = _next_power_of_two(block.shape[0])
    padded = np.zeros((padded_rows, block.shape[1]))
    padded[: block.shape[0]] = block
    sketch = SubsampledFourierSketch(min(rows, padded_rows), padded_rows, src)
    return sketch.apply(padded)


def _numerical_rank(R: np.ndarray, rank_tol: float) -> int:
    s = singular_values(R)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > rank_tol * s[0]))


def _truncated_pinv(R: np.ndarray, rank: int) -> np.ndarray:
    U, s, Vt = np.linalg.svd(R)
    return Vt[:rank].T @ np.diag(1.0 / s[:rank]) @ U[:, :rank].T


def estimate_block_coherence(
    A: PartitionedMatrix,
    cfg: EstimatorConfig | None = None,
    seed: RandomSource | None = None,
    block_keys: Sequence[int] | None = None,
) -> EstimateResult:
    """
    Estimate normalised block importances of A by iterative sketch-and-QR.

    Parameters:
        A: the partitioned data matrix, total_rows >= cols.
        cfg: estimator settings; defaults come from config_estimator.ini.
        seed: root of the random streams. The sketch of block j in round r is drawn
            from seed.derive(r, block_keys[j]).
        block_keys: integers keying the per-block streams, 0..J-1 by default.

    Returns:
        EstimateResult with nonnegative estimates summing to one. If the rank did
        not settle within max_rounds, converged is False and the estimate from the
        last round is returned.
    """
    cfg = cfg or EstimatorConfig()
    seed = seed or RandomSource(DEFAULT_ROOT_SEED)
    if A.total_rows < A.cols:
        raise ValidationError(
            f"The estimator needs total_rows >= cols, got {A.total_rows} x {A.cols}"
        )
    if not any(np.any(block) for block in A.blocks):
        raise ZeroMatrixError("Block importances are undefined for an all-zero matrix")
    keys = list(range(A.num_blocks)) if block_keys is None else list(block_keys)
    if len(keys) != A.num_blocks:
        raise ValidationError(f"Expected {A.num_blocks} block keys, got {len(keys)}")

    d = A.cols
    rows = cfg.rows_for(d)
    sketches: list[np.ndarray] = []
    previous_rank = None
    unchanged = 0
    converged = False
    rounds_used = 0
    for round_index in range(cfg.max_rounds):
        rounds_used = round_index + 1
        sketches.extend(
            _sketch_block(block, rows, cfg, seed.derive(round_index, key))
            for block, key in zip(A.blocks, keys)
        )
        accumulated = np.vstack(sketches)
        height = accumulated.shape[0]
        if height < d:
            accumulated = np.vstack([accumulated, np.zeros((d - height, d))])
        R = qr_thin(accumulated)[1]
        rank = _numerical_rank(R, cfg.rank_tol)
        logger.debug("Round %d: sketch height %d, rank %d", rounds_used, height, rank)

        unchanged = unchanged + 1 if rank == previous_rank else 0
        previous_rank = rank
        if unchanged >= cfg.stable_rounds and height >= d:
            converged = True
            break

    if not converged:
        logger.warning(
            "Rank of the sketch did not settle within %d rounds; returning the "
            "last estimate",
            cfg.max_rounds,
        )

    if rank == d:
        gammas = [
            float(
                np.sum(
                    scipy.linalg.solve_triangular(R, block.T, trans="T", lower=False)
                    ** 2
                )
            )
            for block in A.blocks
        ]
    else:
        pinv = _truncated_pinv(R, rank)
        gammas = [float(np.sum((block @ pinv) ** 2)) for block in A.blocks]

    total = sum(gammas)
    return EstimateResult(
        gammas_hat=[g / total for g in gammas],
        rounds_used=rounds_used,
        converged=converged,
        numerical_rank=rank,
        sketch_rows=sum(s.shape[0] for s in sketches),
    )


def exact_block_importance(A: PartitionedMatrix) -> list[float]:
    """Normalised ||U_j||_F^2 for an exact orthobasis U of range(A)."""
    U = orthobasis(A)
    masses = [float(np.sum(block**2)) for block in U.blocks]
    total = sum(masses)
    if total == 0.0:
        raise ZeroMatrixError("Block importances are undefined for an all-zero matrix")
    return [m / total for m in masses]


def importance_pairs(
    exact: Sequence[float], estimate: Sequence[float]
) -> pd.DataFrame:
    """True-vs-estimated importances, one row per block, sorted by true value."""
    table = pd.DataFrame({"true": list(exact), "estimated": list(estimate)})
    return table.sort_values("true", kind="stable").reset_index(drop=True)
