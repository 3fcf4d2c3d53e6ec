"""
Wall-clock cost of applying sketch operators to a partitioned Gaussian matrix.

Operator construction is not timed and no operator is materialized. Each
configuration gets one warm-up application before the timed repeats.
"""
from __future__ import annotations

import logging
import time
from typing import Sequence

import numpy as np
import pandas as pd
from threadpoolctl import threadpool_limits

from locsketch.core.exc import ValidationError
from locsketch.core.matrix import gaussian_matrix
from locsketch.core.structure import PartitionedMatrix, RandomSource
from locsketch.measures.complexity import uniform_allocation
from locsketch.sketch.operators import (
    SketchKind,
    SketchOperator,
    build_block_diagonal,
    build_dense_gaussian,
    build_subsampled_fourier,
    is_power_of_two,
)

logger = logging.getLogger(__name__)

FULL_SCALE_N = [2**18, 2**20, 2**22]
FULL_SCALE_J = [2**10, 2**12, 2**14]


def _build(
    kind: SketchKind, m_total: int, X: PartitionedMatrix, seed: RandomSource
) -> SketchOperator | None:
    n_total = X.total_rows
    if kind == SketchKind.BLOCK_DIAGONAL_GAUSSIAN:
        allocation = uniform_allocation(m_total, X.num_blocks)
        return build_block_diagonal(allocation, X.block_rows, seed)
    if kind == SketchKind.DENSE_GAUSSIAN:
        return build_dense_gaussian(m_total, n_total, seed)
    if kind == SketchKind.SUBSAMPLED_FOURIER:
        if not is_power_of_two(n_total) or m_total > n_total:
            logger.warning("Skipping subsampled_fourier for n = %d", n_total)
            return None
        return build_subsampled_fourier(m_total, n_total, seed)
    raise ValidationError(f"Cannot benchmark sketch kind {kind}")


def time_apply(
    S: SketchOperator, X: PartitionedMatrix, repeats: int, workers: int = 1
) -> list[int]:
    """
    Nanoseconds per application, after one untimed warm-up.

    BLAS is limited to `workers` threads for the warm-up and the timed repeats.
    """
    timings = []
    with threadpool_limits(limits=workers, user_api="blas"):
        S.apply(X, workers=workers)
        for _ in range(repeats):
            start = time.perf_counter_ns()
            S.apply(X, workers=workers)
            timings.append(time.perf_counter_ns() - start)
    return timings


def bench_apply(
    n_list: Sequence[int],
    j_list: Sequence[int],
    m_list: Sequence[int],
    cols: int,
    repeats: int,
    kinds: Sequence[SketchKind | str],
    seed: RandomSource,
    workers: int = 1,
) -> pd.DataFrame:
    """
    Median apply time per (kind, N, J, M) with n_list and j_list taken in pairs.

    Returns:
        DataFrame with columns kind, n_total, blocks, m_total, cols, workers,
        blas_threads, repeats, median_s and min_s.
    """
    if len(n_list) != len(j_list):
        raise ValidationError("n_list and j_list must have the same length")
    kinds = [SketchKind(k) for k in kinds]
    rows = []
    for index, (n_total, num_blocks) in enumerate(zip(n_list, j_list)):
        data = gaussian_matrix(n_total, cols, 1.0, seed.derive(0, index))
        X = PartitionedMatrix.from_equal_blocks(data, num_blocks)
        for m_total in m_list:
            for kind in kinds:
                S = _build(kind, m_total, X, seed.derive(1, index, m_total))
                if S is None:
                    continue
                timings = np.asarray(time_apply(S, X, repeats, workers)) / 1e9
                logger.info(
                    "%s N=%d J=%d M=%d: median %.4fs",
                    kind.value,
                    n_total,
                    num_blocks,
                    m_total,
                    np.median(timings),
                )
                rows.append(
                    {
                        "kind": kind.value,
                        "n_total": n_total,
                        "blocks": num_blocks,
                        "m_total": m_total,
                        "cols": cols,
                        "workers": workers,
                        "blas_threads": workers,
                        "repeats": repeats,
                        "median_s": float(np.median(timings)),
                        "min_s": float(timings.min()),
                    }
                )
    return pd.DataFrame(rows)
