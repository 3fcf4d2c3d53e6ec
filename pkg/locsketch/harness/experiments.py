"""
Monte Carlo experiments comparing sketching strategies on ridge regression and
matrix products.

Every trial draws its sketch from a stream derived from the experiment seed and
the trial's coordinates, so results do not depend on the number of workers.
"""
from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np
import pandas as pd

from locsketch.core.exc import ValidationError
from locsketch.core.structure import PartitionedMatrix, RandomSource
from locsketch.harness.records import ExperimentRecord, records_frame
from locsketch.measures.complexity import (
    CoherenceProfile,
    allocate,
    allocate_to_total,
    block_coherence,
    matmul_sample_size,
    orthobasis,
    stable_rank,
    uniform_allocation,
)
from locsketch.sketch.operators import (
    SketchOperator,
    build_block_diagonal,
    build_dense_gaussian,
    build_subsampled_fourier,
    is_power_of_two,
)
from locsketch.solvers.products import approx_matmul, embedding_deviation, matmul_error
from locsketch.solvers.ridge import (
    RidgeProblem,
    StructuralBasis,
    ridge_sketched,
    structural_basis,
    structural_conditions,
)

logger = logging.getLogger(__name__)


class Strategy(str, Enum):
    DENSE = "dense"
    UNIFORM = "uniform"
    NONUNIFORM = "nonuniform"
    FOURIER = "fourier"


OperatorFactory = Callable[
    [Strategy, int, Sequence[int], CoherenceProfile | None, RandomSource],
    SketchOperator,
]


def build_operator(
    strategy: Strategy,
    m_total: int,
    block_rows: Sequence[int],
    profile: CoherenceProfile | None,
    seed: RandomSource,
) -> SketchOperator:
    """A sketch with about m_total rows for data partitioned by block_rows."""
    n_total = sum(block_rows)
    if strategy == Strategy.DENSE:
        return build_dense_gaussian(m_total, n_total, seed)
    if strategy == Strategy.FOURIER:
        return build_subsampled_fourier(m_total, n_total, seed)
    if strategy == Strategy.UNIFORM:
        allocation = uniform_allocation(m_total, len(block_rows))
    elif strategy == Strategy.NONUNIFORM:
        if profile is None:
            raise ValidationError("The nonuniform strategy needs a coherence profile")
        allocation = allocate_to_total(m_total, profile)
    else:
        raise ValidationError(f"Unknown strategy {strategy}")
    return build_block_diagonal(allocation, block_rows, seed)


class _Trial(NamedTuple):
    m_total: int
    strategy: Strategy
    trial: int


def objective_ratio(sketched: float, optimal: float) -> float:
    """f(x_hat) / f(x*), taken as 1 when both vanish."""
    if optimal == 0.0:
        return 1.0 if sketched == 0.0 else float("inf")
    return sketched / optimal


def _check_grid(
    problem: RidgeProblem, m_grid: Iterable[int], strategies: Iterable[Strategy]
) -> None:
    num_blocks = problem.A.num_blocks
    for m_total in m_grid:
        if m_total < num_blocks:
            raise ValidationError(
                f"Sketch size {m_total} is smaller than the {num_blocks} blocks"
            )
    if Strategy.FOURIER in strategies and not is_power_of_two(problem.A.total_rows):
        raise ValidationError("The fourier strategy needs a power-of-two row count")


def sweep_ratio(
    problem: RidgeProblem,
    m_grid: Sequence[int],
    strategies: Sequence[Strategy | str],
    trials: int,
    seed: RandomSource,
    workers: int = 1,
    operator_factory: OperatorFactory | None = None,
    diagnostics: bool = True,
    basis: StructuralBasis | None = None,
) -> list[ExperimentRecord]:
    """
    Sketched-to-optimal objective ratio f(x_hat) / f(x*) over sketch sizes and
    strategies, one record per trial.

    With diagnostics on, each record also carries the structural condition values
    and the embedding deviation of the sketch on an orthobasis of A.
    """
    strategies = [Strategy(s) for s in strategies]
    _check_grid(problem, m_grid, strategies)
    factory = operator_factory or build_operator
    basis = basis or structural_basis(problem)
    optimal = basis.optimum.objective
    U = orthobasis(problem.A)
    profile = block_coherence(U) if Strategy.NONUNIFORM in strategies else None

    tasks = [
        _Trial(m_total, strategy, trial)
        for m_total in m_grid
        for strategy in strategies
        for trial in range(trials)
    ]

    def run(task: _Trial) -> ExperimentRecord:
        start = time.perf_counter_ns()
        strategy_key = list(Strategy).index(task.strategy)
        trial_seed = seed.derive(task.m_total, strategy_key, task.trial)
        S = factory(
            task.strategy, task.m_total, problem.A.block_rows, profile, trial_seed
        )
        solution = ridge_sketched(S, problem)
        metrics = {
            "objective": solution.objective,
            "optimal_objective": optimal,
            "ratio": objective_ratio(solution.objective, optimal),
        }
        if diagnostics:
            conditions = structural_conditions(S, problem, basis)
            metrics.update(conditions._asdict())
            metrics["delta_norm"] = embedding_deviation(S, U)
        return ExperimentRecord(
            experiment="ratio_sweep",
            params={
                "m_total": S.total_rows,
                "m_requested": task.m_total,
                "strategy": task.strategy.value,
                "trial": task.trial,
                "lam": problem.lam,
                "blocks": problem.A.num_blocks,
                "root_seed": seed.root_seed,
                "stream_id": trial_seed.stream_id,
            },
            metrics=metrics,
            wall_time_ns=time.perf_counter_ns() - start,
        )

    logger.info(
        "Running %d ratio trials on %d workers", len(tasks), max(1, workers)
    )
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        return list(pool.map(run, tasks))


def summarize_sweep(records: Iterable[ExperimentRecord]) -> pd.DataFrame:
    """Mean, standard deviation and median of the ratio per (strategy, m_total)."""
    frame = records_frame(records)
    grouped = frame.groupby(["params.strategy", "params.m_requested"])["metrics.ratio"]
    summary = grouped.agg(["mean", "std", "median", "count"]).reset_index()
    return summary.rename(
        columns={"params.strategy": "strategy", "params.m_requested": "m_total"}
    )


def phase_transition(
    problem: RidgeProblem,
    m_grid: Sequence[int],
    eps_grid: Sequence[float],
    trials: int,
    strategy: Strategy | str,
    seed: RandomSource,
    workers: int = 1,
) -> pd.DataFrame:
    """
    Empirical probability that f(x_hat) <= (1 + eps) f(x*), indexed by sketch size
    with one column per eps.
    """
    if any(eps < 0 for eps in eps_grid):
        raise ValidationError("eps values must be non-negative")
    records = sweep_ratio(
        problem, m_grid, [strategy], trials, seed, workers=workers, diagnostics=False
    )
    ratios = pd.DataFrame(
        {
            "m_total": [r.params["m_requested"] for r in records],
            "ratio": [r.metrics["ratio"] for r in records],
        }
    )
    table = pd.DataFrame(
        {
            eps: (ratios["ratio"] <= 1.0 + eps).groupby(ratios["m_total"]).mean()
            for eps in eps_grid
        }
    )
    table.index.name = "m_total"
    table.columns.name = "eps"
    return table


def sweep_m0(
    problem: RidgeProblem,
    m0_grid: Sequence[int],
    eps: float,
    trials: int,
    seed: RandomSource,
    workers: int = 1,
) -> pd.DataFrame:
    """
    Coherence-proportional sketches built from m0 directly rather than from a
    total. Per m0: the total rows, the fraction of trials whose solution is
    (1 + eps)-optimal, the fraction meeting both structural conditions, and the
    median subspace gap.
    """
    basis = structural_basis(problem)
    profile = block_coherence(orthobasis(problem.A))
    optimal = basis.optimum.objective

    def run(task: tuple[int, int]) -> dict:
        m0, trial = task
        allocation = allocate(m0, profile)
        S = build_block_diagonal(
            allocation, problem.A.block_rows, seed.derive(m0, trial)
        )
        ratio = objective_ratio(ridge_sketched(S, problem).objective, optimal)
        conditions = structural_conditions(S, problem, basis)
        return {
            "m0": m0,
            "m_total": allocation.total,
            "success": ratio <= 1.0 + eps,
            "conditions_hold": conditions.holds(eps),
            "subspace_gap": conditions.subspace_gap,
        }

    tasks = [(m0, trial) for m0 in m0_grid for trial in range(trials)]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        rows = pd.DataFrame(list(pool.map(run, tasks)))
    return rows.groupby("m0").agg(
        m_total=("m_total", "first"),
        success_rate=("success", "mean"),
        conditions_rate=("conditions_hold", "mean"),
        median_subspace_gap=("subspace_gap", "median"),
    )


def run_matmul_trials(
    W: PartitionedMatrix,
    Y: PartitionedMatrix,
    eps: float,
    delta: float,
    k: float,
    constants: Sequence[float],
    trials: int,
    seed: RandomSource,
    workers: int = 1,
) -> list[ExperimentRecord]:
    """
    Relative spectral error of (S W)^T (S Y) with coherence-proportional sketches,
    m0 = C k log(2 / delta) / eps^2 for each constant C.

    The coherence is that of an orthobasis of [W Y]. Each record also holds the
    bound eps (1 + sr(W) / k)^1/2 (1 + sr(Y) / k)^1/2 the error is compared with.
    """
    joined = PartitionedMatrix.from_dense(
        np.hstack([W.flatten(), Y.flatten()]), W.block_rows
    )
    profile = block_coherence(orthobasis(joined))
    W_dense, Y_dense = W.flatten(), Y.flatten()
    bound = float(
        eps
        * np.sqrt(1.0 + stable_rank(W_dense) / k)
        * np.sqrt(1.0 + stable_rank(Y_dense) / k)
    )
    tasks = [
        (index, constant, trial)
        for index, constant in enumerate(constants)
        for trial in range(trials)
    ]

    def run(task: tuple[int, float, int]) -> ExperimentRecord:
        index, constant, trial = task
        start = time.perf_counter_ns()
        m0 = matmul_sample_size(k, eps, delta, constant)
        allocation = allocate(m0, profile)
        S = build_block_diagonal(allocation, W.block_rows, seed.derive(index, trial))
        error = matmul_error(W, Y, approx_matmul(S, W, Y))
        return ExperimentRecord(
            experiment="matmul",
            params={
                "constant": constant,
                "m0": m0,
                "m_total": allocation.total,
                "eps": eps,
                "delta": delta,
                "k": k,
                "trial": trial,
            },
            metrics={"error": error, "bound": bound, "within": error <= bound},
            wall_time_ns=time.perf_counter_ns() - start,
        )

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        return list(pool.map(run, tasks))
