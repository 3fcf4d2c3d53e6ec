#!/usr/bin/env python
"""
Command line entry point: `locsketch <command> [options]`.

Exit codes are 0 on success, 2 for invalid input and 3 for numerical failures.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Sequence

import coloredlogs
import numpy as np
import pandas as pd

from locsketch.core.constants import DEFAULT_ROOT_SEED, LOG_LEVEL
from locsketch.core.exc import NumericalError, ValidationError
from locsketch.core.fmx import read_matrix, write_fmx, write_matrix
from locsketch.core.structure import PartitionedMatrix, RandomSource
from locsketch.estimator.config import EstimatorConfig
from locsketch.estimator.estimator import (
    estimate_block_coherence,
    exact_block_importance,
    importance_pairs,
)
from locsketch.harness.bench import FULL_SCALE_J, FULL_SCALE_N, bench_apply
from locsketch.harness.config import ConfigBench, ConfigExperiment, ConfigSynthetic
from locsketch.harness.dataset import load_dataset
from locsketch.harness.experiments import (
    Strategy,
    build_operator,
    objective_ratio,
    phase_transition,
    run_matmul_trials,
    summarize_sweep,
    sweep_m0,
    sweep_ratio,
)
from locsketch.harness.records import ExperimentRecord, write_records
from locsketch.harness.synthetic import SyntheticSpec, generate
from locsketch.measures.complexity import (
    allocate,
    allocate_to_total,
    allocation_record,
    block_coherence,
    orthobasis,
)
from locsketch.solvers.ridge import (
    RidgeProblem,
    prediction_error,
    ridge_exact,
    ridge_sketched,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3


def setup_logging(level: str = LOG_LEVEL) -> None:
    logging.basicConfig(stream=sys.stderr, level=level)
    field_styles = coloredlogs.DEFAULT_FIELD_STYLES
    # change the default levelname color from black to yellow
    field_styles["levelname"]["color"] = "yellow"
    coloredlogs.install(level=level, field_styles=field_styles, stream=sys.stderr)


def _seed(args: argparse.Namespace) -> RandomSource:
    return RandomSource(args.seed)


def _emit_text(args: argparse.Namespace, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_frame(args: argparse.Namespace, frame: pd.DataFrame) -> None:
    if args.format == "csv":
        _emit_text(args, frame.to_csv(index=True))
    else:
        _emit_text(args, frame.reset_index().to_json(orient="records", lines=True))


def _emit_records(args: argparse.Namespace, records: list[ExperimentRecord]) -> None:
    if args.out:
        write_records(records, args.out, args.format)
    else:
        for record in records:
            sys.stdout.write(record.model_dump_json() + "\n")


def _synthetic_spec(args: argparse.Namespace) -> SyntheticSpec:
    config = ConfigSynthetic(
        n_total=args.n_total,
        blocks=args.blocks,
        cols=args.cols,
        target_sd=args.target_sd,
        lam=args.lam,
        rank=args.rank,
        coherence_mode=args.coherence,
        planted_block=args.planted_block,
        planted_strength=args.planted_strength,
        noise_sigma=args.noise_sigma,
    )
    return SyntheticSpec.from_config(config, _seed(args))


def _partitioned(path: str, blocks: int) -> PartitionedMatrix:
    return PartitionedMatrix.from_equal_blocks(read_matrix(path), blocks)


def _problem(args: argparse.Namespace) -> RidgeProblem:
    """A ridge problem from --matrix/--rhs files, or a synthetic one."""
    if args.matrix:
        if not args.rhs:
            raise ValidationError("--matrix needs --rhs")
        A = _partitioned(args.matrix, args.blocks)
        b = read_matrix(args.rhs)
        return RidgeProblem(A, b.ravel(), args.lam)
    return generate(_synthetic_spec(args)).problem()


def cmd_gen(args: argparse.Namespace) -> None:
    spec = _synthetic_spec(args)
    data = generate(spec)
    prefix = args.prefix
    write_fmx(f"{prefix}_A.fmx", data.A.flatten())
    write_fmx(f"{prefix}_b.fmx", data.b[:, None])
    write_fmx(f"{prefix}_x.fmx", data.x_true[:, None])
    Path(f"{prefix}_spec.json").write_text(spec.model_dump_json(indent=2))
    logger.info("Wrote synthetic problem to %s_*.fmx", prefix)


def cmd_gamma(args: argparse.Namespace) -> None:
    profile = block_coherence(orthobasis(_partitioned(args.matrix, args.blocks)))
    if args.m_total is not None:
        allocation = allocate_to_total(args.m_total, profile)
    else:
        allocation = allocate(args.m0, profile)
    _emit_text(args, json.dumps(allocation_record(profile, allocation)) + "\n")


def cmd_estimate(args: argparse.Namespace) -> None:
    A = _partitioned(args.matrix, args.blocks)
    overrides = {"sketch_kind": args.sketch_kind}
    if args.rows_per_round is not None:
        overrides["rows_per_round"] = args.rows_per_round
    result = estimate_block_coherence(A, EstimatorConfig(**overrides), _seed(args))
    logger.info(
        "Estimate after %d rounds (converged: %s, rank %d)",
        result.rounds_used,
        result.converged,
        result.numerical_rank,
    )
    if args.compare:
        table = importance_pairs(exact_block_importance(A), result.gammas_hat)
    else:
        table = pd.DataFrame({"estimated": result.gammas_hat})
    _emit_text(args, table.to_csv(sep=" ", header=False, index=not args.compare))


def cmd_multiply(args: argparse.Namespace) -> None:
    W = _partitioned(args.w, args.blocks)
    Y = _partitioned(args.y, args.blocks)
    records = run_matmul_trials(
        W,
        Y,
        eps=args.eps,
        delta=args.delta,
        k=args.k,
        constants=args.constants,
        trials=args.trials,
        seed=_seed(args),
        workers=args.threads,
    )
    _emit_records(args, records)


def cmd_ridge(args: argparse.Namespace) -> None:
    problem = _problem(args)
    if args.m0_grid:
        table = sweep_m0(
            problem, args.m0_grid, args.eps, args.trials, _seed(args), args.threads
        )
        _emit_frame(args, table)
        return
    exact = ridge_exact(problem)
    profile = block_coherence(orthobasis(problem.A))
    S = build_operator(
        Strategy(args.strategy),
        args.m_total,
        problem.A.block_rows,
        profile,
        _seed(args),
    )
    sketched = ridge_sketched(S, problem, workers=args.threads)
    record = ExperimentRecord(
        experiment="ridge",
        params={
            "strategy": args.strategy,
            "m_total": S.total_rows,
            "lam": problem.lam,
            "blocks": problem.A.num_blocks,
        },
        metrics={
            "objective": sketched.objective,
            "optimal_objective": exact.objective,
            "ratio": objective_ratio(sketched.objective, exact.objective),
        },
    )
    _emit_records(args, [record])


def cmd_sweep(args: argparse.Namespace) -> None:
    problem = _problem(args)
    records = sweep_ratio(
        problem,
        args.m_grid,
        args.strategies,
        args.trials,
        _seed(args),
        workers=args.threads,
    )
    _emit_records(args, records)
    for row in summarize_sweep(records).itertuples():
        logger.info(
            "%s M=%d: mean ratio %.4f", row.strategy, row.m_total, row.mean
        )


def cmd_phase(args: argparse.Namespace) -> None:
    if args.dataset:
        data = load_dataset(
            args.dataset,
            label_column=args.label_column,
            standardize=args.standardize,
            subsample=args.subsample,
            seed=_seed(args).derive(0),
            test_rows=args.test_rows,
        )
        problem = data.ridge_problem(args.lam, args.blocks)
    else:
        problem = _problem(args)
    tables = []
    for strategy in args.strategies:
        table = phase_transition(
            problem,
            args.m_grid,
            args.eps_grid,
            args.trials,
            strategy,
            _seed(args),
            workers=args.threads,
        )
        table = table.assign(strategy=strategy).set_index("strategy", append=True)
        tables.append(table)
    _emit_frame(args, pd.concat(tables))


def cmd_bench(args: argparse.Namespace) -> None:
    n_list, j_list = args.n_list, args.j_list
    if args.full_scale:
        n_list, j_list = FULL_SCALE_N, FULL_SCALE_J
        logger.warning("Running the full-scale benchmark, N up to %d", max(n_list))
    table = bench_apply(
        n_list,
        j_list,
        args.m_list,
        args.cols,
        args.repeats,
        args.kinds,
        _seed(args),
        workers=args.threads,
    )
    _emit_frame(args, table)


def cmd_load(args: argparse.Namespace) -> None:
    data = load_dataset(
        args.path,
        label_column=args.label_column,
        standardize=args.standardize,
        subsample=args.subsample,
        seed=_seed(args),
        test_rows=args.test_rows,
    )
    prefix = args.prefix
    write_matrix(f"{prefix}_A.fmx", data.features)
    write_matrix(f"{prefix}_b.fmx", data.labels)
    if data.test_features.shape[0]:
        write_matrix(f"{prefix}_A_test.fmx", data.test_features)
        write_matrix(f"{prefix}_b_test.fmx", data.test_labels)
    if args.lam is not None:
        problem = data.ridge_problem(args.lam, args.blocks)
        solution = ridge_exact(problem)
        metrics = {"objective": solution.objective}
        if data.test_features.shape[0]:
            metrics["test_mse"] = prediction_error(
                solution.x, data.test_features, data.test_labels
            )
        _emit_records(
            args,
            [
                ExperimentRecord(
                    experiment="load",
                    params={"path": str(args.path), "lam": args.lam},
                    metrics=metrics,
                )
            ],
        )


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v]


def _add_synthetic_args(parser: argparse.ArgumentParser) -> None:
    defaults = ConfigSynthetic()
    parser.add_argument("--n-total", type=int, default=defaults.n_total)
    parser.add_argument("--blocks", type=int, default=defaults.blocks)
    parser.add_argument("--cols", type=int, default=defaults.cols)
    parser.add_argument("--target-sd", type=float, default=defaults.target_sd)
    parser.add_argument("--lam", type=float, default=defaults.lam)
    parser.add_argument("--rank", type=int, default=defaults.rank)
    parser.add_argument(
        "--coherence",
        choices=["incoherent", "planted"],
        default=defaults.coherence_mode,
    )
    parser.add_argument("--planted-block", type=int, default=defaults.planted_block)
    parser.add_argument(
        "--planted-strength", type=float, default=defaults.planted_strength
    )
    parser.add_argument("--noise-sigma", type=float, default=defaults.noise_sigma)


def _add_problem_args(parser: argparse.ArgumentParser) -> None:
    _add_synthetic_args(parser)
    parser.add_argument("--matrix", help="data matrix A (fmx or delimited text)")
    parser.add_argument("--rhs", help="right-hand side b (fmx or delimited text)")


def build_parser() -> argparse.ArgumentParser:
    experiment = ConfigExperiment()
    bench = ConfigBench()
    parser = argparse.ArgumentParser(
        prog="locsketch", description="Localized sketching experiments"
    )
    parser.add_argument("--seed", type=int, default=DEFAULT_ROOT_SEED)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--out", help="output file; stdout when omitted")
    parser.add_argument("--format", choices=["json", "csv"], default="json")
    parser.add_argument("--log-level", default=LOG_LEVEL)
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", help="generate a synthetic ridge problem")
    _add_synthetic_args(gen)
    gen.add_argument("--prefix", required=True)
    gen.set_defaults(handler=cmd_gen)

    gamma = commands.add_parser("gamma", help="block coherence and allocation")
    gamma.add_argument("--matrix", required=True)
    gamma.add_argument("--blocks", type=int, required=True)
    sizes = gamma.add_mutually_exclusive_group()
    sizes.add_argument("--m0", type=int, default=1)
    sizes.add_argument("--m-total", type=int)
    gamma.set_defaults(handler=cmd_gamma)

    estimate = commands.add_parser("estimate", help="estimate block importance")
    estimate.add_argument("--matrix", required=True)
    estimate.add_argument("--blocks", type=int, required=True)
    estimate.add_argument("--rows-per-round", type=int)
    estimate.add_argument(
        "--sketch-kind", choices=["gaussian", "fourier"], default="gaussian"
    )
    estimate.add_argument(
        "--compare", action="store_true", help="pair with exact importances"
    )
    estimate.set_defaults(handler=cmd_estimate)

    multiply = commands.add_parser("multiply", help="sketched matrix product trials")
    multiply.add_argument("--w", required=True)
    multiply.add_argument("--y", required=True)
    multiply.add_argument("--blocks", type=int, required=True)
    multiply.add_argument("--eps", type=float, default=0.5)
    multiply.add_argument("--delta", type=float, default=0.1)
    multiply.add_argument("--k", type=float, default=1.0)
    multiply.add_argument("--constants", type=_float_list, default=[0.25, 0.5, 1.0])
    multiply.add_argument("--trials", type=int, default=experiment.trials)
    multiply.set_defaults(handler=cmd_multiply)

    ridge = commands.add_parser("ridge", help="exact versus sketched ridge")
    _add_problem_args(ridge)
    ridge.add_argument(
        "--strategy", choices=[s.value for s in Strategy], default="nonuniform"
    )
    ridge.add_argument("--m-total", type=int, default=experiment.m_grid[0])
    ridge.add_argument("--m0-grid", type=_int_list)
    ridge.add_argument("--eps", type=float, default=0.5)
    ridge.add_argument("--trials", type=int, default=experiment.trials)
    ridge.set_defaults(handler=cmd_ridge)

    sweep = commands.add_parser("sweep", help="objective ratio sweep")
    _add_problem_args(sweep)
    sweep.add_argument("--m-grid", type=_int_list, default=experiment.m_grid)
    sweep.add_argument(
        "--strategies", type=lambda s: s.split(","), default=experiment.strategies
    )
    sweep.add_argument("--trials", type=int, default=experiment.trials)
    sweep.set_defaults(handler=cmd_sweep)

    phase = commands.add_parser("phase", help="success probability tables")
    _add_problem_args(phase)
    phase.add_argument("--dataset", help="delimited dataset with a label column")
    phase.add_argument("--label-column", type=int, default=0)
    phase.add_argument("--subsample", type=int)
    phase.add_argument(
        "--standardize", action=argparse.BooleanOptionalAction, default=True
    )
    phase.add_argument("--test-rows", type=int, default=0)
    phase.add_argument("--m-grid", type=_int_list, default=experiment.m_grid)
    phase.add_argument("--eps-grid", type=_float_list, default=experiment.eps_grid)
    phase.add_argument(
        "--strategies", type=lambda s: s.split(","), default=["dense", "uniform"]
    )
    phase.add_argument("--trials", type=int, default=experiment.trials)
    phase.set_defaults(handler=cmd_phase)

    bench_cmd = commands.add_parser("bench", help="time sketch applications")
    bench_cmd.add_argument("--n-list", type=_int_list, default=bench.n_list)
    bench_cmd.add_argument("--j-list", type=_int_list, default=bench.j_list)
    bench_cmd.add_argument("--m-list", type=_int_list, default=bench.m_list)
    bench_cmd.add_argument("--cols", type=int, default=bench.cols)
    bench_cmd.add_argument("--repeats", type=int, default=bench.repeats)
    bench_cmd.add_argument(
        "--kinds", type=lambda s: s.split(","), default=bench.kinds
    )
    bench_cmd.add_argument("--full-scale", action="store_true")
    bench_cmd.set_defaults(handler=cmd_bench)

    load = commands.add_parser("load", help="load and preprocess a dataset")
    load.add_argument("path")
    load.add_argument("--prefix", required=True)
    load.add_argument("--label-column", type=int, default=0)
    load.add_argument("--standardize", action="store_true")
    load.add_argument("--subsample", type=int)
    load.add_argument("--test-rows", type=int, default=0)
    load.add_argument("--blocks", type=int, default=1)
    load.add_argument("--lam", type=float, help="also solve the exact ridge problem")
    load.set_defaults(handler=cmd_load)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level.upper())
    handler: Callable[[argparse.Namespace], None] = args.handler
    try:
        handler(args)
    except (ValueError, FileNotFoundError) as e:
        logger.error("Invalid input: %s", e)
        return EXIT_INVALID
    except (NumericalError, np.linalg.LinAlgError) as e:
        logger.error("Numerical failure: %s", e)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
