"""
Exact and sketched ridge regression, f(x) = ||A x - b||^2 + lam ||x||^2.

The objective of a sketched solution is always evaluated on the full data, which
is the quantity the (1 + eps) quality guarantee is about.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from locsketch.core.exc import DimensionMismatchError, ValidationError
from locsketch.core.matrix import qr_thin, singular_values, solve_spd
from locsketch.core.structure import PartitionedMatrix, as_dense, as_vector
from locsketch.sketch.operators import SketchDescriptor, SketchOperator, apply

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RidgeProblem:
    A: PartitionedMatrix
    b: np.ndarray
    lam: float

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise ValidationError(f"lambda must be positive, got {self.lam}")
        b = as_vector(self.b, "b")
        if b.shape[0] != self.A.total_rows:
            raise DimensionMismatchError(
                "b does not match the rows of A", (self.A.total_rows,), b.shape
            )
        object.__setattr__(self, "b", b)

    @property
    def b_partitioned(self) -> PartitionedMatrix:
        return PartitionedMatrix.from_dense(self.b, self.A.block_rows)

    @property
    def cols(self) -> int:
        return self.A.cols


@dataclass(frozen=True)
class RidgeSolution:
    x: np.ndarray
    objective: float
    is_sketched: bool
    sketch_descriptor: SketchDescriptor | None = None


def ridge_objective(p: RidgeProblem, x: np.ndarray) -> float:
    residual = p.A.flatten() @ x - p.b
    return float(residual @ residual + p.lam * (x @ x))


def _solve_normal_equations(
    A: np.ndarray, b: np.ndarray, lam: float
) -> np.ndarray:
    gram = A.T @ A
    gram = 0.5 * (gram + gram.T) + lam * np.eye(A.shape[1])
    return solve_spd(gram, A.T @ b)


def ridge_exact(p: RidgeProblem) -> RidgeSolution:
    """x* = (A^T A + lam I)^-1 A^T b."""
    x = _solve_normal_equations(p.A.flatten(), p.b, p.lam)
    return RidgeSolution(x=x, objective=ridge_objective(p, x), is_sketched=False)


def ridge_sketched(
    S: SketchOperator, p: RidgeProblem, workers: int = 1
) -> RidgeSolution:
    """Minimise ||S A x - S b||^2 + lam ||x||^2; the objective reported is f(x)."""
    SA = apply(S, p.A, workers=workers)
    Sb = apply(S, p.b_partitioned, workers=workers)[:, 0]
    x = _solve_normal_equations(SA, Sb, p.lam)
    return RidgeSolution(
        x=x,
        objective=ridge_objective(p, x),
        is_sketched=True,
        sketch_descriptor=S.descriptor(),
    )


def prediction_error(x: np.ndarray, A_test: np.ndarray, b_test: np.ndarray) -> float:
    """Mean squared prediction error on held-out rows."""
    A_test = as_dense(A_test, "test features")
    b_test = as_vector(b_test, "test labels")
    residual = A_test @ as_vector(x, "x") - b_test
    return float(np.mean(residual**2))


class StructuralBasis(NamedTuple):
    """Quantities of a ridge problem that do not depend on the sketch."""

    U1: PartitionedMatrix
    residual: PartitionedMatrix
    optimum: RidgeSolution


class StructuralConditions(NamedTuple):
    subspace_gap: float
    residual_gap: float
    residual_scale: float

    def holds(self, eps: float) -> bool:
        return bool(
            self.subspace_gap <= 0.25
            and self.residual_gap <= np.sqrt(eps) * self.residual_scale
        )


def structural_basis(p: RidgeProblem) -> StructuralBasis:
    """
    U1 is the first N rows of an orthobasis of [A; sqrt(lam) I], partitioned like A,
    and the residual is b - A x*.
    """
    flat = p.A.flatten()
    stacked = np.vstack([flat, np.sqrt(p.lam) * np.eye(p.cols)])
    Q = qr_thin(stacked)[0]
    U1 = PartitionedMatrix.from_dense(Q[: p.A.total_rows], p.A.block_rows)
    optimum = ridge_exact(p)
    residual = PartitionedMatrix.from_dense(p.b - flat @ optimum.x, p.A.block_rows)
    return StructuralBasis(U1=U1, residual=residual, optimum=optimum)


def structural_conditions(
    S: SketchOperator,
    p: RidgeProblem,
    basis: StructuralBasis | None = None,
    workers: int = 1,
) -> StructuralConditions:
    """
    Sketch-dependent sides of the two conditions under which a sketched ridge
    solution is (1 + eps)-optimal:

        subspace_gap = ||U1^T S^T S U1 - U1^T U1||_2          (must be <= 1/4)
        residual_gap = ||U1^T S^T S r* - U1^T r*||_2          (<= sqrt(eps f(x*)/2))
        residual_scale = sqrt(f(x*) / 2)
    """
    basis = basis or structural_basis(p)
    U1 = basis.U1.flatten()
    r = basis.residual.flatten()[:, 0]
    SU1 = apply(S, basis.U1, workers=workers)
    Sr = apply(S, basis.residual, workers=workers)[:, 0]
    subspace = SU1.T @ SU1 - U1.T @ U1
    residual = SU1.T @ Sr - U1.T @ r
    return StructuralConditions(
        subspace_gap=float(singular_values(subspace)[0]),
        residual_gap=float(np.linalg.norm(residual)),
        residual_scale=float(np.sqrt(basis.optimum.objective / 2.0)),
    )
