"""
Exceptions raised across the package.

Validation problems (bad shapes, parameters or input files) derive from
ValidationError; failures of a numerical procedure derive from NumericalError.
The CLI maps the two families to different exit codes.
"""
from typing import Sequence


class LocSketchError(Exception):
    pass


class ValidationError(LocSketchError, ValueError):
    pass


class NumericalError(LocSketchError, ArithmeticError):
    pass


class DimensionMismatchError(ValidationError):
    """Raised when two operands do not conform. Both shapes are kept."""

    def __init__(
        self, message: str, left_shape: tuple[int, ...], right_shape: tuple[int, ...]
    ) -> None:
        super().__init__(f"{message}: {left_shape} vs {right_shape}")
        self.left_shape = left_shape
        self.right_shape = right_shape


class PartitionMismatchError(ValidationError):
    """Raised when two row partitions differ. Both partition vectors are kept."""

    def __init__(
        self, message: str, left: Sequence[int], right: Sequence[int]
    ) -> None:
        super().__init__(f"{message}: {list(left)} vs {list(right)}")
        self.left = list(left)
        self.right = list(right)


class NonFiniteError(ValidationError):
    pass


class NotOrthonormalError(ValidationError):
    def __init__(self, deviation: float, tol: float) -> None:
        super().__init__(
            f"Columns are not orthonormal: max |U^T U - I| = {deviation:.3e} "
            f"exceeds {tol:.1e}"
        )
        self.deviation = deviation


class InfeasibleTargetError(ValidationError):
    def __init__(self, target: float, low: float, high: float) -> None:
        super().__init__(
            f"Target {target} is infeasible; it must lie in ({low:.6g}, {high:.6g}]"
        )
        self.target = target
        self.interval = (low, high)


class DatasetFormatError(ValidationError):
    def __init__(self, message: str, line: int | None = None) -> None:
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NotPositiveDefiniteError(NumericalError):
    def __init__(self, pivot: int) -> None:
        super().__init__(f"Matrix is not positive definite (pivot index {pivot})")
        self.pivot = pivot


class ConvergenceError(NumericalError):
    def __init__(self, iterations: int, gap: float) -> None:
        super().__init__(
            f"Power iteration did not converge after {iterations} iterations "
            f"(last relative gap {gap:.3e})"
        )
        self.iterations = iterations
        self.gap = gap


class ZeroMatrixError(NumericalError):
    pass
