import os
from typing import Literal

from pydantic import BaseModel, Field, model_validator

from locsketch.core.config import read_config

_config_file_path = os.path.join(
    os.path.dirname(os.path.realpath(__file__)), "config_estimator.ini"
)
_defaults = read_config(_config_file_path, "estimator")


class EstimatorConfig(BaseModel):
    rows_per_round: int | None = Field(
        default=_defaults["rows_per_round"], validate_default=True, ge=1
    )
    rank_tol: float = Field(default=_defaults["rank_tol"], validate_default=True, gt=0)
    stable_rounds: int = Field(
        default=_defaults["stable_rounds"], validate_default=True, ge=1
    )
    max_rounds: int = Field(default=_defaults["max_rounds"], validate_default=True)
    sketch_kind: Literal["gaussian", "fourier"] = Field(
        default=_defaults["sketch_kind"], validate_default=True
    )

    @model_validator(mode="after")
    def check_rounds(self) -> "EstimatorConfig":
        if self.max_rounds < self.stable_rounds:
            raise ValueError("max_rounds must be at least stable_rounds")
        return self

    def rows_for(self, cols: int) -> int:
        if self.rows_per_round is not None:
            return self.rows_per_round
        return max(4, -(-cols // 8))
