import os
from typing import Literal

from pydantic import BaseModel, Field

from locsketch.core.config import read_config

_config_file_path = os.path.join(
    os.path.dirname(os.path.realpath(__file__)), "config_harness.ini"
)
_synthetic_defaults = read_config(_config_file_path, "synthetic")
_experiment_defaults = read_config(_config_file_path, "experiment")
_bench_defaults = read_config(_config_file_path, "bench")


class ConfigSynthetic(BaseModel):
    n_total: int = Field(default=_synthetic_defaults["n_total"], validate_default=True)
    blocks: int = Field(default=_synthetic_defaults["blocks"], validate_default=True)
    cols: int = Field(default=_synthetic_defaults["cols"], validate_default=True)
    target_sd: float = Field(
        default=_synthetic_defaults["target_sd"], validate_default=True
    )
    lam: float = Field(default=_synthetic_defaults["lam"], validate_default=True)
    rank: int = Field(default=_synthetic_defaults["rank"], validate_default=True)
    coherence_mode: Literal["incoherent", "planted"] = Field(
        default=_synthetic_defaults["coherence_mode"], validate_default=True
    )
    planted_block: int = Field(
        default=_synthetic_defaults["planted_block"], validate_default=True
    )
    planted_strength: float = Field(
        default=_synthetic_defaults["planted_strength"],
        validate_default=True,
        ge=0.0,
        le=1.0,
    )
    noise_sigma: float = Field(
        default=_synthetic_defaults["noise_sigma"], validate_default=True, ge=0.0
    )


class ConfigExperiment(BaseModel):
    m_grid: list[int] = Field(
        default=_experiment_defaults["m_grid"], validate_default=True
    )
    eps_grid: list[float] = Field(
        default=_experiment_defaults["eps_grid"], validate_default=True
    )
    strategies: list[str] = Field(
        default=_experiment_defaults["strategies"], validate_default=True
    )
    trials: int = Field(
        default=_experiment_defaults["trials"], validate_default=True, ge=1
    )


class ConfigBench(BaseModel):
    n_list: list[int] = Field(default=_bench_defaults["n_list"], validate_default=True)
    j_list: list[int] = Field(default=_bench_defaults["j_list"], validate_default=True)
    m_list: list[int] = Field(default=_bench_defaults["m_list"], validate_default=True)
    cols: int = Field(default=_bench_defaults["cols"], validate_default=True)
    repeats: int = Field(
        default=_bench_defaults["repeats"], validate_default=True, ge=1
    )
    kinds: list[str] = Field(default=_bench_defaults["kinds"], validate_default=True)
