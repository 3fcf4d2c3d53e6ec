"""
Experiment records, written as JSON lines or CSV.
"""
from __future__ import annotations

import datetime
import logging
from pathlib import Path
from typing import Any, Iterable, Literal

import pandas as pd
from pydantic import BaseModel, Field

from locsketch.core.constants import RECORD_SCHEMA_VERSION
from locsketch.core.exc import ValidationError

logger = logging.getLogger(__name__)


def _utcnow() -> datetime.datetime:
    return datetime.datetime.now(datetime.timezone.utc)


class ExperimentRecord(BaseModel):
    schema_version: int = RECORD_SCHEMA_VERSION
    experiment: str
    params: dict[str, Any]
    metrics: dict[str, Any]
    wall_time_ns: int = Field(default=0, ge=0)
    created_at: datetime.datetime = Field(default_factory=_utcnow)


def records_frame(records: Iterable[ExperimentRecord]) -> pd.DataFrame:
    """One row per record, with params and metrics flattened into columns."""
    return pd.json_normalize([r.model_dump(mode="json") for r in records])


def write_records(
    records: Iterable[ExperimentRecord],
    path: str | Path,
    fmt: Literal["json", "csv"] = "json",
) -> None:
    """Append records to path, one JSON object per line or one CSV row each."""
    records = list(records)
    path = Path(path)
    if fmt == "json":
        with open(path, "a", encoding="utf-8") as f:
            for record in records:
                f.write(record.model_dump_json() + "\n")
    elif fmt == "csv":
        exists = path.exists() and path.stat().st_size > 0
        records_frame(records).to_csv(path, mode="a", header=not exists, index=False)
    else:
        raise ValidationError(f"Unknown record format {fmt}")
    logger.info("Wrote %d %s records to %s", len(records), fmt, path)
