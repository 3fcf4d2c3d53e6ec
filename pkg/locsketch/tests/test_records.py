import datetime
import json
from pathlib import Path

import pandas as pd
import pytest
from freezegun import freeze_time

from locsketch.core.exc import ValidationError
from locsketch.harness.records import ExperimentRecord, records_frame, write_records


def _records() -> list[ExperimentRecord]:
    return [
        ExperimentRecord(
            experiment="ratio_sweep",
            params={"m_total": m, "strategy": "dense"},
            metrics={"ratio": 1.0 + 1.0 / m},
            wall_time_ns=10,
        )
        for m in (100, 200)
    ]


@freeze_time("2024-03-01 12:00:00")
def test_record_timestamp_is_utc() -> None:
    record = _records()[0]
    assert record.created_at == datetime.datetime(
        2024, 3, 1, 12, tzinfo=datetime.timezone.utc
    )
    assert record.schema_version == 1


@freeze_time("2024-03-01 12:00:00")
def test_write_json_lines(tmp_path: Path) -> None:
    path = tmp_path / "out.jsonl"
    write_records(_records(), path)
    write_records(_records()[:1], path)
    lines = path.read_text().splitlines()
    assert len(lines) == 3
    first = json.loads(lines[0])
    assert first["params"]["m_total"] == 100
    assert first["metrics"]["ratio"] == pytest.approx(1.01)
    assert first["created_at"].startswith("2024-03-01T12:00:00")


def test_write_csv(tmp_path: Path) -> None:
    path = tmp_path / "out.csv"
    write_records(_records(), path, fmt="csv")
    write_records(_records(), path, fmt="csv")
    frame = pd.read_csv(path)
    assert len(frame) == 4
    assert "params.m_total" in frame.columns
    assert "metrics.ratio" in frame.columns


def test_records_frame_and_bad_format(tmp_path: Path) -> None:
    assert records_frame(_records())["params.m_total"].tolist() == [100, 200]
    with pytest.raises(ValidationError):
        write_records(_records(), tmp_path / "out.txt", fmt="xml")
