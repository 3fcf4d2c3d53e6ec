"""
Reading and writing matrices.

The binary "fmx" layout is a 16-byte header (magic b"FMX1", u32 rows, u32 cols,
little-endian, then 4 reserved zero bytes) followed by rows * cols little-endian
float64 values in row-major order. Delimited text (comma or whitespace separated,
no header) is supported for interoperability.
"""
import logging
import struct
from pathlib import Path

import numpy as np
import pandas as pd

from locsketch.core.constants import FMX_MAGIC
from locsketch.core.exc import DatasetFormatError
from locsketch.core.structure import as_dense

logger = logging.getLogger(__name__)

_HEADER = struct.Struct("<4sIII")


def write_fmx(path: str | Path, matrix: np.ndarray) -> None:
    matrix = as_dense(matrix)
    rows, cols = matrix.shape
    with open(path, "wb") as f:
        f.write(_HEADER.pack(FMX_MAGIC, rows, cols, 0))
        f.write(matrix.astype("<f8", copy=False).tobytes(order="C"))
    logger.debug("Wrote %d x %d matrix to %s", rows, cols, path)


def read_fmx(path: str | Path) -> np.ndarray:
    with open(path, "rb") as f:
        header = f.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise DatasetFormatError(f"{path} is too short to hold an fmx header")
        magic, rows, cols, _ = _HEADER.unpack(header)
        if magic != FMX_MAGIC:
            raise DatasetFormatError(f"{path} is not an fmx file (magic {magic!r})")
        payload = f.read()
    expected = rows * cols * 8
    if len(payload) != expected:
        raise DatasetFormatError(
            f"{path} holds {len(payload)} data bytes, expected {expected} for "
            f"{rows} x {cols}"
        )
    data = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    return as_dense(data.reshape(rows, cols), name=str(path))


def _detect_separator(path: str | Path) -> str:
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if line.strip():
                return "," if "," in line else r"\s+"
    raise DatasetFormatError(f"{path} is empty")


def read_delimited_frame(path: str | Path) -> pd.DataFrame:
    """
    Parse a delimited numeric text file into a float DataFrame.

    Raises DatasetFormatError naming the 1-based line of the first ragged row or
    non-numeric cell.
    """
    sep = _detect_separator(path)
    try:
        raw = pd.read_csv(
            path,
            sep=sep,
            header=None,
            dtype=str,
            skip_blank_lines=True,
            engine="python",
        )
    except pd.errors.ParserError as e:
        logger.error("Could not parse %s: %s", path, e)
        raise DatasetFormatError(f"ragged row in {path}: {e}") from e

    # pandas drops blank lines; map frame rows back to file lines
    with open(path, "r", encoding="utf-8") as f:
        line_numbers = [i + 1 for i, line in enumerate(f) if line.strip()]

    missing = raw.isna().any(axis=1).to_numpy()
    if missing.any():
        row = int(np.argmax(missing))
        raise DatasetFormatError(
            f"expected {raw.shape[1]} fields", line=line_numbers[row]
        )

    numeric = raw.apply(lambda col: pd.to_numeric(col.str.strip(), errors="coerce"))
    bad = numeric.isna().to_numpy()
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise DatasetFormatError(
            f"non-numeric cell {raw.iat[row, col]!r} in column {col}",
            line=line_numbers[row],
        )
    return numeric.astype(np.float64)


def read_delimited(path: str | Path) -> np.ndarray:
    return as_dense(read_delimited_frame(path).to_numpy(), name=str(path))


def write_delimited(path: str | Path, matrix: np.ndarray, sep: str = ",") -> None:
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix[:, None]
    pd.DataFrame(matrix).to_csv(
        path, sep=sep, header=False, index=False, float_format="%.17g"
    )


def read_matrix(path: str | Path) -> np.ndarray:
    """Read an fmx file or, for any other suffix, delimited text."""
    if Path(path).suffix == ".fmx":
        return read_fmx(path)
    return read_delimited(path)


def write_matrix(path: str | Path, matrix: np.ndarray) -> None:
    if Path(path).suffix == ".fmx":
        matrix = np.asarray(matrix, dtype=np.float64)
        write_fmx(path, matrix[:, None] if matrix.ndim == 1 else matrix)
    else:
        write_delimited(path, matrix)
