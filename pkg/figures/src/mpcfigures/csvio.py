"""CSV loading with schema validation for the benchmark result files.

The figure scripts are display-only: they parse values (including the "inf"
divergence sentinel) and never recompute a metric.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path


class FigureDataError(ValueError):
    """Missing file, missing columns, or an empty data section."""


def load_rows(path, required_columns) -> list[dict]:
    path = Path(path)
    if not path.exists():
        raise FigureDataError(f"input file {path} does not exist")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise FigureDataError(f"no data: {path} has no header row")
        missing = [c for c in required_columns if c not in reader.fieldnames]
        if missing:
            raise FigureDataError(
                f"{path} is missing required columns {missing}; "
                f"found {reader.fieldnames}")
        rows = list(reader)
    if not rows:
        raise FigureDataError(f"no data: {path} has a header but no rows")
    return rows


def as_float(text: str) -> float:
    """Parse a CSV number; the sentinel strings map onto IEEE infinities."""
    if text == "inf":
        return math.inf
    if text == "-inf":
        return -math.inf
    return float(text)


def as_bool(text: str) -> bool:
    if text == "true":
        return True
    if text == "false":
        return False
    raise FigureDataError(f"expected true/false, got {text!r}")
