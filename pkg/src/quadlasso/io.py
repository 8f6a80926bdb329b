"""CSV and JSON serialization for problems, fixtures and reports.

Matrices are written one row per line without a header; vectors one value per
line. Reals use 17 significant digits so doubles round-trip exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np


class CsvFormatError(ValueError):
    def __init__(self, path, row, col, message):
        self.path, self.row, self.col = path, row, col
        super().__init__(f"{path}: row {row}, column {col}: {message}")


def fmt(value):
    return format(float(value), ".17g")


def _parse_rows(path):
    text = Path(path).read_text()
    rows = []
    for i, record in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not record or all(not cell.strip() for cell in record):
            continue
        parsed = []
        for j, cell in enumerate(record, start=1):
            try:
                v = float(cell)
            except ValueError:
                raise CsvFormatError(path, i, j, f"not a number: {cell.strip()!r}") from None
            if not math.isfinite(v):
                raise CsvFormatError(path, i, j, "non-finite value")
            parsed.append(v)
        rows.append((i, parsed))
    return rows


def read_matrix(path):
    rows = _parse_rows(path)
    if not rows:
        raise CsvFormatError(path, 1, 1, "file is empty")
    width = len(rows[0][1])
    for line, values in rows:
        if len(values) != width:
            raise CsvFormatError(path, line, len(values), f"expected {width} columns, found {len(values)}")
    return np.array([values for _, values in rows])


def read_vector(path):
    rows = _parse_rows(path)
    if not rows:
        raise CsvFormatError(path, 1, 1, "file is empty")
    for line, values in rows:
        if len(values) != 1:
            raise CsvFormatError(path, line, 2, "expected one value per line")
    return np.array([values[0] for _, values in rows])


def matrix_csv(m):
    return "".join(",".join(fmt(v) for v in row) + "\n" for row in np.atleast_2d(m))


def vector_csv(v):
    return "".join(fmt(x) + "\n" for x in np.ravel(v))


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(to_jsonable(v) for v in obj)
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def dumps_json(obj):
    return json.dumps(to_jsonable(obj), indent=2) + "\n"
