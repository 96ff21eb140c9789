"""
Result tables

Column-ordered rows written as CSV (header row, LF endings, UTF-8) or JSON.
Floats are written with repr() so every value reads back bit-identical.
JSON output is strict: non-finite floats become null.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence

import numpy as np

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")


@dataclass
class ResultTable:
    columns: Sequence[str]
    rows: List[Dict[str, Any]] = field(default_factory=list)
    name: str = "results"

    def add_row(self, **values):
        unknown = set(values) - set(self.columns)
        if unknown:
            raise ValueError(f"columns not in table {self.name!r}: {sorted(unknown)}")
        self.rows.append({column: _plain(values.get(column)) for column in self.columns})

    def column(self, name) -> list:
        return [row[name] for row in self.rows]

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_cell(row[column]) for column in self.columns])
        return buffer.getvalue()

    def to_json(self) -> str:
        payload = {"name": self.name, "columns": list(self.columns), "rows": self.rows}
        return json.dumps(json_ready(payload), indent=2, allow_nan=False)

    def render(self, fmt="csv") -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")

    def write(self, path, fmt="csv"):
        text = self.render(fmt)
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        logger.info("Wrote %d rows of %s to %s", len(self.rows), self.name, path)

    @classmethod
    def from_csv(cls, text, name="results") -> ResultTable:
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        table = cls(columns=header, name=name)
        for record in reader:
            table.rows.append({column: _parse(cell) for column, cell in zip(header, record)})
        return table


def json_ready(value):
    """Copy of a nested payload with non-finite floats replaced by None."""
    if isinstance(value, dict):
        return {key: json_ready(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_ready(item) for item in value]
    value = _plain(value)
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))
    return value


def _plain(value):
    # numpy scalars become builtins so both writers see plain Python values
    if isinstance(value, np.generic):
        return value.item()
    return value


def _parse(cell):
    if cell == "":
        return None
    if cell in ("true", "false"):
        return cell == "true"
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        return float(cell)
    except ValueError:
        return cell
