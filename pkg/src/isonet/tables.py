"""Self-describing numeric tables: CSV with a JSON metadata line, or JSON."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Sequence


def scenario_digest(scenario_dict: dict) -> str:
    """SHA-256 of the canonical JSON form (sorted keys, no whitespace)."""
    blob = json.dumps(scenario_dict, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _fmt(x) -> str:
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    return "%.17g" % x


def _json_num(x):
    if isinstance(x, (bool, int)):
        return x
    x = float(x)
    return x if math.isfinite(x) else None


@dataclass
class CurveTable:
    metadata: dict
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)

    def __post_init__(self):
        self.columns = tuple(self.columns)
        for row in self.rows:
            self._check(row)

    def _check(self, row):
        if len(row) != len(self.columns):
            raise ValueError(f"row has {len(row)} values, table has {len(self.columns)} columns")

    def append(self, row: Sequence) -> None:
        row = tuple(row)
        self._check(row)
        self.rows.append(row)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    def to_csv(self) -> str:
        lines = ["# " + json.dumps(self.metadata, sort_keys=True), ",".join(self.columns)]
        lines += [",".join(_fmt(v) for v in row) for row in self.rows]
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {"metadata": self.metadata, "columns": list(self.columns),
               "rows": [[_json_num(v) for v in row] for row in self.rows]}
        return json.dumps(doc, sort_keys=True, indent=1) + "\n"

    def render(self, fmt: str = "csv") -> str:
        return self.to_json() if fmt == "json" else self.to_csv()

    @classmethod
    def from_csv(cls, text: str) -> "CurveTable":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("# "):
            raise ValueError("missing metadata line")
        meta = json.loads(lines[0][2:])
        cols = tuple(lines[1].split(",")) if len(lines) > 1 else ()
        rows = [tuple(float(v) for v in ln.split(",")) for ln in lines[2:] if ln]
        return cls(meta, cols, rows)
