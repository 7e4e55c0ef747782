"""Labeled numeric series with CSV/JSON emission for external tooling."""

from __future__ import annotations

import json
import math


def _quote_csv(field: str) -> str:
    if any(ch in field for ch in ',"\n'):
        return '"' + field.replace('"', '""') + '"'
    return field


class CurveTable:
    """Named real-valued columns of equal length plus string metadata.

    Serialization is deterministic: column order is insertion order and
    floats are written with repr, so identical tables produce byte-identical
    files.
    """

    def __init__(self, columns: dict | None = None, metadata: dict | None = None):
        self.columns: dict[str, list[float]] = {}
        self.metadata: dict[str, str] = {str(k): str(v) for k, v in (metadata or {}).items()}
        for name, values in (columns or {}).items():
            self.add_column(name, values)

    def add_column(self, name: str, values) -> None:
        values = [float(v) for v in values]
        if any(not math.isfinite(v) for v in values):
            raise ValueError(f"column '{name}' contains non-finite values")
        if self.columns:
            n = len(next(iter(self.columns.values())))
            if len(values) != n:
                raise ValueError(
                    f"column '{name}' has {len(values)} values, expected {n}"
                )
        self.columns[str(name)] = values

    @property
    def num_rows(self) -> int:
        if not self.columns:
            return 0
        return len(next(iter(self.columns.values())))

    def to_csv_string(self) -> str:
        names = list(self.columns)
        lines = [",".join(_quote_csv(n) for n in names)]
        for i in range(self.num_rows):
            lines.append(",".join(repr(self.columns[n][i]) for n in names))
        return "\n".join(lines) + "\n"

    def to_json_string(self) -> str:
        return json.dumps(
            {"metadata": self.metadata, "columns": self.columns}, indent=2
        ) + "\n"

    def write(self, path, fmt: str = "csv") -> None:
        if fmt not in ("csv", "json"):
            raise ValueError(f"unknown format '{fmt}'")
        text = self.to_csv_string() if fmt == "csv" else self.to_json_string()
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
