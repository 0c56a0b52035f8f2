"""Per-publication indicator table with CSV / JSON-lines export."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError

INDICATOR_COLUMNS = (
    "citations_3y",
    "mncs",
    "incites",
    "hazen",
    "p100",
    "p100_prime",
    "sncs1",
    "sncs2",
    "sncs3",
)

PERCENTILE_COLUMNS = frozenset({"incites", "hazen", "p100", "p100_prime"})


@dataclass
class IndicatorTable:
    """One row per citable publication; fixed column order on export.

    ``columns`` maps indicator names to float arrays aligned with
    ``pub_ids``; z-mirror columns are stored under ``z_<name>``.
    """

    pub_ids: list[str]
    columns: dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.pub_ids)
        for name, col in self.columns.items():
            if len(col) != n:
                raise DataError(f"column {name!r} has {len(col)} rows, expected {n}")

    def indicator_names(self) -> list[str]:
        """Indicator columns present, in canonical order."""
        return [c for c in INDICATOR_COLUMNS if c in self.columns]

    def column_order(self) -> list[str]:
        names = self.indicator_names()
        return names + [f"z_{c}" for c in names if f"z_{c}" in self.columns]

    def add_z_columns(self) -> None:
        """Attach z-transformed mirrors of every indicator column.

        A constant column has no defined z-scores; it gets zeros and a note
        in the metadata instead of failing the whole table.
        """
        from .evaluation import z_transform

        degenerate = []
        for name in self.indicator_names():
            col = self.columns[name]
            try:
                self.columns[f"z_{name}"] = z_transform(col)
            except DataError:
                self.columns[f"z_{name}"] = np.zeros(len(col), dtype=np.float64)
                degenerate.append(name)
        if degenerate:
            self.metadata["constant_columns_zeroed_z"] = degenerate

    def values(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise DataError(f"indicator table has no column {name!r}") from None

    def row_lookup(self) -> dict[str, int]:
        return {pid: i for i, pid in enumerate(self.pub_ids)}

    # -- export ---------------------------------------------------------

    def to_csv(self, path) -> None:
        order = self.column_order()
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["pub_id"] + order)
            for i, pid in enumerate(self.pub_ids):
                row = [pid]
                for name in order:
                    v = self.columns[name][i]
                    if name == "citations_3y":
                        row.append(str(int(v)))
                    else:
                        row.append(f"{float(v):.6f}")
                writer.writerow(row)

    def to_jsonl(self, path) -> None:
        order = self.column_order()
        with open(path, "w", encoding="utf-8") as fh:
            for i, pid in enumerate(self.pub_ids):
                obj = {"pub_id": pid}
                for name in order:
                    v = self.columns[name][i]
                    obj[name] = int(v) if name == "citations_3y" else float(v)
                fh.write(json.dumps(obj) + "\n")

    @classmethod
    def read(cls, path) -> "IndicatorTable":
        """Read a table back from either export format."""
        path = Path(path)
        pub_ids: list[str] = []
        data: dict[str, list[float]] = {}
        if path.suffix.lower() == ".csv":
            with open(path, encoding="utf-8", newline="") as fh:
                reader = csv.reader(fh)
                header = next(reader, None)
                if not header or header[0] != "pub_id":
                    raise DataError(f"{path}: not an indicator table (missing pub_id column)")
                names = header[1:]
                for name in names:
                    data[name] = []
                for lineno, row in enumerate(reader, start=2):
                    if len(row) != len(header):
                        raise DataError(f"{path}:{lineno}: expected {len(header)} fields")
                    pub_ids.append(row[0])
                    for name, cell in zip(names, row[1:]):
                        try:
                            data[name].append(float(cell))
                        except ValueError:
                            raise DataError(f"{path}:{lineno}: non-numeric cell {cell!r}")
        elif path.suffix.lower() == ".jsonl":
            with open(path, encoding="utf-8") as fh:
                names: list[str] | None = None
                for lineno, line in enumerate(fh, start=1):
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        obj = json.loads(line)
                        pid = obj.pop("pub_id")
                    except (json.JSONDecodeError, KeyError) as exc:
                        raise DataError(f"{path}:{lineno}: malformed record ({exc})") from None
                    if names is None:
                        names = list(obj)
                        for name in names:
                            data[name] = []
                    pub_ids.append(str(pid))
                    for name in names:
                        data[name].append(float(obj[name]))
        else:
            raise DataError(f"{path}: unsupported table format (expected .csv or .jsonl)")
        columns = {k: np.asarray(v, dtype=np.float64) for k, v in data.items()}
        return cls(pub_ids=pub_ids, columns=columns)
