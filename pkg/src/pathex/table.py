"""Feature table container and CSV serialization.

CSV layout: ``object_id,class_label,center_x,center_y`` followed by the
247 manifest columns. Numbers use the shortest round-trip decimal form of
the underlying double; non-finite values serialize as ``null``. Rows are
always sorted by object id.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParseError
from .manifest import DEFAULT_MANIFEST, FeatureManifest

META_COLUMNS = ("object_id", "class_label", "center_x", "center_y")


@dataclass(frozen=True)
class FeatureRow:
    object_id: int
    class_label: str
    center_x: float
    center_y: float
    values: np.ndarray  # (247,) float64, frozen

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class FeatureTable:
    feature_names: tuple[str, ...]
    rows: tuple[FeatureRow, ...]
    manifest_version: str = DEFAULT_MANIFEST.version

    def __post_init__(self):
        rows = tuple(sorted(self.rows, key=lambda r: r.object_id))
        for row in rows:
            if len(row.values) != len(self.feature_names):
                raise ValueError(
                    f"row {row.object_id} has {len(row.values)} values, "
                    f"expected {len(self.feature_names)}"
                )
        object.__setattr__(self, "rows", rows)

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def object_ids(self) -> tuple[int, ...]:
        return tuple(r.object_id for r in self.rows)

    def matrix(self) -> np.ndarray:
        if not self.rows:
            return np.empty((0, len(self.feature_names)))
        return np.stack([r.values for r in self.rows])

    def column(self, name: str) -> np.ndarray:
        idx = self.feature_names.index(name)
        return np.array([r.values[idx] for r in self.rows])


def _format(value: float) -> str:
    return repr(float(value)) if math.isfinite(value) else "null"


def write_csv(table: FeatureTable, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(list(META_COLUMNS) + list(table.feature_names))
    for row in table.rows:
        writer.writerow(
            [row.object_id, row.class_label, _format(row.center_x), _format(row.center_y)]
            + [_format(v) for v in row.values.tolist()]
        )


def to_csv_text(table: FeatureTable) -> str:
    buf = io.StringIO()
    write_csv(table, buf)
    return buf.getvalue()


def save_csv(table: FeatureTable, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        write_csv(table, fh)


def _parse(value: str) -> float:
    return math.nan if value == "null" else float(value)


def load_csv(path) -> FeatureTable:
    """Read a feature CSV back; header order defines the feature names."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty CSV") from None
        if tuple(header[: len(META_COLUMNS)]) != META_COLUMNS:
            raise ParseError(f"{path}: unexpected CSV header {header[:4]}")
        names = tuple(header[len(META_COLUMNS):])
        rows = []
        for record in reader:
            if not record:
                continue
            if len(record) != len(header):
                raise ParseError(f"{path}: ragged CSV row for id {record[:1]}")
            rows.append(
                FeatureRow(
                    int(record[0]),
                    record[1],
                    _parse(record[2]),
                    _parse(record[3]),
                    np.array([_parse(v) for v in record[4:]], dtype=np.float64),
                )
            )
    return FeatureTable(names, tuple(rows))


def manifest_matches(table: FeatureTable, manifest: FeatureManifest) -> bool:
    return table.feature_names == manifest.names
