"""A date-indexed column store shared by the feature and fusion stages.

Columns are float64 arrays over a single date axis; NaN marks warmup cells
(the undefined prefix of an indicator). CSV form: ``date`` first, one column
per feature, absent cells rendered as empty fields.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import math

import numpy as np

from .errors import CsvFormatError, FusionError


class FeatureFrame:
    """Ordered named float columns over a shared, strictly increasing date axis."""

    def __init__(self, dates: tuple[dt.date, ...], columns: dict[str, np.ndarray]):
        self.dates = tuple(dates)
        self.columns: dict[str, np.ndarray] = {}
        for name, values in columns.items():
            arr = np.asarray(values, dtype=np.float64)
            if arr.ndim != 1 or arr.shape[0] != len(self.dates):
                raise FusionError(
                    f"column {name!r} has length {arr.shape[0] if arr.ndim == 1 else arr.shape}, "
                    f"expected {len(self.dates)}"
                )
            self.columns[name] = arr
        for prev, cur in zip(self.dates, self.dates[1:]):
            if cur <= prev:
                raise FusionError(f"dates must be strictly increasing: {cur} follows {prev}")

    @property
    def n_rows(self) -> int:
        return len(self.dates)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.columns)

    def matrix(self) -> np.ndarray:
        """All columns as a (rows, columns) float64 matrix in column order."""
        if not self.columns:
            return np.empty((self.n_rows, 0), dtype=np.float64)
        return np.column_stack([self.columns[name] for name in self.columns])

    def first_fully_defined_row(self) -> int:
        """Index of the first row where every column is defined (non-NaN)."""
        matrix = self.matrix()
        defined = ~np.isnan(matrix).any(axis=1)
        hits = np.nonzero(defined)[0]
        if hits.size == 0:
            raise FusionError("no row has every column defined")
        return int(hits[0])

    def drop_warmup(self) -> "FeatureFrame":
        """Trim the undefined prefix so every remaining cell is defined."""
        start = self.first_fully_defined_row()
        return self.slice_rows(start, self.n_rows)

    def slice_rows(self, start: int, stop: int) -> "FeatureFrame":
        return FeatureFrame(
            self.dates[start:stop],
            {name: values[start:stop].copy() for name, values in self.columns.items()},
        )

    def select(self, names: list[str] | tuple[str, ...]) -> "FeatureFrame":
        missing = [n for n in names if n not in self.columns]
        if missing:
            raise FusionError(f"unknown column(s): {', '.join(missing)}")
        return FeatureFrame(self.dates, {n: self.columns[n].copy() for n in names})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FeatureFrame):
            return NotImplemented
        return (
            self.dates == other.dates
            and self.names == other.names
            and all(
                np.array_equal(self.columns[n], other.columns[n], equal_nan=True)
                for n in self.columns
            )
        )

    def to_csv(self) -> bytes:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["date", *self.columns])
        matrix = self.matrix()
        for i, date in enumerate(self.dates):
            row: list[str] = [date.isoformat()]
            for value in matrix[i]:
                row.append("" if math.isnan(value) else repr(float(value)))
            writer.writerow(row)
        return out.getvalue().encode("utf-8")

    @classmethod
    def from_csv(cls, csv_bytes: bytes) -> "FeatureFrame":
        reader = csv.reader(io.StringIO(csv_bytes.decode("utf-8-sig"), newline=""))
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError("line 1: missing header row") from None
        if not header or header[0] != "date":
            raise CsvFormatError("line 1: first column must be 'date'")
        names = header[1:]
        dates: list[dt.date] = []
        rows: list[list[float]] = []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise CsvFormatError(
                    f"line {line_no}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                dates.append(dt.date.fromisoformat(row[0]))
            except ValueError as exc:
                raise CsvFormatError(f"line {line_no}: malformed date {row[0]!r}") from exc
            rows.append([float("nan") if cell == "" else float(cell) for cell in row[1:]])

        data = np.array(rows, dtype=np.float64) if rows else np.empty((0, len(names)))
        return cls(tuple(dates), {name: data[:, j] for j, name in enumerate(names)})
