"""Daily OHLCV candle ingestion, validation, and serialization.

CSV contract: UTF-8, header row ``date,open,high,low,close,volume``, one row
per calendar day with ISO ``YYYY-MM-DD`` dates in strictly increasing order.
Calendar gaps are legal; they are reported by :func:`validate_gaps`, never
filled. All downstream indexing is positional within the series.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import math
import re
from dataclasses import dataclass
from typing import Iterator

from .errors import CsvFormatError

OHLCV_HEADER = ("date", "open", "high", "low", "close", "volume")

_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")


@dataclass(frozen=True)
class Candle:
    """One day of OHLCV data. Prices are strictly positive and satisfy
    low <= min(open, close) <= max(open, close) <= high; volume >= 0."""

    date: dt.date
    open: float
    high: float
    low: float
    close: float
    volume: float

    def validate(self) -> None:
        for field in ("open", "high", "low", "close"):
            value = getattr(self, field)
            if not math.isfinite(value) or value <= 0.0:
                raise CsvFormatError(
                    f"{self.date}: {field} must be a finite positive number, got {value!r}"
                )
        if not math.isfinite(self.volume) or self.volume < 0.0:
            raise CsvFormatError(
                f"{self.date}: volume must be finite and non-negative, got {self.volume!r}"
            )
        body_low = min(self.open, self.close)
        body_high = max(self.open, self.close)
        if not (self.low <= body_low and body_high <= self.high):
            raise CsvFormatError(
                f"{self.date}: OHLC bounds violated "
                f"(open={self.open}, high={self.high}, low={self.low}, close={self.close})"
            )


@dataclass(frozen=True)
class CandleSeries:
    """An ordered run of daily candles with strictly increasing dates."""

    candles: tuple[Candle, ...]

    def __post_init__(self) -> None:
        for candle in self.candles:
            candle.validate()
        for prev, cur in zip(self.candles, self.candles[1:]):
            if cur.date <= prev.date:
                raise CsvFormatError(
                    f"dates must be strictly increasing: {cur.date} follows {prev.date}"
                )

    def __len__(self) -> int:
        return len(self.candles)

    def __iter__(self) -> Iterator[Candle]:
        return iter(self.candles)

    def __getitem__(self, index: int) -> Candle:
        return self.candles[index]

    @property
    def dates(self) -> tuple[dt.date, ...]:
        return tuple(c.date for c in self.candles)

    def column(self, name: str) -> list[float]:
        """Extract one OHLCV field as a list, in series order."""
        return [getattr(c, name) for c in self.candles]


def _parse_date(text: str, line_no: int) -> dt.date:
    if not _DATE_RE.match(text):
        raise CsvFormatError(f"line {line_no}: malformed date {text!r}, expected YYYY-MM-DD")
    try:
        return dt.date.fromisoformat(text)
    except ValueError as exc:
        raise CsvFormatError(f"line {line_no}: invalid calendar date {text!r}") from exc


def _parse_number(text: str, field: str, line_no: int) -> float:
    try:
        value = float(text)
    except ValueError as exc:
        raise CsvFormatError(
            f"line {line_no}: non-numeric {field} field {text!r}"
        ) from exc
    if not math.isfinite(value):
        raise CsvFormatError(f"line {line_no}: {field} must be finite, got {text!r}")
    return value


def parse_ohlcv(csv_bytes: bytes) -> CandleSeries:
    """Parse an OHLCV CSV into a validated :class:`CandleSeries`.

    All violations raise :class:`CsvFormatError` naming the offending line
    (the header is line 1).
    """
    text = csv_bytes.decode("utf-8-sig")
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise CsvFormatError("line 1: missing header row") from None
    if tuple(header) != OHLCV_HEADER:
        raise CsvFormatError(
            f"line 1: header must be {','.join(OHLCV_HEADER)!r}, got {','.join(header)!r}"
        )

    candles: list[Candle] = []
    prev_date: dt.date | None = None
    for line_no, row in enumerate(reader, start=2):
        if len(row) != 6:
            raise CsvFormatError(f"line {line_no}: expected 6 fields, got {len(row)}")
        date = _parse_date(row[0], line_no)
        numbers = [
            _parse_number(cell, field, line_no)
            for cell, field in zip(row[1:], OHLCV_HEADER[1:])
        ]
        candle = Candle(date, *numbers)
        try:
            candle.validate()
        except CsvFormatError as exc:
            raise CsvFormatError(f"line {line_no}: {exc}") from None
        if prev_date is not None and date <= prev_date:
            raise CsvFormatError(
                f"non-ascending dates at line {line_no}: {date} follows {prev_date}"
            )
        prev_date = date
        candles.append(candle)
    return CandleSeries(tuple(candles))


def serialize(series: CandleSeries) -> bytes:
    """Serialize a series back to CSV bytes.

    Floats are written with ``repr`` so parse(serialize(s)) == s bit-exactly.
    """
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(OHLCV_HEADER)
    for c in series:
        writer.writerow(
            [c.date.isoformat(), repr(c.open), repr(c.high), repr(c.low), repr(c.close), repr(c.volume)]
        )
    return out.getvalue().encode("utf-8")


def validate_gaps(series: CandleSeries) -> list[dt.date]:
    """List every calendar day strictly between first and last with no candle."""
    missing: list[dt.date] = []
    one = dt.timedelta(days=1)
    for prev, cur in zip(series.candles, series.candles[1:]):
        day = prev.date + one
        while day < cur.date:
            missing.append(day)
            day += one
    return missing
