"""Tweet cleaning, per-tweet score ingestion, and daily aggregation.

The cleaning rule is token-wise over unicode whitespace: a token containing
``@`` becomes ``@user``; otherwise a token containing ``http`` (case
sensitive) becomes ``http``; everything else passes through, re-joined by
single spaces. The secondary scorer package reimplements this rule verbatim;
the shared fixture under tests/data keeps the two in lockstep.

Daily aggregation uses exact summation (``math.fsum``) so the result is
invariant under reordering of a day's tweets. Days without tweets aggregate
to the neutral triple (0, 1, 0).
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import math
from dataclasses import dataclass

from .errors import CsvFormatError, HsifError

SCORED_HEADER = ("date", "p_pos", "p_neu", "p_neg")
DAILY_HEADER = ("date", "pos", "neu", "neg")
TWEETS_HEADER = ("date", "text")

#: Triple assigned to a day with no tweets: fully neutral.
NEUTRAL_DAY = (0.0, 1.0, 0.0)

_SUM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class TweetRecord:
    date: dt.date
    text: str

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise HsifError(f"{self.date}: tweet text empty after trimming")


@dataclass(frozen=True)
class ScoredTweet:
    date: dt.date
    p_pos: float
    p_neu: float
    p_neg: float

    def __post_init__(self) -> None:
        triple = (self.p_pos, self.p_neu, self.p_neg)
        for name, p in zip(("p_pos", "p_neu", "p_neg"), triple):
            if not (0.0 <= p <= 1.0):
                raise HsifError(f"{self.date}: {name}={p} outside [0, 1]")
        if abs(math.fsum(triple) - 1.0) > _SUM_TOLERANCE:
            raise HsifError(
                f"{self.date}: probabilities do not sum to 1 (got {math.fsum(triple)!r})"
            )


@dataclass(frozen=True)
class DailySentiment:
    date: dt.date
    pos: float
    neu: float
    neg: float


def clean_tweet(text: str) -> str:
    """Apply the token-wise @user/http replacement and normalize whitespace."""
    out: list[str] = []
    for token in text.split():
        if "@" in token:
            out.append("@user")
        elif "http" in token:
            out.append("http")
        else:
            out.append(token)
    return " ".join(out)


def _parse_triple_row(row: list[str], line_no: int, field_names: tuple[str, ...]):
    try:
        date = dt.date.fromisoformat(row[0])
    except ValueError as exc:
        raise CsvFormatError(f"line {line_no}: malformed date {row[0]!r}") from exc
    values = []
    for name, cell in zip(field_names, row[1:]):
        try:
            values.append(float(cell))
        except ValueError as exc:
            raise CsvFormatError(
                f"line {line_no}: non-numeric {name} field {cell!r}"
            ) from exc
    return date, values


def ingest_scores(csv_bytes: bytes) -> list[ScoredTweet]:
    """Parse and validate a scored-tweets CSV (`date,p_pos,p_neu,p_neg`)."""
    reader = csv.reader(io.StringIO(csv_bytes.decode("utf-8-sig"), newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise CsvFormatError("line 1: missing header row") from None
    if tuple(header) != SCORED_HEADER:
        raise CsvFormatError(
            f"line 1: header must be {','.join(SCORED_HEADER)!r}, got {','.join(header)!r}"
        )
    scored: list[ScoredTweet] = []
    for line_no, row in enumerate(reader, start=2):
        if len(row) != 4:
            raise CsvFormatError(f"line {line_no}: expected 4 fields, got {len(row)}")
        date, values = _parse_triple_row(row, line_no, SCORED_HEADER[1:])
        try:
            scored.append(ScoredTweet(date, *values))
        except HsifError as exc:
            raise CsvFormatError(f"line {line_no}: {exc}") from None
    return scored


def aggregate_daily(
    scored: list[ScoredTweet], span: tuple[dt.date, dt.date]
) -> list[DailySentiment]:
    """Average each calendar day's tweet triples; fill tweet-free days neutrally."""
    first, last = span
    if first > last:
        raise HsifError(f"invalid span: {first} after {last}")
    by_day: dict[dt.date, list[ScoredTweet]] = {}
    for tweet in scored:
        if not (first <= tweet.date <= last):
            raise HsifError(
                f"scored tweet on {tweet.date} falls outside span {first}..{last}"
            )
        by_day.setdefault(tweet.date, []).append(tweet)

    out: list[DailySentiment] = []
    day = first
    one = dt.timedelta(days=1)
    while day <= last:
        tweets = by_day.get(day)
        if not tweets:
            out.append(DailySentiment(day, *NEUTRAL_DAY))
        else:
            n = len(tweets)
            out.append(
                DailySentiment(
                    day,
                    math.fsum(t.p_pos for t in tweets) / n,
                    math.fsum(t.p_neu for t in tweets) / n,
                    math.fsum(t.p_neg for t in tweets) / n,
                )
            )
        day += one
    return out


def serialize_daily(daily: list[DailySentiment]) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(DAILY_HEADER)
    for d in daily:
        writer.writerow([d.date.isoformat(), repr(d.pos), repr(d.neu), repr(d.neg)])
    return out.getvalue().encode("utf-8")


def parse_daily(csv_bytes: bytes) -> list[DailySentiment]:
    reader = csv.reader(io.StringIO(csv_bytes.decode("utf-8-sig"), newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise CsvFormatError("line 1: missing header row") from None
    if tuple(header) != DAILY_HEADER:
        raise CsvFormatError(
            f"line 1: header must be {','.join(DAILY_HEADER)!r}, got {','.join(header)!r}"
        )
    out: list[DailySentiment] = []
    for line_no, row in enumerate(reader, start=2):
        if len(row) != 4:
            raise CsvFormatError(f"line {line_no}: expected 4 fields, got {len(row)}")
        date, values = _parse_triple_row(row, line_no, DAILY_HEADER[1:])
        out.append(DailySentiment(date, *values))
    return out


def parse_tweets(csv_bytes: bytes) -> list[TweetRecord]:
    """Parse a raw tweets CSV (`date,text`, RFC 4180 quoting)."""
    reader = csv.reader(io.StringIO(csv_bytes.decode("utf-8-sig"), newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise CsvFormatError("line 1: missing header row") from None
    if tuple(header) != TWEETS_HEADER:
        raise CsvFormatError(
            f"line 1: header must be {','.join(TWEETS_HEADER)!r}, got {','.join(header)!r}"
        )
    tweets: list[TweetRecord] = []
    for line_no, row in enumerate(reader, start=2):
        if len(row) != 2:
            raise CsvFormatError(f"line {line_no}: expected 2 fields, got {len(row)}")
        try:
            date = dt.date.fromisoformat(row[0])
        except ValueError as exc:
            raise CsvFormatError(f"line {line_no}: malformed date {row[0]!r}") from exc
        try:
            tweets.append(TweetRecord(date, row[1]))
        except HsifError as exc:
            raise CsvFormatError(f"line {line_no}: {exc}") from None
    return tweets
