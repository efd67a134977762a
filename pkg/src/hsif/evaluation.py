"""Classification metrics, AUC, and the commission-aware trading simulation.

The trading rules: start with 100,000 USD; act only when today's prediction
differs from yesterday's (the previous prediction starts at -1, so the first
day always acts); a buy pays commission = rate * cash and converts the rest to
fractional units at today's close; a sell converts all units to cash at the
close and then pays commission = rate * cash. A sell signal with no holdings
and a buy signal with no cash are commission-free no-ops. Equity is marked to
market every day; the final day's equity is the strategy's end value.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import HsifError

INITIAL_CAPITAL = 100_000.0
COMMISSION_RATE = 0.001


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self) -> None:
        for name in ("tp", "fp", "tn", "fn"):
            if getattr(self, name) < 0:
                raise HsifError(f"{name} must be >= 0")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


class MetricsReport(NamedTuple):
    accuracy: float
    precision: float
    recall: float
    f1: float
    mcc: float


def _binary(values, what: str) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise HsifError(f"{what} must be one-dimensional")
    if not np.isin(arr, (0, 1)).all():
        raise HsifError(f"{what} must contain only 0 and 1")
    return arr.astype(np.int64)


def confusion(labels, predictions) -> ConfusionCounts:
    y = _binary(labels, "labels")
    p = _binary(predictions, "predictions")
    if len(y) != len(p):
        raise HsifError(f"got {len(y)} labels but {len(p)} predictions")
    return ConfusionCounts(
        tp=int(((y == 1) & (p == 1)).sum()),
        fp=int(((y == 0) & (p == 1)).sum()),
        tn=int(((y == 0) & (p == 0)).sum()),
        fn=int(((y == 1) & (p == 0)).sum()),
    )


def classification_report(counts: ConfusionCounts) -> MetricsReport:
    """Accuracy, precision, recall, F1, MCC; zero denominators yield 0."""
    if counts.total == 0:
        raise HsifError("cannot compute metrics over zero samples")
    tp, fp, tn, fn = counts.tp, counts.fp, counts.tn, counts.fn
    accuracy = (tp + tn) / counts.total
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1_denom = 2 * tp + fp + fn
    f1 = 2 * tp / f1_denom if f1_denom else 0.0
    mcc_denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    mcc = (tp * tn - fp * fn) / math.sqrt(mcc_denom) if mcc_denom else 0.0
    return MetricsReport(accuracy, precision, recall, f1, mcc)


def roc_auc(labels, scores) -> float:
    """P(random positive outranks random negative), ties counting half.

    Computed from midranks; exactly equal to the brute-force all-pairs count.
    """
    y = _binary(labels, "labels")
    s = np.asarray(scores, dtype=np.float64)
    if s.shape != y.shape:
        raise HsifError(f"got {len(y)} labels but {len(s)} scores")
    n_pos = int((y == 1).sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise HsifError("AUC needs both classes present in the labels")
    order = np.argsort(s, kind="stable")
    ranks = np.empty(len(s), dtype=np.float64)
    sorted_scores = s[order]
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0  # midrank, 1-based
        i = j + 1
    rank_sum_pos = ranks[y == 1].sum()
    return (rank_sum_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


@dataclass(frozen=True)
class LedgerEntry:
    date: dt.date
    prediction: int
    action: str  # "buy" | "sell" | "hold"
    units: float
    cash: float
    commission: float
    equity: float


@dataclass(frozen=True)
class TradeLedger:
    entries: tuple[LedgerEntry, ...]
    initial_capital: float
    commission_rate: float

    @property
    def final_equity(self) -> float:
        return self.entries[-1].equity

    @property
    def total_commission(self) -> float:
        return math.fsum(e.commission for e in self.entries)

    def equity_curve(self) -> np.ndarray:
        return np.array([e.equity for e in self.entries])


def _check_closes(closes) -> np.ndarray:
    arr = np.asarray(closes, dtype=np.float64)
    if arr.ndim != 1 or len(arr) == 0:
        raise HsifError("closes must be a non-empty sequence")
    if not (arr > 0).all():
        bad = int(np.argwhere(~(arr > 0))[0, 0])
        raise HsifError(f"non-positive close {arr[bad]} at index {bad}")
    return arr


def _default_dates(n: int) -> tuple[dt.date, ...]:
    start = dt.date(2020, 1, 1)
    return tuple(start + dt.timedelta(days=i) for i in range(n))


def simulate_trading(
    closes,
    predictions,
    *,
    dates: tuple[dt.date, ...] | None = None,
    initial_capital: float = INITIAL_CAPITAL,
    commission_rate: float = COMMISSION_RATE,
) -> TradeLedger:
    """Run the all-in/all-out strategy over the test days."""
    prices = _check_closes(closes)
    preds = _binary(predictions, "predictions")
    if len(preds) != len(prices):
        raise HsifError(f"got {len(prices)} closes but {len(preds)} predictions")
    if dates is None:
        dates = _default_dates(len(prices))
    if len(dates) != len(prices):
        raise HsifError(f"got {len(prices)} closes but {len(dates)} dates")
    if initial_capital <= 0:
        raise HsifError(f"initial capital must be positive, got {initial_capital}")
    if not (0.0 <= commission_rate < 1.0):
        raise HsifError(f"commission rate must be in [0, 1), got {commission_rate}")

    cash = float(initial_capital)
    units = 0.0
    previous = -1
    entries = []
    for date, close, pred in zip(dates, prices.tolist(), preds.tolist()):
        action = "hold"
        commission = 0.0
        if pred != previous:
            if pred == 1 and cash > 0.0:
                commission = commission_rate * cash
                units = (cash - commission) / close
                cash = 0.0
                action = "buy"
            elif pred == 0 and units > 0.0:
                cash = units * close
                commission = commission_rate * cash
                cash -= commission
                units = 0.0
                action = "sell"
        previous = int(pred)
        equity = cash + units * close
        entries.append(
            LedgerEntry(date, int(pred), action, units, cash, commission, equity)
        )
    return TradeLedger(tuple(entries), initial_capital, commission_rate)


def buy_and_hold(
    closes,
    *,
    dates: tuple[dt.date, ...] | None = None,
    initial_capital: float = INITIAL_CAPITAL,
) -> TradeLedger:
    """All-in at the first close, commission-free, held to the end."""
    prices = _check_closes(closes)
    if dates is None:
        dates = _default_dates(len(prices))
    if len(dates) != len(prices):
        raise HsifError(f"got {len(prices)} closes but {len(dates)} dates")
    units = float(initial_capital) / float(prices[0])
    entries = []
    for i, (date, close) in enumerate(zip(dates, prices.tolist())):
        entries.append(
            LedgerEntry(
                date, 1, "buy" if i == 0 else "hold", units, 0.0, 0.0, units * close
            )
        )
    return TradeLedger(tuple(entries), initial_capital, 0.0)


EQUITY_HEADER = ["date", "strategy_equity", "buyhold_equity", "action", "commission"]


def write_equity_csv(strategy: TradeLedger, baseline: TradeLedger) -> bytes:
    if len(strategy.entries) != len(baseline.entries):
        raise HsifError("strategy and baseline ledgers cover different day counts")
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(EQUITY_HEADER)
    for s, b in zip(strategy.entries, baseline.entries):
        if s.date != b.date:
            raise HsifError(f"ledger date mismatch: {s.date} vs {b.date}")
        writer.writerow([s.date.isoformat(), repr(s.equity), repr(b.equity), s.action, repr(s.commission)])
    return out.getvalue().encode("utf-8")


def metrics_to_dict(labels, predictions, scores) -> dict:
    """All five metrics + AUC + confusion counts, JSON-ready."""
    counts = confusion(labels, predictions)
    report = classification_report(counts)
    return {
        "accuracy": report.accuracy,
        "precision": report.precision,
        "recall": report.recall,
        "f1": report.f1,
        "mcc": report.mcc,
        "auc": roc_auc(labels, scores),
        "confusion": counts.to_dict(),
        "n_samples": counts.total,
    }
