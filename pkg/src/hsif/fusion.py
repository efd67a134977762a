"""Dataset assembly: fuse hard and soft features, prune, scale, window, split.

The full path from candles + daily sentiment to a windowed, tagged dataset:

1. compute the indicator catalog and drop warmup rows;
2. append the three soft sentiment columns (``fuse``);
3. greedily drop columns whose |Pearson r| with an earlier column exceeds the
   threshold, raw OHLCV and soft columns protected (``correlation_prune``);
4. label each day with next-day movement (``make_labels``);
5. min-max scale — fitted on training rows by default, or on the whole frame
   in ``paper-literal`` mode (which leaks test statistics, but mirrors the
   scale-then-split ordering some studies use);
6. cut T-day windows and tag them train/validation/test chronologically by
   day count (70/15/15 by default).
"""

from __future__ import annotations

import datetime as dt
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import FusionError
from .frame import FeatureFrame
from .sentiment import DailySentiment

logger = logging.getLogger(__name__)

SOFT_COLUMNS = ("pos", "neu", "neg")
RAW_PROTECTED = ("O", "H", "L", "C", "VOL")
DEFAULT_PROTECTED = frozenset(RAW_PROTECTED + SOFT_COLUMNS)
DEFAULT_RATIOS = (0.70, 0.15, 0.15)
SCALING_MODES = ("train-fit", "paper-literal")


def make_labels(closes) -> np.ndarray:
    """Next-day movement labels: element i is 1 iff close[i+1] > close[i].

    Element i is the label for day i+1 (the day being predicted); a window
    anchored at day i predicts with labels[i].
    """
    arr = np.asarray(closes, dtype=np.float64)
    if arr.ndim != 1 or len(arr) < 2:
        raise FusionError("labels need at least 2 closes")
    return (arr[1:] > arr[:-1]).astype(np.int64)


@dataclass(frozen=True)
class DroppedColumn:
    column: str
    partner: str
    r: float


def _pearson_matrix(matrix: np.ndarray) -> np.ndarray:
    """Pairwise Pearson r; zero-variance columns correlate 0 with everything."""
    centered = matrix - matrix.mean(axis=0)
    norms = np.sqrt((centered**2).sum(axis=0))
    safe = np.where(norms > 0.0, norms, 1.0)
    unit = centered / safe
    corr = unit.T @ unit
    zero_var = norms == 0.0
    corr[zero_var, :] = 0.0
    corr[:, zero_var] = 0.0
    return corr


def correlation_prune(
    frame: FeatureFrame,
    threshold: float = 0.95,
    protected: frozenset[str] | set[str] = DEFAULT_PROTECTED,
    stat_rows: int | None = None,
) -> tuple[FeatureFrame, list[DroppedColumn]]:
    """Drop each column whose |r| with any earlier column exceeds the threshold.

    The scan runs in column (catalog) order over all ordered pairs; protected
    columns are never dropped. Correlations are measured on the first
    ``stat_rows`` rows (the training region) when given, else on all rows.
    """
    if not (0.0 < threshold < 1.0):
        raise FusionError(f"threshold must be in (0, 1), got {threshold}")
    matrix = frame.matrix()
    if np.isnan(matrix).any():
        raise FusionError("frame has undefined cells; drop warmup rows first")
    if stat_rows is not None:
        if not (2 <= stat_rows <= frame.n_rows):
            raise FusionError(f"stat_rows={stat_rows} outside 2..{frame.n_rows}")
        matrix = matrix[:stat_rows]
    names = frame.names
    corr = _pearson_matrix(matrix)

    dropped: list[DroppedColumn] = []
    dropped_names: set[str] = set()
    for j, name in enumerate(names):
        if name in protected:
            continue
        for i in range(j):
            if abs(corr[i, j]) > threshold:
                dropped.append(DroppedColumn(name, names[i], float(corr[i, j])))
                dropped_names.add(name)
                break
    kept = [n for n in names if n not in dropped_names]
    return frame.select(kept), dropped


@dataclass(frozen=True)
class ScalerParams:
    """Per-column fitted (min, max) for the affine min-max map."""

    bounds: dict[str, tuple[float, float]]

    def __post_init__(self) -> None:
        for name, (lo, hi) in self.bounds.items():
            if hi < lo:
                raise FusionError(f"scaler column {name!r}: max {hi} < min {lo}")

    def to_dict(self) -> dict:
        return {name: [lo, hi] for name, (lo, hi) in self.bounds.items()}

    @classmethod
    def from_dict(cls, data: dict) -> "ScalerParams":
        return cls({name: (float(lo), float(hi)) for name, (lo, hi) in data.items()})


def fit_minmax(frame: FeatureFrame) -> ScalerParams:
    """Fit per-column (min, max) over the given frame (training rows)."""
    matrix = frame.matrix()
    if np.isnan(matrix).any():
        raise FusionError("cannot fit scaler on undefined cells")
    if frame.n_rows == 0:
        raise FusionError("cannot fit scaler on an empty frame")
    return ScalerParams(
        {
            name: (float(values.min()), float(values.max()))
            for name, values in frame.columns.items()
        }
    )


def apply_minmax(frame: FeatureFrame, params: ScalerParams) -> FeatureFrame:
    """Apply (v - min)/(max - min) per column; constant columns map to 0."""
    columns: dict[str, np.ndarray] = {}
    for name, values in frame.columns.items():
        if name not in params.bounds:
            raise FusionError(f"scaler params missing column {name!r}")
        lo, hi = params.bounds[name]
        if hi == lo:
            columns[name] = np.zeros_like(values)
        else:
            columns[name] = (values - lo) / (hi - lo)
    return FeatureFrame(frame.dates, columns)


def fuse(hard: FeatureFrame, soft: list[DailySentiment]) -> FeatureFrame:
    """Append pos/neu/neg columns to the hard frame over an identical date axis."""
    if len(hard.names) == 0:
        raise FusionError("no hard features")
    soft_by_date = {d.date: d for d in soft}
    if len(soft_by_date) != len(soft):
        raise FusionError("duplicate dates in daily sentiment")
    soft_dates = tuple(d.date for d in soft)
    if soft_dates != hard.dates:
        for i, date in enumerate(hard.dates):
            if i >= len(soft_dates) or soft_dates[i] != date:
                raise FusionError(f"date-axis mismatch at {date}: no matching sentiment day")
        raise FusionError(
            f"date-axis mismatch at {soft_dates[len(hard.dates)]}: no matching hard day"
        )
    columns = {name: values.copy() for name, values in hard.columns.items()}
    columns["pos"] = np.array([d.pos for d in soft])
    columns["neu"] = np.array([d.neu for d in soft])
    columns["neg"] = np.array([d.neg for d in soft])
    return FeatureFrame(hard.dates, columns)


@dataclass
class Window:
    features: np.ndarray  # (T, F) float64
    label: int
    anchor_index: int
    anchor_date: dt.date
    label_date: dt.date
    split: str | None = None


@dataclass(frozen=True)
class SplitSizes:
    train_days: int
    val_days: int
    test_days: int
    train_windows: int
    val_windows: int
    test_windows: int
    train_end_date: dt.date
    val_end_date: dt.date

    def to_dict(self) -> dict:
        return {
            "train_days": self.train_days,
            "val_days": self.val_days,
            "test_days": self.test_days,
            "train_windows": self.train_windows,
            "val_windows": self.val_windows,
            "test_windows": self.test_windows,
            "train_end_date": self.train_end_date.isoformat(),
            "val_end_date": self.val_end_date.isoformat(),
        }


@dataclass
class WindowedDataset:
    windows: list[Window]
    T: int
    feature_names: tuple[str, ...]
    dates: tuple[dt.date, ...]  # full day axis of the source frame
    split_sizes: SplitSizes | None = field(default=None)

    @property
    def F(self) -> int:
        return len(self.feature_names)

    @property
    def n_days(self) -> int:
        return len(self.dates)

    def tagged(self, split: str) -> list[Window]:
        return [w for w in self.windows if w.split == split]

    def X(self, split: str | None = None) -> np.ndarray:
        windows = self.windows if split is None else self.tagged(split)
        if not windows:
            return np.empty((0, self.T, self.F))
        return np.stack([w.features for w in windows])

    def y(self, split: str | None = None) -> np.ndarray:
        windows = self.windows if split is None else self.tagged(split)
        return np.array([w.label for w in windows], dtype=np.int64)


def build_windows(frame: FeatureFrame, labels: np.ndarray, T: int) -> WindowedDataset:
    """One window per anchor day t in [T-1, N-2]; window count N - T."""
    if T < 1:
        raise FusionError(f"window length must be >= 1, got {T}")
    n = frame.n_rows
    if n <= T:
        raise FusionError(f"series too short: {n} days cannot fill T={T} windows plus a label")
    if len(labels) != n - 1:
        raise FusionError(f"expected {n - 1} labels for {n} days, got {len(labels)}")
    matrix = frame.matrix()
    if np.isnan(matrix).any():
        raise FusionError("frame has undefined cells; drop warmup rows first")
    windows = [
        Window(
            features=matrix[t - T + 1 : t + 1].copy(),
            label=int(labels[t]),
            anchor_index=t,
            anchor_date=frame.dates[t],
            label_date=frame.dates[t + 1],
        )
        for t in range(T - 1, n - 1)
    ]
    return WindowedDataset(windows, T, frame.names, frame.dates)


def split_day_counts(n_days: int, ratios: tuple[float, float, float]) -> tuple[int, int, int]:
    r_train, r_val, r_test = ratios
    if min(r_train, r_val, r_test) <= 0.0:
        raise FusionError(f"split ratios must all be positive, got {ratios}")
    if abs((r_train + r_val + r_test) - 1.0) > 1e-9:
        raise FusionError(f"split ratios must sum to 1, got {ratios}")
    n_train = math.floor(r_train * n_days)
    n_val = math.floor(r_val * n_days)
    return n_train, n_val, n_days - n_train - n_val


def split_chronological(
    ds: WindowedDataset, ratios: tuple[float, float, float] = DEFAULT_RATIOS
) -> WindowedDataset:
    """Tag windows train/validation/test by anchor day, sizes in day units."""
    n_train, n_val, n_test = split_day_counts(ds.n_days, ratios)
    if n_val == 0:
        logger.warning("empty validation split (%d days at ratios %s)", ds.n_days, ratios)
    if n_test == 0:
        logger.warning("empty test split (%d days at ratios %s)", ds.n_days, ratios)
    counts = {"train": 0, "validation": 0, "test": 0}
    for window in ds.windows:
        if window.anchor_index < n_train:
            window.split = "train"
        elif window.anchor_index < n_train + n_val:
            window.split = "validation"
        else:
            window.split = "test"
        counts[window.split] += 1
    sizes = SplitSizes(
        train_days=n_train,
        val_days=n_val,
        test_days=n_test,
        train_windows=counts["train"],
        val_windows=counts["validation"],
        test_windows=counts["test"],
        train_end_date=ds.dates[n_train - 1],
        val_end_date=ds.dates[n_train + n_val - 1],
    )
    return WindowedDataset(ds.windows, ds.T, ds.feature_names, ds.dates, sizes)


@dataclass
class BuiltDataset:
    """Everything the dataset stage produces, manifest-ready."""

    dataset: WindowedDataset
    frame: FeatureFrame  # fused, pruned, unscaled, post-warmup
    scaled_frame: FeatureFrame
    labels: np.ndarray
    scaler: ScalerParams
    dropped: list[DroppedColumn]
    scaling_mode: str
    warmup_rows: int


def build_dataset(
    hard_full: FeatureFrame,
    daily: list[DailySentiment],
    *,
    window_length: int = 21,
    ratios: tuple[float, float, float] = DEFAULT_RATIOS,
    threshold: float = 0.95,
    scaling_mode: str = "train-fit",
    protected: frozenset[str] = DEFAULT_PROTECTED,
) -> BuiltDataset:
    """Run steps 2..6 of the module pipeline over a computed catalog frame."""
    if scaling_mode not in SCALING_MODES:
        raise FusionError(f"unknown scaling mode {scaling_mode!r}; expected one of {SCALING_MODES}")
    hard = hard_full.drop_warmup()
    warmup_rows = hard_full.n_rows - hard.n_rows
    daily_by_date = {d.date: d for d in daily}
    try:
        aligned = [daily_by_date[date] for date in hard.dates]
    except KeyError as exc:
        raise FusionError(f"no sentiment for day {exc.args[0]}") from None

    fused = fuse(hard, aligned)
    n_train, n_val, _ = split_day_counts(fused.n_rows, ratios)
    pruned, dropped = correlation_prune(
        fused, threshold=threshold, protected=protected, stat_rows=n_train
    )
    labels = make_labels(pruned.columns["C"])
    fit_frame = pruned if scaling_mode == "paper-literal" else pruned.slice_rows(0, n_train)
    scaler = fit_minmax(fit_frame)
    scaled = apply_minmax(pruned, scaler)
    ds = build_windows(scaled, labels, window_length)
    ds = split_chronological(ds, ratios)
    return BuiltDataset(
        dataset=ds,
        frame=pruned,
        scaled_frame=scaled,
        labels=labels,
        scaler=scaler,
        dropped=dropped,
        scaling_mode=scaling_mode,
        warmup_rows=warmup_rows,
    )
