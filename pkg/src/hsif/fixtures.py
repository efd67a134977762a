"""Deterministic synthetic data generators for tests, demos, and benchmarks.

Everything is seeded through numpy's PCG64 generator, so identical arguments
always reproduce identical data. ``python3 -m hsif.fixtures OUT_DIR --days N
--seed S`` writes a ready-to-run OHLCV/scored-tweet pair for the CLI.
"""

from __future__ import annotations

import datetime as dt
import io
import csv

import numpy as np

from .marketdata import Candle, CandleSeries


def make_walk_candles(
    n: int,
    seed: int = 0,
    start: dt.date = dt.date(2017, 1, 1),
    base_price: float = 1000.0,
    drift: float = 0.0,
    flat: bool = False,
) -> CandleSeries:
    """Geometric random-walk daily candles with valid OHLC geometry."""
    rng = np.random.default_rng(np.random.PCG64(seed))
    if flat:
        close = np.full(n, base_price)
        open_ = close.copy()
        high = close.copy()
        low = close.copy()
    else:
        steps = rng.normal(drift, 0.02, n)
        close = base_price * np.exp(np.cumsum(steps))
        open_ = np.concatenate([[base_price], close[:-1]])
        wick = np.abs(rng.normal(0.0, 0.008, n)) + 1e-4
        high = np.maximum(open_, close) * (1.0 + wick)
        low = np.minimum(open_, close) / (1.0 + wick)
    volume = np.exp(rng.normal(10.0, 0.8, n))
    candles = tuple(
        Candle(
            start + dt.timedelta(days=i),
            float(open_[i]),
            float(high[i]),
            float(low[i]),
            float(close[i]),
            float(volume[i]),
        )
        for i in range(n)
    )
    return CandleSeries(candles)


def make_scored_rows(
    dates: tuple[dt.date, ...], seed: int = 0, tweets_per_day: int = 3
) -> list[tuple[dt.date, float, float, float]]:
    """Random scored-tweet rows: several probability triples per day."""
    rng = np.random.default_rng(np.random.PCG64(seed))
    rows = []
    for date in dates:
        for _ in range(tweets_per_day):
            raw = rng.dirichlet(np.ones(3))
            rows.append((date, float(raw[0]), float(raw[1]), float(raw[2])))
    return rows


def scored_rows_to_csv(rows) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["date", "p_pos", "p_neu", "p_neg"])
    for date, p_pos, p_neu, p_neg in rows:
        writer.writerow([date.isoformat(), repr(p_pos), repr(p_neu), repr(p_neg)])
    return out.getvalue().encode("utf-8")


def make_task_windows(
    n_windows: int = 200,
    T: int = 4,
    F: int = 2,
    seed: int = 0,
    margin: float = 0.8,
    sigma: float = 0.5,
    label_noise: float = 0.0,
    signal_prefix: int | None = None,
    ratios: tuple[float, float, float] = (0.70, 0.15, 0.15),
) -> "WindowedDataset":
    """Synthetic classification task: label = sign of the window mean of feature 0.

    Each window draws a class and shifts feature 0 by ``±margin`` (over the
    first ``signal_prefix`` timesteps when given, else the whole window); the
    label is then read back off the realized mean, so the threshold rule holds
    exactly. ``label_noise`` flips that fraction of train/validation labels
    (never test labels). Windows are tagged chronologically by window count.
    """
    import math as _math

    from .fusion import Window, WindowedDataset

    root = np.random.SeedSequence(seed)
    data_ss, noise_ss = root.spawn(2)
    rng = np.random.default_rng(data_ss)
    noise_rng = np.random.default_rng(noise_ss)
    prefix = T if signal_prefix is None else signal_prefix
    if not (1 <= prefix <= T):
        raise ValueError(f"signal_prefix must be in 1..{T}, got {signal_prefix}")

    n_train = _math.floor(ratios[0] * n_windows)
    n_val = _math.floor(ratios[1] * n_windows)
    start = dt.date(2020, 1, 1)
    windows: list[Window] = []
    for idx in range(n_windows):
        shift = margin if rng.integers(2) else -margin
        features = rng.normal(0.0, 1.0, size=(T, F))
        features[:prefix, 0] = rng.normal(shift, sigma, size=prefix)
        features[prefix:, 0] = rng.normal(0.0, sigma, size=T - prefix)
        label = 1 if features[:, 0].mean() > 0.0 else 0
        if label_noise > 0.0 and idx < n_train + n_val:
            if noise_rng.random() < label_noise:
                label = 1 - label
        split = "train" if idx < n_train else "validation" if idx < n_train + n_val else "test"
        windows.append(
            Window(
                features=features,
                label=label,
                anchor_index=idx,
                anchor_date=start + dt.timedelta(days=idx),
                label_date=start + dt.timedelta(days=idx + 1),
                split=split,
            )
        )
    dates = tuple(start + dt.timedelta(days=i) for i in range(n_windows + 1))
    names = tuple(f"F{i}" for i in range(F))
    return WindowedDataset(windows, T, names, dates)


def make_prunable_market(
    days: int = 3027,
    target_drops: int = 17,
    seed: int = 5,
    sentiment_seed: int = 6,
    doctor_seed: int = 7,
    threshold: float = 0.95,
    ratios: tuple[float, float, float] = (0.70, 0.15, 0.15),
):
    """A market whose feature table prunes by exactly ``target_drops`` columns.

    Computes the default indicator catalog over a random walk, counts how
    many columns the correlation pruner already removes, then overwrites
    additional non-protected columns with near-copies of the close level
    (keeping each column's own undefined warmup prefix) until the pruner
    drops exactly ``target_drops``.  Returns ``(hard_frame, daily)`` ready
    for dataset assembly; raises if the target cannot be reached.
    """
    from .catalog import IndicatorCatalog, compute_catalog
    from .frame import FeatureFrame
    from .fusion import DEFAULT_PROTECTED, correlation_prune, fuse, split_day_counts
    from .sentiment import ScoredTweet, aggregate_daily

    candles = make_walk_candles(days, seed=seed)
    hard_full = compute_catalog(candles, IndicatorCatalog.default())
    rows = make_scored_rows(candles.dates, seed=sentiment_seed)
    daily = aggregate_daily(
        [ScoredTweet(*row) for row in rows], (candles.dates[0], candles.dates[-1])
    )
    daily_by_date = {d.date: d for d in daily}

    def prune_names(frame: FeatureFrame):
        hard = frame.drop_warmup()
        fused = fuse(hard, [daily_by_date[d] for d in hard.dates])
        n_train, _, _ = split_day_counts(fused.n_rows, ratios)
        _, dropped = correlation_prune(fused, threshold=threshold, stat_rows=n_train)
        return {d.column for d in dropped}, {d.partner for d in dropped}

    dropped, partners = prune_names(hard_full)
    rng = np.random.default_rng(np.random.PCG64(doctor_seed))
    close = np.asarray(hard_full.columns["C"])
    for name in reversed(hard_full.names):
        if len(dropped) >= target_drops:
            break
        if name in DEFAULT_PROTECTED or name in dropped or name in partners:
            continue
        columns = dict(hard_full.columns)
        defined = ~np.isnan(columns[name])
        sigma = 1e-3 * float(np.std(close[defined]))
        doctored = columns[name].copy()
        doctored[defined] = 0.999 * close[defined] + sigma * rng.standard_normal(
            int(defined.sum())
        )
        columns[name] = doctored
        hard_full = FeatureFrame(hard_full.dates, columns)
        dropped, partners = prune_names(hard_full)
    if len(dropped) != target_drops:
        raise RuntimeError(
            f"could not construct a market with exactly {target_drops} pruned "
            f"columns; reached {len(dropped)}"
        )
    return hard_full, daily


def _main(argv: list[str] | None = None) -> int:
    import argparse
    from pathlib import Path

    from .marketdata import serialize

    parser = argparse.ArgumentParser(
        prog="python3 -m hsif.fixtures",
        description="Write a synthetic OHLCV CSV and matching scored-tweet CSV.",
    )
    parser.add_argument("out_dir", type=Path)
    parser.add_argument("--days", type=int, default=600)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    args.out_dir.mkdir(parents=True, exist_ok=True)
    candles = make_walk_candles(args.days, seed=args.seed)
    (args.out_dir / "ohlcv.csv").write_bytes(serialize(candles))
    rows = make_scored_rows(candles.dates, seed=args.seed + 1)
    (args.out_dir / "scored.csv").write_bytes(scored_rows_to_csv(rows))
    print(f"wrote {args.out_dir / 'ohlcv.csv'} and {args.out_dir / 'scored.csv'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(_main())
