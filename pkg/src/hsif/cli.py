"""Command-line pipeline: ingest -> build-dataset -> train -> evaluate -> backtest -> report.

Each stage writes its artifacts into a fresh timestamped directory under
``<out_dir>/<stage>/`` and repoints that stage's ``LATEST`` file, so runs are
append-only and nothing is overwritten.  Timestamps live only in directory
names, never inside artifacts: re-running a stage with unchanged inputs and
config produces byte-identical files.  Every JSON artifact embeds a format
version, the resolved-config hash, and content hashes of the files it
consumed, so any output can be traced without external bookkeeping.

Exit codes: 0 success, 1 runtime/data error, 2 usage, bad config, or a
missing prerequisite stage.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import hashlib
import io
import json
import os
import sys
from pathlib import Path

from . import __version__
from .bilstm import (
    TrainConfig,
    load_checkpoint,
    predict_proba,
    save_checkpoint,
    train,
)
from .catalog import IndicatorCatalog, compute_catalog
from .config import FIELD_NAMES, PipelineConfig, parse_value, resolve_config
from .errors import ConfigError, HsifError, ModelError, PrerequisiteError
from .evaluation import (
    EQUITY_HEADER,
    buy_and_hold,
    metrics_to_dict,
    simulate_trading,
    write_equity_csv,
)
from .frame import FeatureFrame
from .fusion import ScalerParams, build_dataset, build_windows, split_chronological
from .marketdata import parse_ohlcv, serialize, validate_gaps
from .sentiment import aggregate_daily, ingest_scores, parse_daily, serialize_daily

STAGES = ("ingest", "build-dataset", "train", "evaluate", "backtest", "report")

PREDICTIONS_HEADER = ("anchor_date", "label_date", "label", "prediction", "p_down", "p_up")
LOSS_CURVES_HEADER = ("epoch", "train_loss", "val_loss", "val_accuracy")


# --------------------------------------------------------------------------
# run-directory plumbing


def _utc_stamp() -> str:
    return dt.datetime.now(dt.timezone.utc).strftime("%Y%m%dT%H%M%SZ")


def new_run_dir(out_dir: Path, stage: str) -> Path:
    """Create a fresh run directory for a stage; never reuses an existing one."""
    stage_root = out_dir / stage
    stage_root.mkdir(parents=True, exist_ok=True)
    stamp = _utc_stamp()
    candidate = stage_root / stamp
    counter = 1
    while candidate.exists():
        counter += 1
        candidate = stage_root / f"{stamp}-{counter}"
    candidate.mkdir()
    return candidate


def point_latest(run_dir: Path) -> None:
    (run_dir.parent / "LATEST").write_text(run_dir.name + "\n", encoding="utf-8")


def latest_run_dir(out_dir: Path, stage: str) -> Path:
    pointer = out_dir / stage / "LATEST"
    if pointer.is_file():
        name = pointer.read_text(encoding="utf-8").strip()
        run_dir = out_dir / stage / name
        if run_dir.is_dir():
            return run_dir
    raise PrerequisiteError(f"no {stage} artifacts under {out_dir}; run {stage} first")


def stage_file(out_dir: Path, stage: str, name: str) -> Path:
    path = latest_run_dir(out_dir, stage) / name
    if not path.is_file():
        raise PrerequisiteError(f"{name} missing from the latest {stage} run; run {stage} first")
    return path


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _sha256_file(path: Path) -> str:
    return _sha256(path.read_bytes())


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _read_json(path: Path, what: str) -> dict:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise HsifError(f"corrupt {what}: {exc}") from None
    if not isinstance(data, dict):
        raise HsifError(f"corrupt {what}: expected a JSON object")
    return data


def _announce(run_dir: Path) -> None:
    for path in sorted(run_dir.iterdir()):
        print(f"wrote {path}")


def _require_input(cfg: PipelineConfig, field: str, stage: str) -> Path:
    value = getattr(cfg, field)
    if not value:
        raise ConfigError(f"field {field}: required by the {stage} stage")
    path = Path(value)
    if not path.is_file():
        raise ConfigError(f"field {field}: file not found: {path}")
    return path


# --------------------------------------------------------------------------
# stages


def cmd_ingest(cfg: PipelineConfig, out_dir: Path) -> Path:
    ohlcv_path = _require_input(cfg, "ohlcv_csv", "ingest")
    ohlcv_bytes = ohlcv_path.read_bytes()
    series = parse_ohlcv(ohlcv_bytes)
    gaps = validate_gaps(series)

    scored = []
    scored_bytes = None
    if cfg.scored_csv:
        scored_path = _require_input(cfg, "scored_csv", "ingest")
        scored_bytes = scored_path.read_bytes()
        scored = ingest_scores(scored_bytes)
    span = (series.dates[0], series.dates[-1])
    daily = aggregate_daily(scored, span)

    run_dir = new_run_dir(out_dir, "ingest")
    candles_bytes = serialize(series)
    daily_bytes = serialize_daily(daily)
    (run_dir / "candles.csv").write_bytes(candles_bytes)
    (run_dir / "daily_sentiment.csv").write_bytes(daily_bytes)
    _write_json(
        run_dir / "manifest.json",
        {
            "format": "hsif-ingest-manifest-v1",
            "tool_version": __version__,
            "config_hash": cfg.content_hash(),
            "days": len(series),
            "date_span": [span[0].isoformat(), span[1].isoformat()],
            "calendar_gaps": [d.isoformat() for d in gaps],
            "scored_tweets": len(scored),
            "files": {
                "candles.csv": {
                    "columns": ["date", "open", "high", "low", "close", "volume"],
                    "rows": len(series),
                    "sha256": _sha256(candles_bytes),
                },
                "daily_sentiment.csv": {
                    "columns": ["date", "pos", "neu", "neg"],
                    "rows": len(daily),
                    "sha256": _sha256(daily_bytes),
                },
            },
            "inputs": {
                "ohlcv_csv": {"path": str(ohlcv_path), "sha256": _sha256(ohlcv_bytes)},
                "scored_csv": (
                    None
                    if scored_bytes is None
                    else {"path": cfg.scored_csv, "sha256": _sha256(scored_bytes)}
                ),
            },
        },
    )
    point_latest(run_dir)
    _announce(run_dir)
    return run_dir


def _load_catalog(cfg: PipelineConfig) -> IndicatorCatalog:
    if not cfg.catalog:
        return IndicatorCatalog.default()
    path = Path(cfg.catalog)
    if not path.is_file():
        raise ConfigError(f"field catalog: file not found: {path}")
    return IndicatorCatalog.from_text(
        path.read_text(encoding="utf-8"), version=f"file:{path.name}"
    )


def cmd_build_dataset(cfg: PipelineConfig, out_dir: Path) -> Path:
    candles_path = stage_file(out_dir, "ingest", "candles.csv")
    daily_path = stage_file(out_dir, "ingest", "daily_sentiment.csv")
    candles_bytes = candles_path.read_bytes()
    daily_bytes = daily_path.read_bytes()
    series = parse_ohlcv(candles_bytes)
    daily = parse_daily(daily_bytes)
    catalog = _load_catalog(cfg)

    hard_full = compute_catalog(series, catalog)
    built = build_dataset(
        hard_full,
        daily,
        window_length=cfg.window_length,
        ratios=(cfg.train_ratio, cfg.val_ratio, cfg.test_ratio),
        threshold=cfg.correlation_threshold,
        scaling_mode=cfg.scaling_mode,
    )
    ds = built.dataset

    features_bytes = built.scaled_frame.to_csv()
    labels_out = io.StringIO()
    writer = csv.writer(labels_out, lineterminator="\n")
    writer.writerow(["date", "label"])
    for date, label in zip(built.scaled_frame.dates[:-1], built.labels.tolist()):
        writer.writerow([date.isoformat(), label])
    labels_bytes = labels_out.getvalue().encode("utf-8")

    run_dir = new_run_dir(out_dir, "build-dataset")
    (run_dir / "features.csv").write_bytes(features_bytes)
    (run_dir / "labels.csv").write_bytes(labels_bytes)
    _write_json(
        run_dir / "dataset_manifest.json",
        {
            "format": "hsif-dataset-manifest-v1",
            "tool_version": __version__,
            "config_hash": cfg.content_hash(),
            "catalog_version": catalog.version,
            "catalog_sha256": catalog.sha256,
            "window_length": ds.T,
            "ratios": [cfg.train_ratio, cfg.val_ratio, cfg.test_ratio],
            "correlation_threshold": cfg.correlation_threshold,
            "scaling_mode": built.scaling_mode,
            "warmup_rows": built.warmup_rows,
            "days": built.scaled_frame.n_rows,
            "feature_names": list(ds.feature_names),
            "dropped_columns": [
                {"column": d.column, "partner": d.partner, "r": d.r} for d in built.dropped
            ],
            "scaler": built.scaler.to_dict(),
            "split": ds.split_sizes.to_dict(),
            "files": {
                "features.csv": {
                    "columns": ["date", *ds.feature_names],
                    "rows": built.scaled_frame.n_rows,
                    "sha256": _sha256(features_bytes),
                },
                "labels.csv": {
                    "columns": ["date", "label"],
                    "rows": built.scaled_frame.n_rows - 1,
                    "sha256": _sha256(labels_bytes),
                },
            },
            "inputs": {
                "candles.csv": _sha256(candles_bytes),
                "daily_sentiment.csv": _sha256(daily_bytes),
            },
        },
    )
    point_latest(run_dir)
    _announce(run_dir)
    return run_dir


def _load_dataset(out_dir: Path):
    """Rebuild the windowed dataset from the latest build-dataset artifacts."""
    manifest_path = stage_file(out_dir, "build-dataset", "dataset_manifest.json")
    features_path = stage_file(out_dir, "build-dataset", "features.csv")
    labels_path = stage_file(out_dir, "build-dataset", "labels.csv")
    manifest = _read_json(manifest_path, "dataset manifest")

    frame = FeatureFrame.from_csv(features_path.read_bytes())
    labels = []
    with labels_path.open(newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    for row in rows[1:]:
        labels.append(int(row[1]))

    ds = build_windows(frame, labels, int(manifest["window_length"]))
    ds = split_chronological(ds, tuple(manifest["ratios"]))
    if ds.split_sizes.to_dict() != manifest["split"]:
        raise HsifError(
            "dataset artifacts are inconsistent: rebuilt split sizes disagree "
            "with dataset_manifest.json; re-run build-dataset"
        )
    hashes = {
        "features.csv": _sha256_file(features_path),
        "labels.csv": _sha256_file(labels_path),
        "dataset_manifest.json": _sha256_file(manifest_path),
    }
    return ds, manifest, hashes


def cmd_train(cfg: PipelineConfig, out_dir: Path) -> Path:
    ds, manifest, input_hashes = _load_dataset(out_dir)
    train_config = TrainConfig(
        hidden_size=cfg.hidden_size,
        num_layers=cfg.num_layers,
        bidirectional=cfg.bidirectional,
        dropout=cfg.dropout,
        learning_rate=cfg.learning_rate,
        beta1=cfg.beta1,
        beta2=cfg.beta2,
        eps=cfg.eps,
        batch_size=cfg.batch_size,
        max_epochs=cfg.max_epochs,
        patience=cfg.patience,
        min_delta=cfg.min_delta,
        shuffle=cfg.shuffle,
    )
    params, report = train(ds, train_config, seed=cfg.seed)

    run_dir = new_run_dir(out_dir, "train")
    save_checkpoint(
        run_dir / "checkpoint.json",
        params,
        scaler=ScalerParams.from_dict(manifest["scaler"]),
        catalog_hash=manifest["catalog_sha256"],
        seed=cfg.seed,
        best_epoch=report.best_epoch,
        config_hash=cfg.content_hash(),
    )
    _write_json(
        run_dir / "train_report.json",
        {
            "format": "hsif-train-report-v1",
            "tool_version": __version__,
            "config_hash": cfg.content_hash(),
            "seed": cfg.seed,
            "network": params.arch.to_dict(),
            "n_parameters": params.n_parameters,
            "train_config": train_config.to_dict(),
            "curves": report.to_dict(),
            "inputs": input_hashes,
        },
    )
    point_latest(run_dir)
    _announce(run_dir)
    return run_dir


def cmd_evaluate(cfg: PipelineConfig, out_dir: Path) -> Path:
    ds, _manifest, input_hashes = _load_dataset(out_dir)
    checkpoint_path = stage_file(out_dir, "train", "checkpoint.json")
    checkpoint = load_checkpoint(checkpoint_path)
    expected = checkpoint.params.arch.input_dim
    if expected != ds.F:
        raise ModelError(
            f"checkpoint expects F={expected} input features "
            f"but the dataset provides F={ds.F}"
        )

    windows = ds.tagged("test")
    if not windows:
        raise HsifError("dataset has no test windows to evaluate")
    probs = predict_proba(checkpoint.params, ds.X("test"))
    preds = (probs[:, 1] >= probs[:, 0]).astype(int)
    labels = ds.y("test")

    pred_out = io.StringIO()
    writer = csv.writer(pred_out, lineterminator="\n")
    writer.writerow(PREDICTIONS_HEADER)
    for window, pred, row in zip(windows, preds.tolist(), probs.tolist()):
        writer.writerow(
            [
                window.anchor_date.isoformat(),
                window.label_date.isoformat(),
                window.label,
                pred,
                repr(row[0]),
                repr(row[1]),
            ]
        )
    predictions_bytes = pred_out.getvalue().encode("utf-8")

    run_dir = new_run_dir(out_dir, "evaluate")
    (run_dir / "predictions.csv").write_bytes(predictions_bytes)
    _write_json(
        run_dir / "metrics.json",
        {
            "format": "hsif-metrics-v1",
            "tool_version": __version__,
            "config_hash": cfg.content_hash(),
            "split": "test",
            "windows": len(windows),
            "metrics": metrics_to_dict(labels, preds, probs[:, 1]),
            "files": {
                "predictions.csv": {
                    "columns": list(PREDICTIONS_HEADER),
                    "rows": len(windows),
                    "sha256": _sha256(predictions_bytes),
                },
            },
            "inputs": {**input_hashes, "checkpoint.json": _sha256_file(checkpoint_path)},
        },
    )
    point_latest(run_dir)
    _announce(run_dir)
    return run_dir


def cmd_backtest(cfg: PipelineConfig, out_dir: Path) -> Path:
    predictions_path = stage_file(out_dir, "evaluate", "predictions.csv")
    candles_path = stage_file(out_dir, "ingest", "candles.csv")

    with predictions_path.open(newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    if not rows or tuple(rows[0]) != PREDICTIONS_HEADER:
        raise HsifError(f"predictions.csv has the wrong header: {rows[0] if rows else []}")
    anchor_dates = [dt.date.fromisoformat(row[0]) for row in rows[1:]]
    predictions = [int(row[3]) for row in rows[1:]]

    series = parse_ohlcv(candles_path.read_bytes())
    close_by_date = {c.date: c.close for c in series}
    try:
        closes = [close_by_date[d] for d in anchor_dates]
    except KeyError as exc:
        raise HsifError(f"no candle for prediction day {exc.args[0]}") from None

    strategy = simulate_trading(
        closes,
        predictions,
        dates=tuple(anchor_dates),
        initial_capital=cfg.initial_capital,
        commission_rate=cfg.commission_rate,
    )
    baseline = buy_and_hold(
        closes, dates=tuple(anchor_dates), initial_capital=cfg.initial_capital
    )
    equity_bytes = write_equity_csv(strategy, baseline)

    run_dir = new_run_dir(out_dir, "backtest")
    (run_dir / "equity.csv").write_bytes(equity_bytes)
    trades = sum(1 for e in strategy.entries if e.action in ("buy", "sell"))
    _write_json(
        run_dir / "backtest.json",
        {
            "format": "hsif-backtest-v1",
            "tool_version": __version__,
            "config_hash": cfg.content_hash(),
            "initial_capital": cfg.initial_capital,
            "commission_rate": cfg.commission_rate,
            "days": len(closes),
            "trades": trades,
            "strategy_final_equity": strategy.final_equity,
            "strategy_total_commission": strategy.total_commission,
            "buyhold_final_equity": baseline.final_equity,
            "files": {
                "equity.csv": {
                    "columns": list(EQUITY_HEADER),
                    "rows": len(closes),
                    "sha256": _sha256(equity_bytes),
                },
            },
            "inputs": {
                "predictions.csv": _sha256_file(predictions_path),
                "candles.csv": _sha256_file(candles_path),
            },
        },
    )
    point_latest(run_dir)
    _announce(run_dir)
    return run_dir


def cmd_report(cfg: PipelineConfig, out_dir: Path) -> Path:
    manifest_path = stage_file(out_dir, "build-dataset", "dataset_manifest.json")
    train_report_path = stage_file(out_dir, "train", "train_report.json")
    metrics_path = stage_file(out_dir, "evaluate", "metrics.json")
    backtest_path = stage_file(out_dir, "backtest", "backtest.json")

    manifest = _read_json(manifest_path, "dataset manifest")
    train_report = _read_json(train_report_path, "train report")
    metrics = _read_json(metrics_path, "metrics file")
    backtest = _read_json(backtest_path, "backtest file")

    curves = train_report["curves"]
    curve_out = io.StringIO()
    writer = csv.writer(curve_out, lineterminator="\n")
    writer.writerow(LOSS_CURVES_HEADER)
    for epoch, (tl, vl, va) in enumerate(
        zip(curves["train_loss"], curves["val_loss"], curves["val_accuracy"])
    ):
        writer.writerow([epoch, repr(tl), repr(vl), repr(va)])
    curves_bytes = curve_out.getvalue().encode("utf-8")

    run_dir = new_run_dir(out_dir, "report")
    (run_dir / "loss_curves.csv").write_bytes(curves_bytes)
    _write_json(
        run_dir / "report.json",
        {
            "format": "hsif-report-v1",
            "tool_version": __version__,
            "config_hash": cfg.content_hash(),
            "dataset": {
                "days": manifest["days"],
                "features": len(manifest["feature_names"]),
                "dropped_columns": len(manifest["dropped_columns"]),
                "window_length": manifest["window_length"],
                "scaling_mode": manifest["scaling_mode"],
                "split": manifest["split"],
            },
            "training": {
                "seed": train_report["seed"],
                "best_epoch": curves["best_epoch"],
                "epochs_run": curves["epochs_run"],
                "stop_reason": curves["stop_reason"],
                "best_val_loss": curves["val_loss"][curves["best_epoch"]],
                "best_val_accuracy": curves["val_accuracy"][curves["best_epoch"]],
            },
            "metrics": metrics["metrics"],
            "backtest": {
                "initial_capital": backtest["initial_capital"],
                "commission_rate": backtest["commission_rate"],
                "days": backtest["days"],
                "trades": backtest["trades"],
                "strategy_final_equity": backtest["strategy_final_equity"],
                "strategy_total_commission": backtest["strategy_total_commission"],
                "buyhold_final_equity": backtest["buyhold_final_equity"],
            },
            "files": {
                "loss_curves.csv": {
                    "columns": list(LOSS_CURVES_HEADER),
                    "rows": curves["epochs_run"],
                    "sha256": _sha256(curves_bytes),
                },
            },
            "inputs": {
                "dataset_manifest.json": _sha256_file(manifest_path),
                "train_report.json": _sha256_file(train_report_path),
                "metrics.json": _sha256_file(metrics_path),
                "backtest.json": _sha256_file(backtest_path),
            },
        },
    )
    point_latest(run_dir)
    _announce(run_dir)
    return run_dir


_STAGE_FUNCS = {
    "ingest": cmd_ingest,
    "build-dataset": cmd_build_dataset,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "backtest": cmd_backtest,
    "report": cmd_report,
}


# --------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="KEY=VALUE config file")
    for name in FIELD_NAMES:
        flag = "--" + name.replace("_", "-")
        common.add_argument(flag, dest=name, metavar="VALUE", help=f"override {name}")

    parser = argparse.ArgumentParser(
        prog="hsif",
        description=(
            "Price-movement prediction pipeline: fuse daily candles, technical "
            "indicators, and tweet sentiment into windowed datasets, train a "
            "recurrent classifier, and backtest its signals."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for stage in STAGES:
        sub.add_parser(stage, parents=[common], help=f"run the {stage} stage")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        overrides = {}
        for name in FIELD_NAMES:
            raw = getattr(args, name)
            if raw is not None:
                overrides[name] = parse_value(name, raw)
        cfg = resolve_config(args.config, env=dict(os.environ), overrides=overrides)
        out_dir = Path(cfg.out_dir)
        _STAGE_FUNCS[args.command](cfg, out_dir)
    except (ConfigError, PrerequisiteError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except HsifError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
