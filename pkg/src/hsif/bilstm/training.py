"""Mini-batch training with early stopping on validation loss.

Batches run in chronological order by default (no shuffling) so a fixed
(seed, data, config) triple reproduces the trained parameters byte for byte;
an optional shuffle flag exists for experiments. Early stopping restores the
parameters of the best validation epoch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ModelError
from ..fusion import WindowedDataset
from .adam import adam_step, init_optimizer
from .network import backward_batch, batch_loss, forward_batch
from .params import ArchitectureSpec, NetworkParams, clone_params, init_params


@dataclass(frozen=True)
class TrainConfig:
    hidden_size: int = 64
    num_layers: int = 2
    bidirectional: bool = True
    dropout: float = 0.20
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 16
    max_epochs: int = 200
    patience: int = 20
    min_delta: float = 1e-4
    shuffle: bool = False
    eval_batch_size: int = 256

    def __post_init__(self) -> None:
        if self.batch_size < 1 or self.max_epochs < 1 or self.patience < 1:
            raise ModelError("batch_size, max_epochs and patience must be >= 1")
        if self.min_delta < 0:
            raise ModelError(f"min_delta must be >= 0, got {self.min_delta}")

    def to_dict(self) -> dict:
        return {
            "hidden_size": self.hidden_size,
            "num_layers": self.num_layers,
            "bidirectional": self.bidirectional,
            "dropout": self.dropout,
            "learning_rate": self.learning_rate,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "eps": self.eps,
            "batch_size": self.batch_size,
            "max_epochs": self.max_epochs,
            "patience": self.patience,
            "min_delta": self.min_delta,
            "shuffle": self.shuffle,
        }


@dataclass(frozen=True)
class TrainReport:
    train_loss: tuple[float, ...]
    val_loss: tuple[float, ...]
    val_accuracy: tuple[float, ...]
    best_epoch: int
    stop_reason: str  # "patience" | "max epochs"

    def __post_init__(self) -> None:
        n = len(self.train_loss)
        if len(self.val_loss) != n or len(self.val_accuracy) != n:
            raise ModelError("report curves disagree on epochs run")
        if not (0 <= self.best_epoch < n):
            raise ModelError(f"best epoch {self.best_epoch} outside 0..{n - 1}")

    @property
    def epochs_run(self) -> int:
        return len(self.train_loss)

    def to_dict(self) -> dict:
        return {
            "train_loss": list(self.train_loss),
            "val_loss": list(self.val_loss),
            "val_accuracy": list(self.val_accuracy),
            "best_epoch": self.best_epoch,
            "stop_reason": self.stop_reason,
            "epochs_run": self.epochs_run,
        }


def eval_probs(params: NetworkParams, windows: np.ndarray, batch_size: int = 256) -> np.ndarray:
    """Eval-mode probabilities in deterministic chunks (training-loop path)."""
    chunks = [
        forward_batch(params, windows[i : i + batch_size], train_mode=False)[0]
        for i in range(0, len(windows), batch_size)
    ]
    return np.concatenate(chunks)


def train(
    ds: WindowedDataset, config: TrainConfig = TrainConfig(), seed: int = 0
) -> tuple[NetworkParams, TrainReport]:
    """Fit on the train split, early-stop on the validation split."""
    if not ds.tagged("train"):
        raise ModelError("empty train split")
    if not ds.tagged("validation"):
        raise ModelError("empty validation split")
    x_train, y_train = ds.X("train"), ds.y("train")
    x_val, y_val = ds.X("validation"), ds.y("validation")

    arch = ArchitectureSpec(
        input_dim=ds.F,
        hidden_size=config.hidden_size,
        num_layers=config.num_layers,
        bidirectional=config.bidirectional,
        dropout=config.dropout,
    )
    root = np.random.SeedSequence(seed)
    init_ss, dropout_ss, shuffle_ss = root.spawn(3)
    params = init_params(arch, init_ss)
    dropout_rng = np.random.default_rng(dropout_ss)
    shuffle_rng = np.random.default_rng(shuffle_ss)
    state = init_optimizer(
        params, config.learning_rate, config.beta1, config.beta2, config.eps
    )

    n = len(y_train)
    train_curve: list[float] = []
    val_curve: list[float] = []
    acc_curve: list[float] = []
    best_val = math.inf
    best_epoch = 0
    best_params = clone_params(params)
    stale = 0
    stop_reason = "max epochs"

    for epoch in range(config.max_epochs):
        order = shuffle_rng.permutation(n) if config.shuffle else np.arange(n)
        epoch_total = 0.0
        for batch_index, start in enumerate(range(0, n, config.batch_size)):
            idx = order[start : start + config.batch_size]
            probs, cache = forward_batch(params, x_train[idx], True, dropout_rng)
            value = batch_loss(probs, y_train[idx])
            if not math.isfinite(value):
                raise ModelError(f"non-finite loss at epoch {epoch}, batch {batch_index}")
            grads = backward_batch(params, cache, y_train[idx])
            params, state = adam_step(params, grads, state)
            epoch_total += value * len(idx)
        train_curve.append(epoch_total / n)

        probs_val = eval_probs(params, x_val, config.eval_batch_size)
        val_value = batch_loss(probs_val, y_val)
        if not math.isfinite(val_value):
            raise ModelError(f"non-finite loss at epoch {epoch}, validation")
        predicted = (probs_val[:, 1] >= probs_val[:, 0]).astype(np.int64)
        val_curve.append(val_value)
        acc_curve.append(float((predicted == y_val).mean()))

        if best_val - val_value >= config.min_delta:
            best_val = val_value
            best_epoch = epoch
            best_params = clone_params(params)
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                stop_reason = "patience"
                break

    report = TrainReport(
        train_loss=tuple(train_curve),
        val_loss=tuple(val_curve),
        val_accuracy=tuple(acc_curve),
        best_epoch=best_epoch,
        stop_reason=stop_reason,
    )
    return best_params, report
