"""Versioned JSON checkpoints.

Weights are stored per gate (input/forget/cell/output, each with its
input-to-hidden matrix, hidden-to-hidden matrix and bias) in row-major nested
lists, so the file is readable without knowing the fused in-memory layout.
Loading validates the format tag and every array shape before building
parameters.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import CheckpointError
from ..fusion import ScalerParams
from .adam import OptimizerState
from .params import (
    GATE_NAMES,
    ArchitectureSpec,
    DirectionParams,
    LayerParams,
    NetworkParams,
)

CHECKPOINT_FORMAT = "hsif-checkpoint-v1"


@dataclass
class CheckpointData:
    params: NetworkParams
    optimizer: OptimizerState | None
    scaler: ScalerParams | None
    catalog_hash: str | None
    seed: int | None
    best_epoch: int | None
    config_hash: str | None


def _direction_to_dict(p: DirectionParams) -> dict:
    out = {}
    for gate in GATE_NAMES:
        wx, wh, b = p.gate(gate)
        out[gate] = {"wx": wx.tolist(), "wh": wh.tolist(), "b": b.tolist()}
    return out


def _array(data, shape: tuple[int, ...], where: str) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.shape != shape:
        raise CheckpointError(f"{where} has shape {arr.shape}, expected {shape}")
    return arr


def _direction_from_dict(data: dict, input_dim: int, hidden: int, where: str) -> DirectionParams:
    wx_parts, wh_parts, b_parts = [], [], []
    for gate in GATE_NAMES:
        if gate not in data:
            raise CheckpointError(f"{where} missing gate {gate!r}")
        block = data[gate]
        wx_parts.append(_array(block["wx"], (input_dim, hidden), f"{where}.{gate}.wx"))
        wh_parts.append(_array(block["wh"], (hidden, hidden), f"{where}.{gate}.wh"))
        b_parts.append(_array(block["b"], (hidden,), f"{where}.{gate}.b"))
    return DirectionParams(
        np.concatenate(wx_parts, axis=1),
        np.concatenate(wh_parts, axis=1),
        np.concatenate(b_parts),
    )


def checkpoint_to_dict(
    params: NetworkParams,
    optimizer: OptimizerState | None = None,
    scaler: ScalerParams | None = None,
    catalog_hash: str | None = None,
    seed: int | None = None,
    best_epoch: int | None = None,
    config_hash: str | None = None,
) -> dict:
    layers = []
    for layer in params.layers:
        layers.append(
            {
                "fwd": _direction_to_dict(layer.fwd),
                "bwd": _direction_to_dict(layer.bwd) if layer.bwd is not None else None,
            }
        )
    optimizer_dict = None
    if optimizer is not None:
        optimizer_dict = {
            "step": optimizer.step,
            "learning_rate": optimizer.learning_rate,
            "beta1": optimizer.beta1,
            "beta2": optimizer.beta2,
            "eps": optimizer.eps,
            "m": {name: a.tolist() for name, a in optimizer.m.items()},
            "v": {name: a.tolist() for name, a in optimizer.v.items()},
        }
    return {
        "format": CHECKPOINT_FORMAT,
        "architecture": params.arch.to_dict(),
        "weights": {
            "layers": layers,
            "dense_w": params.dense_w.tolist(),
            "dense_b": params.dense_b.tolist(),
        },
        "optimizer": optimizer_dict,
        "scaler": scaler.to_dict() if scaler is not None else None,
        "catalog_hash": catalog_hash,
        "seed": seed,
        "best_epoch": best_epoch,
        "config_hash": config_hash,
    }


def save_checkpoint(path: str | Path, *args, **kwargs) -> None:
    data = checkpoint_to_dict(*args, **kwargs)
    Path(path).write_text(json.dumps(data, indent=1) + "\n", encoding="utf-8")


def checkpoint_from_dict(data: dict) -> CheckpointData:
    if not isinstance(data, dict) or data.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(
            f"unsupported checkpoint format {data.get('format') if isinstance(data, dict) else data!r};"
            f" expected {CHECKPOINT_FORMAT!r}"
        )
    for key in ("architecture", "weights"):
        if key not in data:
            raise CheckpointError(f"checkpoint missing field {key!r}")
    try:
        arch = ArchitectureSpec.from_dict(data["architecture"])
    except KeyError as exc:
        raise CheckpointError(f"architecture missing field {exc.args[0]!r}") from None

    weights = data["weights"]
    layer_dicts = weights.get("layers")
    if not isinstance(layer_dicts, list) or len(layer_dicts) != arch.num_layers:
        raise CheckpointError(
            f"expected {arch.num_layers} weight layers, got "
            f"{len(layer_dicts) if isinstance(layer_dicts, list) else layer_dicts!r}"
        )
    layers = []
    for i, layer_dict in enumerate(layer_dicts):
        input_dim = arch.layer_input_dim(i)
        fwd = _direction_from_dict(
            layer_dict["fwd"], input_dim, arch.hidden_size, f"layer {i} fwd"
        )
        bwd = None
        if arch.bidirectional:
            if layer_dict.get("bwd") is None:
                raise CheckpointError(f"layer {i} missing backward direction")
            bwd = _direction_from_dict(
                layer_dict["bwd"], input_dim, arch.hidden_size, f"layer {i} bwd"
            )
        layers.append(LayerParams(fwd, bwd))
    dense_w = _array(weights["dense_w"], (arch.dense_input_dim, 2), "dense_w")
    dense_b = _array(weights["dense_b"], (2,), "dense_b")
    params = NetworkParams(arch, tuple(layers), dense_w, dense_b)

    optimizer = None
    opt = data.get("optimizer")
    if opt is not None:
        shapes = {name: a.shape for name, a in params.flat().items()}
        if set(opt["m"]) != set(shapes) or set(opt["v"]) != set(shapes):
            raise CheckpointError("optimizer accumulators do not match parameter names")
        optimizer = OptimizerState(
            m={name: _array(opt["m"][name], shapes[name], f"m[{name}]") for name in shapes},
            v={name: _array(opt["v"][name], shapes[name], f"v[{name}]") for name in shapes},
            step=opt["step"],
            learning_rate=opt["learning_rate"],
            beta1=opt["beta1"],
            beta2=opt["beta2"],
            eps=opt["eps"],
        )
    scaler = None
    if data.get("scaler") is not None:
        scaler = ScalerParams.from_dict(data["scaler"])
    return CheckpointData(
        params=params,
        optimizer=optimizer,
        scaler=scaler,
        catalog_hash=data.get("catalog_hash"),
        seed=data.get("seed"),
        best_epoch=data.get("best_epoch"),
        config_hash=data.get("config_hash"),
    )


def load_checkpoint(path: str | Path) -> CheckpointData:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"corrupt checkpoint: {exc}") from None
    try:
        return checkpoint_from_dict(data)
    except (KeyError, TypeError) as exc:
        raise CheckpointError(f"malformed checkpoint: {exc!r}") from None
