"""Parameter containers and deterministic initialization.

Each direction of each recurrent layer stores its four gates fused along the
last axis in the fixed order input, forget, cell, output — so ``wx`` is
(input_dim, 4·hidden), ``wh`` is (hidden, 4·hidden) and ``b`` is (4·hidden,).
Initialization draws each per-gate block separately (uniform in
±sqrt(6/(fan_in+fan_out))) so the fused layout is purely an implementation
detail; the per-gate views are recoverable by slicing.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..errors import ModelError

GATE_NAMES = ("input", "forget", "cell", "output")
N_CLASSES = 2


@dataclass(frozen=True)
class ArchitectureSpec:
    input_dim: int
    hidden_size: int = 64
    num_layers: int = 2
    bidirectional: bool = True
    dropout: float = 0.20

    def __post_init__(self) -> None:
        for name in ("input_dim", "hidden_size", "num_layers"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ModelError(f"{name} must be a positive integer, got {value!r}")
        if not (0.0 <= self.dropout < 1.0):
            raise ModelError(f"dropout must be < 1 and >= 0, got {self.dropout}")

    def layer_input_dim(self, layer: int) -> int:
        if layer == 0:
            return self.input_dim
        return self.hidden_size * (2 if self.bidirectional else 1)

    @property
    def dense_input_dim(self) -> int:
        return self.hidden_size * (2 if self.bidirectional else 1)

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "hidden_size": self.hidden_size,
            "num_layers": self.num_layers,
            "bidirectional": self.bidirectional,
            "dropout": self.dropout,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ArchitectureSpec":
        return cls(
            input_dim=data["input_dim"],
            hidden_size=data["hidden_size"],
            num_layers=data["num_layers"],
            bidirectional=data["bidirectional"],
            dropout=data["dropout"],
        )


@dataclass(frozen=True)
class DirectionParams:
    wx: np.ndarray  # (input_dim, 4*hidden)
    wh: np.ndarray  # (hidden, 4*hidden)
    b: np.ndarray  # (4*hidden,)

    def __post_init__(self) -> None:
        hidden = self.wh.shape[0]
        if self.wx.ndim != 2 or self.wx.shape[1] != 4 * hidden:
            raise ModelError(f"wx shape {self.wx.shape} inconsistent with hidden {hidden}")
        if self.wh.shape != (hidden, 4 * hidden):
            raise ModelError(f"wh shape {self.wh.shape} is not square-by-4")
        if self.b.shape != (4 * hidden,):
            raise ModelError(f"bias shape {self.b.shape} inconsistent with hidden {hidden}")
        for name in ("wx", "wh", "b"):
            if not np.isfinite(getattr(self, name)).all():
                raise ModelError(f"non-finite entries in {name}")

    @property
    def hidden(self) -> int:
        return self.wh.shape[0]

    def gate(self, name: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-gate (wx, wh, b) view for one of input/forget/cell/output."""
        idx = GATE_NAMES.index(name)
        h = self.hidden
        s = slice(idx * h, (idx + 1) * h)
        return self.wx[:, s], self.wh[:, s], self.b[s]


@dataclass(frozen=True)
class LayerParams:
    fwd: DirectionParams
    bwd: DirectionParams | None  # None for a unidirectional layer

    @property
    def output_dim(self) -> int:
        return self.fwd.hidden * (2 if self.bwd is not None else 1)


@dataclass(frozen=True)
class NetworkParams:
    arch: ArchitectureSpec
    layers: tuple[LayerParams, ...]
    dense_w: np.ndarray  # (dense_input_dim, 2)
    dense_b: np.ndarray  # (2,)

    def __post_init__(self) -> None:
        if len(self.layers) != self.arch.num_layers:
            raise ModelError(
                f"expected {self.arch.num_layers} layers, got {len(self.layers)}"
            )
        for i, layer in enumerate(self.layers):
            expected_in = self.arch.layer_input_dim(i)
            if layer.fwd.wx.shape[0] != expected_in:
                raise ModelError(
                    f"layer {i} input dim {layer.fwd.wx.shape[0]} != expected {expected_in}"
                )
            if layer.fwd.hidden != self.arch.hidden_size:
                raise ModelError(f"layer {i} hidden {layer.fwd.hidden} != arch")
            if (layer.bwd is not None) != self.arch.bidirectional:
                raise ModelError(f"layer {i} directionality disagrees with arch")
        expected = (self.arch.dense_input_dim, N_CLASSES)
        if self.dense_w.shape != expected:
            raise ModelError(f"dense weights {self.dense_w.shape} != expected {expected}")
        if self.dense_b.shape != (N_CLASSES,):
            raise ModelError(f"dense bias shape {self.dense_b.shape}")

    def flat(self) -> dict[str, np.ndarray]:
        """Stable name -> array view of every trainable tensor."""
        out: dict[str, np.ndarray] = {}
        for i, layer in enumerate(self.layers):
            out[f"layer{i}.fwd.wx"] = layer.fwd.wx
            out[f"layer{i}.fwd.wh"] = layer.fwd.wh
            out[f"layer{i}.fwd.b"] = layer.fwd.b
            if layer.bwd is not None:
                out[f"layer{i}.bwd.wx"] = layer.bwd.wx
                out[f"layer{i}.bwd.wh"] = layer.bwd.wh
                out[f"layer{i}.bwd.b"] = layer.bwd.b
        out["dense.w"] = self.dense_w
        out["dense.b"] = self.dense_b
        return out

    @classmethod
    def from_flat(cls, arch: ArchitectureSpec, flat: dict[str, np.ndarray]) -> "NetworkParams":
        layers = []
        for i in range(arch.num_layers):
            fwd = DirectionParams(
                flat[f"layer{i}.fwd.wx"], flat[f"layer{i}.fwd.wh"], flat[f"layer{i}.fwd.b"]
            )
            bwd = None
            if arch.bidirectional:
                bwd = DirectionParams(
                    flat[f"layer{i}.bwd.wx"], flat[f"layer{i}.bwd.wh"], flat[f"layer{i}.bwd.b"]
                )
            layers.append(LayerParams(fwd, bwd))
        return cls(arch, tuple(layers), flat["dense.w"], flat["dense.b"])

    def to_vector(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.flat().values()])

    def from_vector(self, vector: np.ndarray) -> "NetworkParams":
        if vector.size != self.n_parameters:
            raise ModelError(
                f"vector length {vector.size} != parameter count {self.n_parameters}"
            )
        flat = {}
        offset = 0
        for name, a in self.flat().items():
            flat[name] = vector[offset : offset + a.size].reshape(a.shape).copy()
            offset += a.size
        return NetworkParams.from_flat(self.arch, flat)

    @property
    def n_parameters(self) -> int:
        return sum(a.size for a in self.flat().values())


def _xavier(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def _init_direction(rng: np.random.Generator, input_dim: int, hidden: int) -> DirectionParams:
    wx = np.concatenate([_xavier(rng, input_dim, hidden) for _ in GATE_NAMES], axis=1)
    wh = np.concatenate([_xavier(rng, hidden, hidden) for _ in GATE_NAMES], axis=1)
    b = np.zeros(4 * hidden)
    b[hidden : 2 * hidden] = 1.0  # forget gate starts open
    return DirectionParams(wx, wh, b)


def init_params(
    arch: ArchitectureSpec, seed: int | np.random.SeedSequence
) -> NetworkParams:
    """Draw a fresh parameter set; identical seeds give identical bytes."""
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    rng = np.random.default_rng(seed)
    layers = []
    for i in range(arch.num_layers):
        input_dim = arch.layer_input_dim(i)
        fwd = _init_direction(rng, input_dim, arch.hidden_size)
        bwd = _init_direction(rng, input_dim, arch.hidden_size) if arch.bidirectional else None
        layers.append(LayerParams(fwd, bwd))
    dense_w = _xavier(rng, arch.dense_input_dim, N_CLASSES)
    dense_b = np.zeros(N_CLASSES)
    return NetworkParams(arch, tuple(layers), dense_w, dense_b)


def zero_params(arch: ArchitectureSpec) -> NetworkParams:
    """Every weight and bias zero — handy for symmetry checks."""
    params = init_params(arch, 0)
    flat = {name: np.zeros_like(a) for name, a in params.flat().items()}
    return NetworkParams.from_flat(arch, flat)


def clone_params(params: NetworkParams) -> NetworkParams:
    flat = {name: a.copy() for name, a in params.flat().items()}
    return NetworkParams.from_flat(params.arch, flat)


def params_equal(a: NetworkParams, b: NetworkParams) -> bool:
    if a.arch != b.arch:
        return False
    fa, fb = a.flat(), b.flat()
    return fa.keys() == fb.keys() and all(np.array_equal(fa[k], fb[k]) for k in fa)


def replace_arch(params: NetworkParams, **changes) -> NetworkParams:
    return NetworkParams(
        replace(params.arch, **changes), params.layers, params.dense_w, params.dense_b
    )
