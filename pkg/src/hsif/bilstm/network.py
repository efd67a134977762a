"""Forward pass, cross-entropy loss, and exact backpropagation through time.

Internally everything runs batched with time as the leading axis: a batch of
windows (B, T, F) becomes (T, B, F). The backward direction is the same cell
recurrence run over the time-reversed sequence, so both directions share one
implementation and the bidirectional layer output at time t concatenates the
forward state after steps 0..t with the backward state after steps T-1..t.

The classifier head takes k = the final hidden state of each direction of the
last recurrent layer (forward at t = T-1, backward at t = 0), after that
layer's dropout, and feeds it through a dense (2H -> 2) + softmax.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ModelError
from .params import DirectionParams, NetworkParams

PROB_FLOOR = 1e-12


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass
class DirectionCache:
    x_seq: np.ndarray  # (T, B, F_in) in this direction's processing order
    i: np.ndarray  # gate activations, each (T, B, H)
    f: np.ndarray
    g: np.ndarray
    o: np.ndarray
    c: np.ndarray  # cell states
    tc: np.ndarray  # tanh(c)
    h: np.ndarray  # hidden states


@dataclass
class LayerCache:
    fwd: DirectionCache
    bwd: DirectionCache | None
    mask: np.ndarray | None  # inverted-dropout mask on this layer's output


@dataclass
class ForwardCache:
    layers: list[LayerCache]
    k: np.ndarray  # (B, dense_input_dim)
    probs: np.ndarray  # (B, 2)
    train_mode: bool


def _direction_forward(p: DirectionParams, x_seq: np.ndarray) -> DirectionCache:
    steps, batch, _ = x_seq.shape
    hid = p.hidden
    shape = (steps, batch, hid)
    i_s, f_s, g_s, o_s = np.empty(shape), np.empty(shape), np.empty(shape), np.empty(shape)
    c_s, tc_s, h_s = np.empty(shape), np.empty(shape), np.empty(shape)
    h = np.zeros((batch, hid))
    c = np.zeros((batch, hid))
    for s in range(steps):
        z = x_seq[s] @ p.wx + h @ p.wh + p.b
        i = _sigmoid(z[:, :hid])
        f = _sigmoid(z[:, hid : 2 * hid])
        g = np.tanh(z[:, 2 * hid : 3 * hid])
        o = _sigmoid(z[:, 3 * hid :])
        c = f * c + i * g
        tc = np.tanh(c)
        h = o * tc
        i_s[s], f_s[s], g_s[s], o_s[s] = i, f, g, o
        c_s[s], tc_s[s], h_s[s] = c, tc, h
    return DirectionCache(x_seq, i_s, f_s, g_s, o_s, c_s, tc_s, h_s)


def _direction_backward(
    p: DirectionParams, cache: DirectionCache, d_h_seq: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Gradients for one direction; d_h_seq is in processing order."""
    steps, batch, hid = cache.h.shape
    d_wx = np.zeros_like(p.wx)
    d_wh = np.zeros_like(p.wh)
    d_b = np.zeros_like(p.b)
    d_x = np.empty_like(cache.x_seq)
    d_h_carry = np.zeros((batch, hid))
    d_c_carry = np.zeros((batch, hid))
    zeros = np.zeros((batch, hid))
    for s in reversed(range(steps)):
        i, f, g, o = cache.i[s], cache.f[s], cache.g[s], cache.o[s]
        tc = cache.tc[s]
        c_prev = cache.c[s - 1] if s > 0 else zeros
        h_prev = cache.h[s - 1] if s > 0 else zeros

        d_h = d_h_seq[s] + d_h_carry
        d_o = d_h * tc
        d_c = d_h * o * (1.0 - tc * tc) + d_c_carry
        d_i = d_c * g
        d_g = d_c * i
        d_f = d_c * c_prev
        d_c_carry = d_c * f

        d_z = np.concatenate(
            [
                d_i * i * (1.0 - i),
                d_f * f * (1.0 - f),
                d_g * (1.0 - g * g),
                d_o * o * (1.0 - o),
            ],
            axis=1,
        )
        d_wx += cache.x_seq[s].T @ d_z
        d_wh += h_prev.T @ d_z
        d_b += d_z.sum(axis=0)
        d_h_carry = d_z @ p.wh.T
        d_x[s] = d_z @ p.wx.T
    return d_wx, d_wh, d_b, d_x


def _check_finite_output(out: np.ndarray, layer_index: int) -> None:
    if np.isfinite(out).all():
        return
    bad_t = int(np.argwhere(~np.isfinite(out).all(axis=(1, 2)))[0, 0])
    raise ModelError(f"non-finite activation at layer {layer_index}, timestep {bad_t}")


def forward_batch(
    params: NetworkParams,
    windows: np.ndarray,
    train_mode: bool,
    dropout_rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, ForwardCache]:
    """Batched forward over (B, T, F); returns probabilities (B, 2) and cache."""
    windows = np.asarray(windows, dtype=np.float64)
    if windows.ndim != 3:
        raise ModelError(f"expected a (batch, T, F) array, got shape {windows.shape}")
    batch, steps, n_features = windows.shape
    if n_features != params.arch.input_dim:
        raise ModelError(
            f"window has {n_features} features but network expects {params.arch.input_dim}"
        )
    if steps < 1:
        raise ModelError("window must have at least one timestep")
    if train_mode and params.arch.dropout > 0.0 and dropout_rng is None:
        raise ModelError("train-mode forward with dropout needs a seeded generator")

    x = np.ascontiguousarray(windows.transpose(1, 0, 2))  # (T, B, F)
    hid = params.arch.hidden_size
    drop = params.arch.dropout
    layer_caches: list[LayerCache] = []
    for idx, layer in enumerate(params.layers):
        fwd_cache = _direction_forward(layer.fwd, x)
        if layer.bwd is not None:
            bwd_cache = _direction_forward(layer.bwd, x[::-1])
            out = np.concatenate([fwd_cache.h, bwd_cache.h[::-1]], axis=2)
        else:
            bwd_cache = None
            out = fwd_cache.h
        _check_finite_output(out, idx)
        mask = None
        if train_mode and drop > 0.0:
            keep = 1.0 - drop
            mask = (dropout_rng.random(out.shape) < keep) / keep
            out = out * mask
        layer_caches.append(LayerCache(fwd_cache, bwd_cache, mask))
        x = out

    if params.layers[-1].bwd is not None:
        k = np.concatenate([x[-1, :, :hid], x[0, :, hid:]], axis=1)
    else:
        k = x[-1]
    logits = k @ params.dense_w + params.dense_b
    if not np.isfinite(logits).all():
        raise ModelError("non-finite activation at dense layer")
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    probs = exp / exp.sum(axis=1, keepdims=True)
    return probs, ForwardCache(layer_caches, k, probs, train_mode)


def forward(
    params: NetworkParams,
    window: np.ndarray,
    mode: str = "eval",
    seed: int | None = None,
) -> tuple[np.ndarray, ForwardCache]:
    """Single-window forward; returns (probabilities length-2, cache)."""
    if mode not in ("train", "eval"):
        raise ModelError(f"mode must be 'train' or 'eval', got {mode!r}")
    window = np.asarray(window, dtype=np.float64)
    if window.ndim != 2:
        raise ModelError(f"expected a (T, F) window, got shape {window.shape}")
    rng = None
    if mode == "train" and params.arch.dropout > 0.0:
        rng = np.random.default_rng(np.random.SeedSequence(0 if seed is None else seed))
    probs, cache = forward_batch(params, window[None], mode == "train", rng)
    return probs[0], cache


def loss(probabilities: np.ndarray, label: int) -> float:
    """Cross entropy −log p_label, floored at 1e-12."""
    probabilities = np.asarray(probabilities, dtype=np.float64)
    if probabilities.shape != (2,):
        raise ModelError(f"expected 2 class probabilities, got shape {probabilities.shape}")
    if label not in (0, 1):
        raise ModelError(f"label must be 0 or 1, got {label!r}")
    return float(-np.log(max(probabilities[label], PROB_FLOOR)))


def batch_loss(probs: np.ndarray, labels: np.ndarray) -> float:
    """Mean cross entropy over a batch."""
    picked = np.maximum(probs[np.arange(len(labels)), labels], PROB_FLOOR)
    return float(-np.log(picked).mean())


def backward_batch(
    params: NetworkParams,
    cache: ForwardCache,
    labels: np.ndarray,
    grad_scale: float = 1.0,
) -> dict[str, np.ndarray]:
    """Exact gradients of the mean batch loss, shaped like ``params.flat()``."""
    labels = np.asarray(labels)
    batch = cache.probs.shape[0]
    if labels.shape != (batch,):
        raise ModelError(f"expected {batch} labels, got shape {labels.shape}")
    if not np.isin(labels, (0, 1)).all():
        raise ModelError("labels must be 0 or 1")
    hid = params.arch.hidden_size
    grads: dict[str, np.ndarray] = {}

    d_logits = cache.probs.copy()
    d_logits[np.arange(batch), labels] -= 1.0
    d_logits *= grad_scale / batch
    grads["dense.w"] = cache.k.T @ d_logits
    grads["dense.b"] = d_logits.sum(axis=0)
    d_k = d_logits @ params.dense_w.T

    last = params.layers[-1]
    steps = cache.layers[0].fwd.h.shape[0]
    d_out = np.zeros((steps, batch, last.output_dim))
    if last.bwd is not None:
        d_out[-1, :, :hid] += d_k[:, :hid]
        d_out[0, :, hid:] += d_k[:, hid:]
    else:
        d_out[-1] += d_k

    for idx in range(len(params.layers) - 1, -1, -1):
        layer = params.layers[idx]
        layer_cache = cache.layers[idx]
        if layer_cache.mask is not None:
            d_out = d_out * layer_cache.mask
        if layer.bwd is not None:
            d_wx_f, d_wh_f, d_b_f, d_x_f = _direction_backward(
                layer.fwd, layer_cache.fwd, d_out[:, :, :hid]
            )
            d_wx_b, d_wh_b, d_b_b, d_x_b = _direction_backward(
                layer.bwd, layer_cache.bwd, d_out[::-1, :, hid:]
            )
            grads[f"layer{idx}.bwd.wx"] = d_wx_b
            grads[f"layer{idx}.bwd.wh"] = d_wh_b
            grads[f"layer{idx}.bwd.b"] = d_b_b
            d_out = d_x_f + d_x_b[::-1]
        else:
            d_wx_f, d_wh_f, d_b_f, d_x_f = _direction_backward(
                layer.fwd, layer_cache.fwd, d_out
            )
            d_out = d_x_f
        grads[f"layer{idx}.fwd.wx"] = d_wx_f
        grads[f"layer{idx}.fwd.wh"] = d_wh_f
        grads[f"layer{idx}.fwd.b"] = d_b_f

    return {name: grads[name] for name in params.flat()}


def backward(
    params: NetworkParams,
    cache: ForwardCache,
    label: int,
    grad_scale: float = 1.0,
) -> dict[str, np.ndarray]:
    """Gradients of the single-window loss for a cache built by ``forward``."""
    if cache is None:
        raise ModelError("missing forward cache")
    if cache.probs.shape[0] != 1:
        raise ModelError("cache was built for a batch; use backward_batch")
    return backward_batch(params, cache, np.array([label]), grad_scale)


def predict_proba(params: NetworkParams, windows) -> np.ndarray:
    """Eval-mode probabilities per window; a plain map of single-window forward."""
    windows = np.asarray(windows, dtype=np.float64)
    if windows.ndim == 2:
        windows = windows[None]
    if windows.ndim != 3:
        raise ModelError(f"expected (N, T, F) windows, got shape {windows.shape}")
    return np.stack([forward(params, w, "eval")[0] for w in windows])


def predict_labels(params: NetworkParams, windows) -> np.ndarray:
    """Argmax labels; a tie between the classes resolves to 1."""
    probs = predict_proba(params, windows)
    return (probs[:, 1] >= probs[:, 0]).astype(np.int64)
