"""Functional Adam with bias correction.

``adam_step`` never mutates its inputs: it returns fresh parameters and a
fresh state, which keeps snapshots for early stopping trivially safe.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ModelError
from .params import NetworkParams


@dataclass(frozen=True)
class OptimizerState:
    m: dict[str, np.ndarray]  # first-moment accumulators, keyed like params.flat()
    v: dict[str, np.ndarray]  # second-moment accumulators
    step: int = 0
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self) -> None:
        if self.step < 0:
            raise ModelError(f"step must be >= 0, got {self.step}")
        if self.m.keys() != self.v.keys():
            raise ModelError("moment accumulators disagree on parameter names")


def init_optimizer(
    params: NetworkParams,
    learning_rate: float = 0.001,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> OptimizerState:
    zeros = {name: np.zeros_like(a) for name, a in params.flat().items()}
    return OptimizerState(
        m=zeros,
        v={name: a.copy() for name, a in zeros.items()},
        step=0,
        learning_rate=learning_rate,
        beta1=beta1,
        beta2=beta2,
        eps=eps,
    )


def adam_step(
    params: NetworkParams,
    grads: dict[str, np.ndarray],
    state: OptimizerState,
) -> tuple[NetworkParams, OptimizerState]:
    flat = params.flat()
    if grads.keys() != flat.keys():
        missing = sorted(set(flat) ^ set(grads))
        raise ModelError(f"gradient names do not match parameters: {missing}")
    t = state.step + 1
    b1, b2 = state.beta1, state.beta2
    bias1 = 1.0 - b1**t
    bias2 = 1.0 - b2**t
    new_flat: dict[str, np.ndarray] = {}
    new_m: dict[str, np.ndarray] = {}
    new_v: dict[str, np.ndarray] = {}
    for name, p in flat.items():
        g = grads[name]
        if g.shape != p.shape:
            raise ModelError(f"gradient {name} has shape {g.shape}, expected {p.shape}")
        m = b1 * state.m[name] + (1.0 - b1) * g
        v = b2 * state.v[name] + (1.0 - b2) * g * g
        m_hat = m / bias1
        v_hat = v / bias2
        new_flat[name] = p - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps)
        new_m[name] = m
        new_v[name] = v
    new_params = NetworkParams.from_flat(params.arch, new_flat)
    new_state = OptimizerState(
        m=new_m,
        v=new_v,
        step=t,
        learning_rate=state.learning_rate,
        beta1=state.beta1,
        beta2=state.beta2,
        eps=state.eps,
    )
    return new_params, new_state
