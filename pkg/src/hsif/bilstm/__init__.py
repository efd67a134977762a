"""From-scratch bidirectional LSTM classifier on numpy.

Split across small modules: parameter containers and initialization
(``params``), the forward/backward passes (``network``), the optimizer
(``adam``), the training loop (``training``), and checkpoint I/O
(``checkpoint``). Everything runs in 64-bit floats and is deterministic
given (seed, data, config).
"""

from .adam import OptimizerState, adam_step, init_optimizer
from .checkpoint import CheckpointData, checkpoint_to_dict, load_checkpoint, save_checkpoint
from .network import backward, forward, loss, predict_labels, predict_proba
from .params import (
    ArchitectureSpec,
    DirectionParams,
    LayerParams,
    NetworkParams,
    init_params,
    zero_params,
)
from .training import TrainConfig, TrainReport, train

__all__ = [
    "ArchitectureSpec",
    "CheckpointData",
    "DirectionParams",
    "LayerParams",
    "NetworkParams",
    "OptimizerState",
    "TrainConfig",
    "TrainReport",
    "adam_step",
    "backward",
    "checkpoint_to_dict",
    "forward",
    "init_optimizer",
    "init_params",
    "load_checkpoint",
    "loss",
    "predict_labels",
    "predict_proba",
    "save_checkpoint",
    "train",
    "zero_params",
]
