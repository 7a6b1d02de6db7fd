"""
Stage 1: the TrajNet encoder/decoder, its training loop, zero-shot action
readout and checkpoints.
"""

from .checkpoint import COMPONENT, TrajNetBundle, check_compatible, load_trajnet, save_trajnet
from .config import DEFAULT_WINDOWS, TrajNetConfig
from .model import (
    TrajNet, batch_loss, decode, decode_window, encode, forward_batch, init_params, reconstruction_loss,
    zero_shot_actions,
)
from .trainer import TrainResult, epoch_indices, evaluate_loss, train_trajnet, validation_batch

__all__ = [
    # Configuration
    "DEFAULT_WINDOWS",
    "TrajNetConfig",
    # Model
    "TrajNet",
    "init_params",
    "encode",
    "decode",
    "decode_window",
    "forward_batch",
    "reconstruction_loss",
    "batch_loss",
    "zero_shot_actions",
    # Training
    "TrainResult",
    "epoch_indices",
    "evaluate_loss",
    "train_trajnet",
    "validation_batch",
    # Checkpoints
    "COMPONENT",
    "TrajNetBundle",
    "check_compatible",
    "load_trajnet",
    "save_trajnet",
]
