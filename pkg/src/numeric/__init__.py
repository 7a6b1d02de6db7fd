"""
Numeric core: float64 tensors with reverse-mode automatic differentiation,
deterministic random streams and the Adam optimizer.
"""

from .error import EmptyMask, InvalidArgument, NonFiniteValue, NonScalarLoss, ShapeMismatch
from .gradcheck import analytic_gradients, check_gradients, numerical_gradient, relative_error
from .ops import (
    Activation, activation, add, as_tensor, broadcast_to, concat, div, dropout,
    elementwise, gelu, layer_norm, matmul, mean, mse_loss, mul, narrow, reduce_sum, relu, reshape,
    softmax_lastdim, sub, transpose, where,
)
from .optim import Adam, AdamState, adam_step
from .rng import RngStream, derive_seed
from .tensor import Tape, TapeEntry, Tensor, active_tape, backward, wrap

__all__ = [
    # Tensors and tape
    "Tensor",
    "Tape",
    "TapeEntry",
    "active_tape",
    "backward",
    "wrap",
    # Operations
    "Activation",
    "activation",
    "add",
    "as_tensor",
    "broadcast_to",
    "concat",
    "div",
    "dropout",
    "elementwise",
    "gelu",
    "layer_norm",
    "matmul",
    "mean",
    "mse_loss",
    "mul",
    "narrow",
    "reduce_sum",
    "relu",
    "reshape",
    "softmax_lastdim",
    "sub",
    "transpose",
    "where",
    # Randomness and optimization
    "RngStream",
    "derive_seed",
    "Adam",
    "AdamState",
    "adam_step",
    # Gradient checking
    "analytic_gradients",
    "check_gradients",
    "numerical_gradient",
    "relative_error",
    # Errors
    "EmptyMask",
    "InvalidArgument",
    "NonFiniteValue",
    "NonScalarLoss",
    "ShapeMismatch",
]
