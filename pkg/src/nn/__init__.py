"""
Transformer building blocks: linear layers, sinusoidal positional encoding,
multi-head self-attention, pre-norm blocks and parameter initialization.
"""

from .layers import linear_forward, multi_head_attention, norm_forward, sinusoidal_pe, transformer_block
from .params import (
    INIT_STD, AttentionParams, BlockParams, LayerNormParams, LinearParams, ParameterStore,
)

__all__ = [
    # Parameters
    "INIT_STD",
    "AttentionParams",
    "BlockParams",
    "LayerNormParams",
    "LinearParams",
    "ParameterStore",
    # Forward functions
    "linear_forward",
    "multi_head_attention",
    "norm_forward",
    "sinusoidal_pe",
    "transformer_block",
]
