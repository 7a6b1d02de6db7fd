"""
Transformer building blocks over ``[..., T, d]`` token tensors.

All attention is bidirectional; the only masking is key exclusion.
"""

import math
from typing import Optional, Tuple, Union

import numpy as np

from ..numeric import (
    InvalidArgument, RngStream, ShapeMismatch, Tensor, add, dropout, gelu, layer_norm, matmul,
    mul, reshape, softmax_lastdim, transpose, wrap,
)
from .params import AttentionParams, BlockParams, LayerNormParams, LinearParams

PE_BASE = 10000.0


def linear_forward(p: LinearParams, x: Tensor) -> Tensor:
    if x.shape[-1] != p.in_features:
        raise ShapeMismatch("linear", x.shape, p.weight.shape)
    return add(matmul(x, transpose(p.weight, (1, 0))), p.bias)


def norm_forward(p: LayerNormParams, x: Tensor, eps: float = 1e-5) -> Tensor:
    return layer_norm(x, p.gain, p.bias, eps)


def sinusoidal_pe(length: int, width: int) -> Tensor:
    """``PE[pos, 2i] = sin(pos / 10000^(2i/d))``, ``PE[pos, 2i+1] = cos(...)``."""
    if width % 2 != 0:
        raise InvalidArgument("width", width)
    pos = np.arange(length, dtype=np.float64)[:, None]
    freq = PE_BASE ** (np.arange(0, width, 2, dtype=np.float64) / width)
    pe = np.zeros((length, width))
    pe[:, 0::2] = np.sin(pos / freq)
    pe[:, 1::2] = np.cos(pos / freq)
    return wrap(pe)


def _split_heads(x: Tensor, n_heads: int) -> Tensor:
    lead, (T, d) = x.shape[:-2], x.shape[-2:]
    n = len(lead)
    x = reshape(x, lead + (T, n_heads, d // n_heads))
    return transpose(x, tuple(range(n)) + (n + 1, n, n + 2))


def _merge_heads(x: Tensor) -> Tensor:
    lead, (h, T, dh) = x.shape[:-3], x.shape[-3:]
    n = len(lead)
    x = transpose(x, tuple(range(n)) + (n + 1, n, n + 2))
    return reshape(x, lead + (T, h * dh))


def multi_head_attention(p: AttentionParams, tokens: Tensor, attn_mask: Optional[np.ndarray] = None,
                         return_weights: bool = False) -> Union[Tensor, Tuple[Tensor, Tensor]]:
    """
    Scaled dot-product self-attention with scale ``1/sqrt(d/h)``.

    Args:
        tokens: ``[..., T, d]``
        attn_mask: Key-exclusion flags ``[..., T]``; True keys get a -inf logit
        return_weights: Also return the ``[..., h, T, T]`` attention weights
    """
    if tokens.shape[-1] != p.width:
        raise ShapeMismatch("attention", tokens.shape, p.query.weight.shape)
    q = _split_heads(linear_forward(p.query, tokens), p.n_heads)
    k = _split_heads(linear_forward(p.key, tokens), p.n_heads)
    v = _split_heads(linear_forward(p.value, tokens), p.n_heads)
    n = q.ndim
    scores = mul(matmul(q, transpose(k, tuple(range(n - 2)) + (n - 1, n - 2))), 1.0 / math.sqrt(p.head_width))
    exclude = None
    if attn_mask is not None:
        attn_mask = np.asarray(attn_mask, dtype=bool)
        if attn_mask.shape != tokens.shape[:-1]:
            raise ShapeMismatch("attn_mask", tokens.shape, attn_mask.shape)
        exclude = attn_mask[..., None, None, :]
    weights = softmax_lastdim(scores, exclude)
    out = linear_forward(p.output, _merge_heads(matmul(weights, v)))
    return (out, weights) if return_weights else out


def transformer_block(p: BlockParams, tokens: Tensor, attn_mask: Optional[np.ndarray] = None,
                      rng: Optional[RngStream] = None, training: bool = False,
                      dropout_rate: float = 0.0) -> Tensor:
    """Pre-norm residual block: ``x + Attn(LN(x))`` then ``x + FFN(LN(x))``."""
    attn_rng = rng.split("attn") if (training and rng is not None) else None
    ffn_rng = rng.split("ffn") if (training and rng is not None) else None
    attended = multi_head_attention(p.attention, norm_forward(p.norm_attention, tokens), attn_mask)
    x = add(tokens, dropout(attended, dropout_rate, attn_rng, training))
    hidden = gelu(linear_forward(p.ff_in, norm_forward(p.norm_feedforward, x)))
    fed = linear_forward(p.ff_out, hidden)
    return add(x, dropout(fed, dropout_rate, ffn_rng, training))
