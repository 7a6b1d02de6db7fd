"""
TrajNet: slot-token transformer encoder and MAE-style decoder.

Encoder input is ``[slot tokens; goal token (if any); window tokens]`` under
full bidirectional self-attention; the bottleneck is the encoder output at
the slot positions. The decoder attends jointly over
``[bottleneck; one mask token per window position]`` and reads the
reconstruction off the mask-token positions, so it sees the window only
through the bottleneck.

With ``include_actions`` every timestep contributes an interleaved
``(state, action)`` token pair; a learned type vector tells the two apart and
both tokens of a timestep share its positional code.
"""

from typing import List, Optional, Tuple

import numpy as np

from ..data import DatasetMeta, WindowBatch, apply_mask
from ..nn import BlockParams, LayerNormParams, ParameterStore, linear_forward, norm_forward, sinusoidal_pe, transformer_block
from ..numeric import (
    InvalidArgument, RngStream, ShapeMismatch, Tensor, add, as_tensor, broadcast_to, concat, mse_loss, narrow,
    reshape, wrap,
)
from ..utils.error import IncompatibleError
from .config import TrajNetConfig


class TrajNet:
    """
    Parameters and layout of one Stage-1 model.

    Attributes:
        config (TrajNetConfig): Resolved config (k, p and subspace set)
        params (ParameterStore): Every trainable tensor, by name
        positions (np.ndarray): Positional codes for window positions 1..k+p
    """

    def __init__(self, config: TrajNetConfig, state_dim: int, action_dim: int, goal_width: int,
                 rng: Optional[RngStream] = None):
        if config.k is None or config.p is None or config.reconstruction_subspace is None:
            raise IncompatibleError("TrajNetConfig must be resolved against a dataset first")
        self.config = config
        self.state_dim = state_dim
        self.action_dim = action_dim
        self.goal_width = goal_width
        d, h = config.d_model, config.n_heads
        store = self.params = ParameterStore(rng)

        self.state_embed = store.linear("embed.state", state_dim, d)
        self.goal_embed = store.linear("embed.goal", goal_width, d) if config.goal_conditioning else None
        self.action_embed = store.linear("embed.action", action_dim, d) if config.include_actions else None
        self.type_state = store.normal("embed.type_state", (d,)) if config.include_actions else None
        self.type_action = store.normal("embed.type_action", (d,)) if config.include_actions else None
        self.slots = store.normal("slots", (config.n_slots, d))
        self.mask_token = store.normal("mask_token", (d,))
        self.encoder: List[BlockParams] = [store.block(f"encoder.{i}", d, h) for i in range(config.encoder_layers)]
        self.encoder_norm: LayerNormParams = store.layer_norm("encoder.ln_out", d)
        self.decoder: List[BlockParams] = [store.block(f"decoder.{i}", d, h) for i in range(config.decoder_layers)]
        self.decoder_norm: LayerNormParams = store.layer_norm("decoder.ln_out", d)
        self.state_head = store.linear("head.state", d, config.recon_width)
        self.action_head = store.linear("head.action", d, action_dim) if config.include_actions else None

        self.positions = sinusoidal_pe(config.window + 1, d).data[1:]

    @property
    def tensors(self):
        return self.params.tensors

    def dims(self):
        return {"state_dim": self.state_dim, "action_dim": self.action_dim, "goal_width": self.goal_width}


def init_params(config: TrajNetConfig, meta: DatasetMeta, rng: RngStream) -> TrajNet:
    """Build a TrajNet for ``meta``'s dimensions with freshly initialized parameters."""
    return TrajNet(config, meta.state_dim, meta.action_dim, meta.goal_width, rng)


def _interleave(first: Tensor, second: Tensor) -> Tensor:
    """``[B, L, d]`` x2 -> ``[B, 2L, d]`` alternating first/second per position."""
    batch, length, width = first.shape
    pairs = concat([reshape(first, (batch, length, 1, width)), reshape(second, (batch, length, 1, width))], axis=2)
    return reshape(pairs, (batch, 2 * length, width))


def _run_blocks(blocks: List[BlockParams], tokens: Tensor, rng: Optional[RngStream], training: bool,
                rate: float) -> Tensor:
    for i, block in enumerate(blocks):
        block_rng = rng.split(i) if rng is not None else None
        tokens = transformer_block(block, tokens, None, block_rng, training, rate)
    return tokens


def encode(model: TrajNet, states, input_mask: Optional[np.ndarray] = None, goals=None, actions=None,
           rng: Optional[RngStream] = None, training: bool = False) -> Tensor:
    """
    Encode a window into the bottleneck ``[B, n_slots, d]``.

    Args:
        states: Normalized ``[B, L, state_dim]`` with ``L = k`` (history), or
            ``L = k + p`` for objectives whose future is encoder input
        input_mask: ``[B, L]`` bool; True positions carry the mask token
        goals: Normalized ``[B, goal_width]``; ignored without goal
            conditioning, and the goal token is left out when None
        actions: ``[B, L, action_dim]``, required with ``include_actions``;
            the action at the anchor (position k) is always masked
    """
    cfg = model.config
    states = as_tensor(states)
    batch, length = states.shape[0], states.shape[1]
    if length != cfg.k and not (length == cfg.window and cfg.objective.future_in_encoder):
        raise ShapeMismatch("encode", states.shape, (batch, cfg.k, model.state_dim))
    if states.shape[2] != model.state_dim:
        raise ShapeMismatch("encode", states.shape, (batch, length, model.state_dim))
    input_mask = np.zeros((batch, length), dtype=bool) if input_mask is None else np.asarray(input_mask, dtype=bool)
    positional = wrap(model.positions[:length])

    seq = apply_mask(linear_forward(model.state_embed, states), input_mask, model.mask_token, positional)
    if cfg.include_actions:
        if actions is None:
            raise InvalidArgument("actions", None)
        action_mask = input_mask.copy()
        action_mask[:, cfg.k - 1] = True
        acted = apply_mask(linear_forward(model.action_embed, as_tensor(actions)), action_mask, model.mask_token,
                           positional)
        seq = _interleave(add(seq, model.type_state), add(acted, model.type_action))

    parts = [broadcast_to(model.slots, (batch, cfg.n_slots, cfg.d_model))]
    if cfg.goal_conditioning and goals is not None:
        goals = as_tensor(goals)
        if goals.shape != (batch, model.goal_width):
            raise ShapeMismatch("encode goal", goals.shape, (batch, model.goal_width))
        parts.append(reshape(linear_forward(model.goal_embed, goals), (batch, 1, cfg.d_model)))
    parts.append(seq)

    tokens = _run_blocks(model.encoder, concat(parts, axis=1), rng, training, cfg.dropout)
    tokens = norm_forward(model.encoder_norm, tokens)
    return narrow(tokens, 1, 0, cfg.n_slots)


def decode_window(model: TrajNet, bottleneck: Tensor, rng: Optional[RngStream] = None,
                  training: bool = False) -> Tuple[Tensor, Optional[Tensor]]:
    """Reconstructed states ``[B, k+p, recon_width]`` and, with actions, ``[B, k+p, action_dim]``."""
    cfg = model.config
    bottleneck = as_tensor(bottleneck)
    if bottleneck.shape[1:] != (cfg.n_slots, cfg.d_model):
        raise IncompatibleError(f"bottleneck {bottleneck.shape} does not match n_slots={cfg.n_slots}, d_model={cfg.d_model}")
    batch, window, width = bottleneck.shape[0], cfg.window, cfg.d_model

    queries = add(broadcast_to(model.mask_token, (batch, window, width)), wrap(model.positions))
    if cfg.include_actions:
        queries = _interleave(add(queries, model.type_state), add(queries, model.type_action))
    tokens = _run_blocks(model.decoder, concat([bottleneck, queries], axis=1), rng, training, cfg.dropout)
    tokens = norm_forward(model.decoder_norm, tokens)
    out = narrow(tokens, 1, cfg.n_slots, tokens.shape[1])

    if not cfg.include_actions:
        return linear_forward(model.state_head, out), None
    pairs = reshape(out, (batch, window, 2, width))
    state_out = reshape(narrow(pairs, 2, 0, 1), (batch, window, width))
    action_out = reshape(narrow(pairs, 2, 1, 2), (batch, window, width))
    return linear_forward(model.state_head, state_out), linear_forward(model.action_head, action_out)


def decode(model: TrajNet, bottleneck: Tensor, rng: Optional[RngStream] = None, training: bool = False) -> Tensor:
    return decode_window(model, bottleneck, rng, training)[0]


def forward_batch(model: TrajNet, batch: WindowBatch, rng: Optional[RngStream] = None,
                  training: bool = False) -> Tuple[Tensor, Optional[Tensor]]:
    """Stage-1 forward pass: masked window in, reconstruction out."""
    cfg = model.config
    length = cfg.window if cfg.objective.future_in_encoder else cfg.k
    bottleneck = encode(
        model,
        batch.states[:, :length],
        batch.input_mask[:, :length],
        batch.goals if cfg.goal_conditioning else None,
        batch.actions[:, :length] if cfg.include_actions else None,
        rng.split("encoder") if rng is not None else None,
        training,
    )
    return decode_window(model, bottleneck, rng.split("decoder") if rng is not None else None, training)


def reconstruction_loss(model: TrajNet, pred_states: Tensor, batch: WindowBatch,
                        pred_actions: Optional[Tensor] = None) -> Tensor:
    """
    MSE over live positions (reconstruction target and not padding) and the
    reconstruction subspace, in normalized units. With ``loss_masked_only``
    only positions the encoder did not see count. Action errors, when
    present, are pooled with state errors by element count.
    """
    cfg = model.config
    live = batch.target & ~batch.pad
    if cfg.loss_masked_only:
        live = live & batch.hidden
    targets = batch.states[..., cfg.reconstruction_subspace]
    if pred_actions is None:
        return mse_loss(pred_states, targets, live)

    action_live = batch.target & ~batch.pad
    if cfg.loss_masked_only:
        hidden = batch.hidden.copy()
        hidden[:, cfg.k - 1] = True
        action_live = action_live & hidden
    weights = np.concatenate([
        np.repeat(live[..., None], cfg.recon_width, axis=2),
        np.repeat(action_live[..., None], model.action_dim, axis=2),
    ], axis=2)
    pred = concat([pred_states, pred_actions], axis=2)
    return mse_loss(pred, np.concatenate([targets, batch.actions], axis=2), weights)


def batch_loss(model: TrajNet, batch: WindowBatch, rng: Optional[RngStream] = None, training: bool = False) -> Tensor:
    pred_states, pred_actions = forward_batch(model, batch, rng, training)
    return reconstruction_loss(model, pred_states, batch, pred_actions)


def zero_shot_actions(model: TrajNet, history_states, history_actions, goals=None) -> np.ndarray:
    """
    Read actions straight off the decoder.

    The current action slot and every future slot are masked; the decoder
    output at the current timestep's action position is the action.

    Args:
        history_states: Normalized ``[B, k, state_dim]``
        history_actions: ``[B, k, action_dim]``; the last entry is ignored
        goals: Normalized ``[B, goal_width]``
    """
    if not model.config.include_actions:
        raise IncompatibleError("zero-shot actions need a TrajNet trained with include_actions")
    bottleneck = encode(model, history_states, None, goals, history_actions)
    _, actions = decode_window(model, bottleneck)
    return actions.data[:, model.config.k - 1].copy()
