"""
Stage-2 policy: an MLP over ``[s_t, g, conditioning]``.

The conditioning block is the flattened bottleneck of a frozen TrajNet, its
decoded future window, or nothing at all (goal-conditioned behaviour cloning).
It is computed from the unmasked history outside any gradient tape, so no
gradient can reach the encoder.
"""

from typing import Optional

import numpy as np

from ..data import NormStats
from ..nn import LinearParams, ParameterStore, linear_forward
from ..numeric import RngStream, ShapeMismatch, Tensor, activation, as_tensor, concat, dropout
from ..trajnet import TrajNet, TrajNetConfig, decode, encode
from ..utils.error import IncompatibleError
from .config import Conditioning, PolicyConfig


def conditioning_width(mode: Conditioning, trajnet_config: Optional[TrajNetConfig]) -> int:
    """Width of the conditioning block for ``mode``."""
    if mode is Conditioning.NONE:
        return 0
    if trajnet_config is None:
        raise IncompatibleError(f"conditioning '{mode.value}' needs a TrajNet checkpoint")
    if mode is Conditioning.BOTTLENECK:
        return trajnet_config.n_slots * trajnet_config.d_model
    return trajnet_config.p * trajnet_config.recon_width


class Policy:
    """
    MLP parameters and input layout.

    Attributes:
        input_width (int): ``state_dim + goal_width + cond_width``
    """

    def __init__(self, config: PolicyConfig, state_dim: int, action_dim: int, goal_width: int, cond_width: int,
                 rng: Optional[RngStream] = None):
        self.config = config
        self.state_dim = state_dim
        self.action_dim = action_dim
        self.goal_width = goal_width
        self.cond_width = cond_width
        self.params = ParameterStore(rng)
        widths = [self.input_width] + [config.hidden_width] * config.hidden_layers
        self.hidden = [self.params.linear(f"mlp.{i}", widths[i], widths[i + 1]) for i in range(config.hidden_layers)]
        self.head: LinearParams = self.params.linear("mlp.out", config.hidden_width, action_dim)

    @property
    def input_width(self) -> int:
        return self.state_dim + self.goal_width + self.cond_width

    @property
    def tensors(self):
        return self.params.tensors

    def dims(self):
        return {
            "state_dim": self.state_dim, "action_dim": self.action_dim,
            "goal_width": self.goal_width, "cond_width": self.cond_width,
        }


def policy_forward(policy: Policy, states, goals, conditioning=None, rng: Optional[RngStream] = None,
                   training: bool = False) -> Tensor:
    """
    Predict actions ``[B, action_dim]`` from normalized ``states [B, state_dim]``,
    ``goals [B, goal_width]`` and ``conditioning [B, cond_width]``.
    """
    states, goals = as_tensor(states), as_tensor(goals)
    batch = states.shape[0]
    parts = [states, goals]
    if policy.cond_width:
        if conditioning is None:
            raise ShapeMismatch("policy conditioning", (batch, 0), (batch, policy.cond_width))
        parts.append(as_tensor(conditioning))
    for name, part, width in zip(("state", "goal", "conditioning"), parts,
                                 (policy.state_dim, policy.goal_width, policy.cond_width)):
        if part.shape != (batch, width):
            raise ShapeMismatch(f"policy {name}", part.shape, (batch, width))
    x = concat(parts, axis=1)
    for i, layer in enumerate(policy.hidden):
        x = activation(policy.config.activation, linear_forward(layer, x))
        layer_rng = rng.split(i) if (training and rng is not None) else None
        x = dropout(x, policy.config.dropout, layer_rng, training)
    return linear_forward(policy.head, x)


def conditioning_features(mode: Conditioning, trajnet: Optional[TrajNet], history_states: np.ndarray,
                          goals: np.ndarray, history_actions: Optional[np.ndarray] = None) -> np.ndarray:
    """
    The conditioning block for a batch of normalized, unmasked histories
    ``[B, k, state_dim]``; no mask token ever enters this path.
    """
    batch = history_states.shape[0]
    if mode is Conditioning.NONE:
        return np.zeros((batch, 0))
    if trajnet is None:
        raise IncompatibleError(f"conditioning '{mode.value}' needs a TrajNet checkpoint")
    cfg = trajnet.config
    goal_input = goals if cfg.goal_conditioning else None
    actions = history_actions if cfg.include_actions else None
    bottleneck = encode(trajnet, history_states, None, goal_input, actions)
    if mode is Conditioning.BOTTLENECK:
        return bottleneck.data.reshape(batch, -1).copy()
    future = decode(trajnet, bottleneck).data[:, cfg.k:]
    return future.reshape(batch, -1).copy()


def decode_explicit_future(trajnet: TrajNet, bottleneck, stats: NormStats) -> np.ndarray:
    """The last ``p`` positions of ``decode(bottleneck)``, denormalized: ``[B, p, recon_width]``."""
    cfg = trajnet.config
    future = decode(trajnet, bottleneck).data[:, cfg.k:]
    return stats.denormalize_states(future, cfg.reconstruction_subspace)
