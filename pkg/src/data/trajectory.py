"""
Trajectory containers, dataset metadata and state normalization.

Timesteps are 1-based throughout the data API (``t`` in ``[1, H]``), matching
the way windows and goals are defined; arrays are indexed with ``t - 1``.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .error import MalformedRecord

STD_FLOOR = 1e-6


class GoalMode(str, Enum):
    TARGET_STATE = "target_state"
    RETURN_TO_GO = "return_to_go"


@dataclass
class Trajectory:
    """
    One episode.

    Attributes:
        states (np.ndarray): ``[H, state_dim]``
        actions (np.ndarray): ``[H, action_dim]``
        rewards (np.ndarray | None): ``[H]``
    """

    states: np.ndarray
    actions: np.ndarray
    rewards: Optional[np.ndarray] = None

    def __len__(self):
        return self.states.shape[0]

    def to_record(self) -> Dict[str, Any]:
        return {
            "states": self.states.tolist(),
            "actions": self.actions.tolist(),
            "rewards": None if self.rewards is None else self.rewards.tolist(),
        }

    @classmethod
    def from_record(cls, record: Dict[str, Any], index: int, meta: "DatasetMeta") -> "Trajectory":
        if not isinstance(record, dict) or "states" not in record or "actions" not in record:
            raise MalformedRecord(index, "expected an object with states and actions")
        try:
            states = np.array(record["states"], dtype=np.float64)
            actions = np.array(record["actions"], dtype=np.float64)
            rewards = record.get("rewards")
            rewards = None if rewards is None else np.array(rewards, dtype=np.float64)
        except (TypeError, ValueError) as e:
            raise MalformedRecord(index, f"non-numeric or ragged values ({e})")
        if states.ndim != 2 or states.shape[0] < 1:
            raise MalformedRecord(index, "states must be a non-empty list of vectors")
        if actions.ndim != 2:
            raise MalformedRecord(index, "actions must be a list of vectors")
        if states.shape[1] != meta.state_dim:
            raise MalformedRecord(index, f"state width {states.shape[1]} != state_dim {meta.state_dim}")
        if actions.shape[1] != meta.action_dim:
            raise MalformedRecord(index, f"action width {actions.shape[1]} != action_dim {meta.action_dim}")
        if actions.shape[0] != states.shape[0]:
            raise MalformedRecord(index, f"{actions.shape[0]} actions for {states.shape[0]} states")
        if rewards is not None and rewards.shape != (states.shape[0],):
            raise MalformedRecord(index, f"{rewards.shape[0] if rewards.ndim else 0} rewards for {states.shape[0]} states")
        if rewards is None and meta.goal_mode is GoalMode.RETURN_TO_GO:
            raise MalformedRecord(index, "return_to_go datasets need rewards")
        if states.shape[0] > meta.max_episode_steps:
            raise MalformedRecord(index, f"length {states.shape[0]} exceeds max_episode_steps {meta.max_episode_steps}")
        for name, arr in (("states", states), ("actions", actions), ("rewards", rewards)):
            if arr is not None and not np.all(np.isfinite(arr)):
                raise MalformedRecord(index, f"non-finite {name}")
        return cls(states, actions, rewards)


@dataclass
class DatasetMeta:
    """
    Dataset-level metadata stored in meta.json.

    Attributes:
        env_id (str): ``minimaze`` or ``linerun``
        goal_subspace (List[int]): State dims forming a target-state goal
        reference_scores (Dict[str, float] | None): ``{"random": R, "expert": R}``
    """

    env_id: str
    state_dim: int
    action_dim: int
    max_episode_steps: int
    goal_mode: GoalMode
    goal_subspace: List[int] = field(default_factory=list)
    reference_scores: Optional[Dict[str, float]] = None
    layout: Optional[str] = None
    split_seed: int = 0

    def __post_init__(self):
        self.goal_mode = GoalMode(self.goal_mode)
        self.goal_subspace = [int(i) for i in self.goal_subspace]

    @property
    def goal_width(self) -> int:
        return len(self.goal_subspace) if self.goal_mode is GoalMode.TARGET_STATE else 1

    def validate(self) -> None:
        if self.state_dim < 1 or self.action_dim < 1 or self.max_episode_steps < 1:
            raise MalformedRecord(-1, "dimensions must be positive")
        if any(i < 0 or i >= self.state_dim for i in self.goal_subspace):
            raise MalformedRecord(-1, f"goal_subspace {self.goal_subspace} out of range for state_dim {self.state_dim}")
        if self.goal_mode is GoalMode.TARGET_STATE and not self.goal_subspace:
            raise MalformedRecord(-1, "target_state datasets need a goal_subspace")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "env_id": self.env_id,
            "state_dim": self.state_dim,
            "action_dim": self.action_dim,
            "max_episode_steps": self.max_episode_steps,
            "goal_mode": self.goal_mode.value,
            "goal_subspace": list(self.goal_subspace),
            "reference_scores": self.reference_scores,
            "layout": self.layout,
            "split_seed": self.split_seed,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DatasetMeta":
        try:
            meta = cls(**data)
        except (TypeError, ValueError) as e:
            raise MalformedRecord(-1, f"meta.json: {e}")
        meta.validate()
        return meta


@dataclass
class NormStats:
    """
    Per-dimension z-score statistics from the training split.

    Attributes:
        state_mean, state_std: ``[state_dim]``; std floored at 1e-6
        goal_subspace: Dims used by target-state goals
        rtg_mean, rtg_std: Return-to-go goal statistics (rtg datasets only)
    """

    state_mean: np.ndarray
    state_std: np.ndarray
    goal_mode: GoalMode
    goal_subspace: List[int]
    rtg_mean: float = 0.0
    rtg_std: float = 1.0

    def normalize_states(self, x: np.ndarray, dims: Optional[Sequence[int]] = None) -> np.ndarray:
        mean, std = self._slice(dims)
        return (x - mean) / std

    def denormalize_states(self, x: np.ndarray, dims: Optional[Sequence[int]] = None) -> np.ndarray:
        mean, std = self._slice(dims)
        return x * std + mean

    def normalize_goal(self, g: np.ndarray) -> np.ndarray:
        if self.goal_mode is GoalMode.TARGET_STATE:
            return self.normalize_states(g, self.goal_subspace)
        return (g - self.rtg_mean) / self.rtg_std

    def denormalize_goal(self, g: np.ndarray) -> np.ndarray:
        if self.goal_mode is GoalMode.TARGET_STATE:
            return self.denormalize_states(g, self.goal_subspace)
        return g * self.rtg_std + self.rtg_mean

    def _slice(self, dims):
        if dims is None:
            return self.state_mean, self.state_std
        dims = list(dims)
        return self.state_mean[dims], self.state_std[dims]

    def to_arrays(self) -> Dict[str, np.ndarray]:
        return {
            "norm.state_mean": self.state_mean,
            "norm.state_std": self.state_std,
            "norm.rtg": np.array([self.rtg_mean, self.rtg_std]),
        }

    @classmethod
    def from_arrays(cls, arrays: Dict[str, np.ndarray], meta: DatasetMeta) -> "NormStats":
        rtg = arrays["norm.rtg"]
        return cls(
            state_mean=np.array(arrays["norm.state_mean"]),
            state_std=np.array(arrays["norm.state_std"]),
            goal_mode=meta.goal_mode,
            goal_subspace=list(meta.goal_subspace),
            rtg_mean=float(rtg[0]),
            rtg_std=float(rtg[1]),
        )


def rtg_sequence(traj: Trajectory, h_max: int) -> np.ndarray:
    """``g_t = (1 / (H_max - t + 1)) * sum_{i=t}^{H} r_i`` for every ``t`` in ``[1, H]``."""
    tail = np.cumsum(traj.rewards[::-1])[::-1]
    t = np.arange(1, len(traj) + 1, dtype=np.float64)
    return tail / (h_max - t + 1.0)


def compute_norm_stats(trajectories: Sequence[Trajectory], meta: DatasetMeta) -> NormStats:
    """Z-score statistics over the given (training) trajectories only."""
    states = np.concatenate([tr.states for tr in trajectories], axis=0)
    rtg_mean, rtg_std = 0.0, 1.0
    if meta.goal_mode is GoalMode.RETURN_TO_GO:
        goals = np.concatenate([rtg_sequence(tr, meta.max_episode_steps) for tr in trajectories])
        rtg_mean, rtg_std = float(goals.mean()), float(max(goals.std(), STD_FLOOR))
    return NormStats(
        state_mean=states.mean(axis=0),
        state_std=np.maximum(states.std(axis=0), STD_FLOOR),
        goal_mode=meta.goal_mode,
        goal_subspace=list(meta.goal_subspace),
        rtg_mean=rtg_mean,
        rtg_std=rtg_std,
    )
