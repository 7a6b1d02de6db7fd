"""
Window and goal sampling, and minibatch assembly.

Every sample is fully determined by the stream passed in for it; batch
assembly splits one child stream per sample so the batch does not depend on
the order samples are drawn in.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from ..numeric import RngStream
from .error import GoalUnavailable, TimestepOutOfRange
from .masking import MaskSpec, Objective, build_mask
from .trajectory import DatasetMeta, GoalMode, NormStats, Trajectory


@dataclass
class WindowSample:
    """
    A (history k, future p) window cut from a trajectory at anchor ``t``.

    Attributes:
        t (int): Anchor timestep, 1-based
        states (np.ndarray): ``[k+p, state_dim]``; history first
        actions (np.ndarray): ``[k+p, action_dim]``
        pad (np.ndarray): ``[k+p]`` bool, True where the position lies outside the trajectory
    """

    t: int
    k: int
    p: int
    states: np.ndarray
    actions: np.ndarray
    pad: np.ndarray

    @property
    def history(self) -> np.ndarray:
        return self.states[: self.k]

    @property
    def future(self) -> np.ndarray:
        return self.states[self.k:]

    @property
    def history_actions(self) -> np.ndarray:
        return self.actions[: self.k]


@dataclass
class Goal:
    """Target-state goal over the goal subspace, or a scalar return-to-go."""

    mode: GoalMode
    value: np.ndarray

    @property
    def rtg(self) -> float:
        return float(self.value[0])


def window_positions(t: int, k: int, p: int) -> np.ndarray:
    """1-based timesteps ``t-k+1 .. t+p`` covered by a window."""
    return np.arange(t - k + 1, t + p + 1)


def sample_window(traj: Trajectory, t: int, k: int, p: int) -> WindowSample:
    """Endpoint-repeat padding on both sides; pad flags mark the repeated positions."""
    length = len(traj)
    if not 1 <= t <= length:
        raise TimestepOutOfRange(t, length)
    positions = window_positions(t, k, p)
    rows = np.clip(positions - 1, 0, length - 1)
    pad = (positions < 1) | (positions > length)
    return WindowSample(t, k, p, traj.states[rows].copy(), traj.actions[rows].copy(), pad)


def rtg_goal(traj: Trajectory, t: int, h_max: int) -> float:
    return float(np.sum(traj.rewards[t - 1:]) / (h_max - t + 1.0))


def sample_goal(traj: Trajectory, t: int, meta: DatasetMeta, rng: Optional[RngStream] = None) -> Goal:
    """
    Target mode: the goal-subspace slice of a uniform future state ``s_j``,
    ``j`` in ``{t+1, ..., H}``. Return-to-go mode: the average future reward
    over the constant ``max_episode_steps`` horizon.
    """
    length = len(traj)
    if not 1 <= t <= length:
        raise TimestepOutOfRange(t, length)
    if meta.goal_mode is GoalMode.RETURN_TO_GO:
        return Goal(GoalMode.RETURN_TO_GO, np.array([rtg_goal(traj, t, meta.max_episode_steps)]))
    if t == length:
        raise GoalUnavailable(t)
    j = int(rng.integers(t + 1, length + 1))
    return Goal(GoalMode.TARGET_STATE, traj.states[j - 1, meta.goal_subspace].copy())


def anchor_range(traj: Trajectory, mode: GoalMode):
    """Admissible anchors ``[1, H]``; target mode excludes ``H``."""
    last = len(traj) - 1 if mode is GoalMode.TARGET_STATE else len(traj)
    return 1, last


@dataclass
class WindowBatch:
    """
    A normalized minibatch ready for the models.

    Attributes:
        states: ``[B, k+p, state_dim]`` normalized
        actions: ``[B, k+p, action_dim]`` raw (actions are already bounded)
        pad: ``[B, k+p]`` bool
        goals: ``[B, goal_width]`` normalized
        masks (List[MaskSpec]): One spec per sample
        t: ``[B]`` anchor timesteps
    """

    states: np.ndarray
    actions: np.ndarray
    pad: np.ndarray
    goals: np.ndarray
    masks: List[MaskSpec]
    t: np.ndarray
    k: int

    def __len__(self):
        return self.states.shape[0]

    @property
    def input_mask(self) -> np.ndarray:
        return np.stack([m.input_mask for m in self.masks])

    @property
    def target(self) -> np.ndarray:
        return np.stack([m.target for m in self.masks])

    @property
    def hidden(self) -> np.ndarray:
        return np.stack([m.hidden for m in self.masks])

    @property
    def current_states(self) -> np.ndarray:
        return self.states[:, self.k - 1]

    @property
    def current_actions(self) -> np.ndarray:
        return self.actions[:, self.k - 1]


class WindowSampler:
    """
    Draws (trajectory, t, goal, mask) tuples from a list of trajectories.

    Trajectories with no admissible anchor (length 1 under target-state
    goals) are never drawn.
    """

    def __init__(self, trajectories: Sequence[Trajectory], meta: DatasetMeta, stats: NormStats,
                 k: int, p: int, objective=Objective.MAE_RC, mask_ratio="dynamic"):
        self.meta = meta
        self.stats = stats
        self.k = k
        self.p = p
        self.objective = Objective.parse(objective)
        self.mask_ratio = mask_ratio
        self.trajectories = [tr for tr in trajectories if anchor_range(tr, meta.goal_mode)[1] >= 1]

    def __len__(self):
        return len(self.trajectories)

    def sample(self, index: int, rng: RngStream):
        traj = self.trajectories[index]
        low, high = anchor_range(traj, self.meta.goal_mode)
        t = int(rng.split("t").integers(low, high + 1))
        window = sample_window(traj, t, self.k, self.p)
        goal = sample_goal(traj, t, self.meta, rng.split("goal"))
        mask = build_mask(self.objective, self.k, self.p, rng.split("mask"), self.mask_ratio)
        return window, goal, mask

    def batch(self, indices: Sequence[int], rng: RngStream) -> WindowBatch:
        samples = [self.sample(int(i), rng.split(n)) for n, i in enumerate(indices)]
        return self.assemble(samples)

    def assemble(self, samples) -> WindowBatch:
        windows, goals, masks = zip(*samples)
        return WindowBatch(
            states=self.stats.normalize_states(np.stack([w.states for w in windows])),
            actions=np.stack([w.actions for w in windows]),
            pad=np.stack([w.pad for w in windows]),
            goals=self.stats.normalize_goal(np.stack([g.value for g in goals])),
            masks=list(masks),
            t=np.array([w.t for w in windows]),
            k=self.k,
        )

