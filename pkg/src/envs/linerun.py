"""LineRun: a 1-D runner rewarded for forward velocity over a fixed horizon."""

from dataclasses import dataclass

import numpy as np

from ..data import GoalMode
from ..numeric import RngStream

HORIZON = 200
DT = 0.1
V_LIMIT = 1.0


@dataclass
class LineRunState:
    x: float = 0.0
    v: float = 0.0
    t: int = 0

    def observe(self) -> np.ndarray:
        return np.array([self.x, self.v])


def linerun_reset() -> LineRunState:
    return LineRunState()


def linerun_step(state: LineRunState, action, horizon: int = HORIZON):
    """``v' = clip(v + 0.1 a, [-1, 1])``, ``x' = x + 0.1 v'``, reward ``v'``; done at the horizon."""
    a = float(np.clip(np.asarray(action, dtype=np.float64).reshape(-1)[0], -1.0, 1.0))
    v = float(np.clip(state.v + DT * a, -V_LIMIT, V_LIMIT))
    x = state.x + DT * v
    t = state.t + 1
    return LineRunState(x, v, t), v, t >= horizon


def expert_return(horizon: int = HORIZON) -> float:
    """Return of the always-accelerate policy, by rollout."""
    state, total, done = linerun_reset(), 0.0, False
    while not done:
        state, reward, done = linerun_step(state, [1.0], horizon)
        total += reward
    return total


class LineRun:
    env_id = "linerun"
    state_dim = 2
    action_dim = 1
    goal_mode = GoalMode.RETURN_TO_GO
    goal_subspace = []

    def __init__(self, horizon: int = HORIZON):
        self.horizon = horizon

    @property
    def max_episode_steps(self) -> int:
        return self.horizon

    def reset(self, rng: RngStream = None) -> LineRunState:
        return linerun_reset()

    def step(self, state: LineRunState, action):
        return linerun_step(state, action, self.horizon)

    def observe(self, state: LineRunState) -> np.ndarray:
        return state.observe()
