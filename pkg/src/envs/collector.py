"""
Scripted offline-data collectors.

MiniMaze: a PD controller follows BFS waypoints. ``expert`` drives from the
start region to the goal and stops on success; ``play`` starts anywhere and
chains random subgoals for a fixed number of steps, so single trajectories
rarely solve the start-to-goal task by themselves.

LineRun: bang-bang controllers that reverse with a per-trajectory flip
probability, giving a spread of returns.

Trajectory ``i`` only depends on ``(seed, i)``.
"""

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from ..data import DatasetMeta, Trajectory, save_dataset
from ..numeric import RngStream
from ..utils.config import ConfigSection
from ..utils.error import UsageError
from ..utils.log import get_logger
from .error import UnknownEnv
from .linerun import HORIZON, LineRun, expert_return
from .maze import MazeSpec, MazeState, MiniMaze, maze_reset
from .planner import plan_waypoints

log = get_logger("envs")


class Style(str, Enum):
    PLAY = "play"
    EXPERT = "expert"


@dataclass
class EnvConfig(ConfigSection):
    SECTION = "env"

    env: str = "minimaze"
    layout: str = "corridor-S"
    episode_cap: Optional[int] = None

    def validate(self) -> None:
        if self.env not in ("minimaze", "linerun"):
            raise UnknownEnv(self.env)
        if self.episode_cap is not None and self.episode_cap < 1:
            raise UsageError(f"env.episode_cap must be >= 1, got {self.episode_cap}")


@dataclass
class CollectorConfig(ConfigSection):
    SECTION = "data"

    n_trajectories: int = 200
    style: Style = Style.PLAY
    kp: float = 1.0
    kd: float = 0.6
    noise: float = 0.2
    switch_radius: float = 0.4
    episode_length: int = 200
    reference_episodes: int = 100
    flip_low: float = 0.0
    flip_high: float = 0.5

    def __post_init__(self):
        try:
            self.style = Style(self.style)
        except ValueError:
            raise UsageError(f"unknown data.style '{self.style}'; valid: play, expert")

    def validate(self) -> None:
        if self.noise < 0:
            raise UsageError(f"data.noise must be >= 0, got {self.noise}")
        if self.n_trajectories < 1 or self.episode_length < 1 or self.reference_episodes < 1:
            raise UsageError("data.n_trajectories, episode_length and reference_episodes must be >= 1")
        if not 0.0 <= self.flip_low <= self.flip_high <= 1.0:
            raise UsageError("data.flip_low <= flip_high must lie in [0, 1]")


def make_env(env: str, layout: Optional[str] = None, episode_cap: Optional[int] = None) -> Union[MiniMaze, LineRun]:
    if env == "minimaze":
        return MiniMaze(MazeSpec.named(layout or "corridor-S", episode_cap))
    if env == "linerun":
        return LineRun(episode_cap or HORIZON)
    raise UnknownEnv(env)


def env_from_meta(meta: DatasetMeta, episode_cap: Optional[int] = None) -> Union[MiniMaze, LineRun]:
    return make_env(meta.env_id, meta.layout, episode_cap or meta.max_episode_steps)


class WaypointController:
    """``a = clip(kp (w - p) - kd v + noise)`` toward the current waypoint."""

    def __init__(self, waypoints: List[np.ndarray], config: CollectorConfig):
        self.waypoints = waypoints
        self.config = config
        self.index = 0

    @property
    def finished(self) -> bool:
        return self.index >= len(self.waypoints)

    def act(self, state: MazeState, rng: RngStream) -> np.ndarray:
        cfg = self.config
        while not self.finished and np.linalg.norm(self.waypoints[self.index] - state.position) <= cfg.switch_radius:
            self.index += 1
        target = self.waypoints[min(self.index, len(self.waypoints) - 1)]
        noise = rng.normal(0.0, cfg.noise, size=2) if cfg.noise > 0 else np.zeros(2)
        return np.clip(cfg.kp * (target - state.position) - cfg.kd * state.velocity + noise, -1.0, 1.0)


def _maze_expert(env: MiniMaze, config: CollectorConfig, rng: RngStream) -> Trajectory:
    spec = env.spec
    state = maze_reset(spec, rng.split("reset"))
    controller = WaypointController(plan_waypoints(spec, spec.cell_of(state.position), spec.goal_cell()), config)
    noise_rng = rng.split("noise")
    states, actions, rewards = [], [], []
    done = False
    while not done:
        action = controller.act(state, noise_rng)
        states.append(state.observe())
        actions.append(action)
        state, reward, done = env.step(state, action)
        rewards.append(reward)
    return Trajectory(np.array(states), np.array(actions), np.array(rewards))


def _maze_play(env: MiniMaze, config: CollectorConfig, rng: RngStream) -> Trajectory:
    spec = env.spec
    free = spec.free_cells()
    state = maze_reset(spec, rng.split("reset"), free)
    goal_rng, noise_rng = rng.split("subgoals"), rng.split("noise")
    length = min(config.episode_length, spec.episode_cap)
    states, actions, rewards = [], [], []
    controller = None
    while len(states) < length:
        if controller is None or controller.finished:
            here = spec.cell_of(state.position)
            choices = [c for c in free if c != here] or free
            subgoal = choices[int(goal_rng.integers(0, len(choices)))]
            controller = WaypointController(plan_waypoints(spec, here, subgoal), config)
        action = controller.act(state, noise_rng)
        states.append(state.observe())
        actions.append(action)
        state, reward, _ = env.step(state, action)
        rewards.append(reward)
    return Trajectory(np.array(states), np.array(actions), np.array(rewards))


def _linerun_bang_bang(env: LineRun, config: CollectorConfig, rng: RngStream) -> Trajectory:
    flip = float(rng.split("flip").uniform(config.flip_low, config.flip_high))
    step_rng = rng.split("steps")
    state = env.reset()
    states, actions, rewards = [], [], []
    done = False
    while not done:
        direction = -1.0 if step_rng.uniform() < flip else 1.0
        noise = step_rng.normal(0.0, config.noise) if config.noise > 0 else 0.0
        action = np.clip(np.array([direction + noise]), -1.0, 1.0)
        states.append(state.observe())
        actions.append(action)
        state, reward, done = env.step(state, action)
        rewards.append(reward)
    return Trajectory(np.array(states), np.array(actions), np.array(rewards))


def collect_trajectory(env, config: CollectorConfig, rng: RngStream) -> Trajectory:
    if isinstance(env, LineRun):
        return _linerun_bang_bang(env, config, rng)
    if config.style is Style.EXPERT:
        return _maze_expert(env, config, rng)
    return _maze_play(env, config, rng)


def random_policy_return(env, rng: RngStream) -> float:
    state = env.reset(rng.split("reset"))
    total, done = 0.0, False
    while not done:
        state, reward, done = env.step(state, rng.uniform(-1.0, 1.0, size=env.action_dim))
        total += reward
    return total


def reference_scores(env, config: CollectorConfig, rng: RngStream) -> Dict[str, float]:
    """Mean return of the uniform-random policy and of the scripted expert."""
    n = config.reference_episodes
    random_mean = float(np.mean([random_policy_return(env, rng.split(f"random/{i}")) for i in range(n)]))
    if isinstance(env, LineRun):
        expert_mean = expert_return(env.horizon)
    else:
        expert_cfg = config.replace(style=Style.EXPERT)
        expert_mean = float(np.mean([
            _maze_expert(env, expert_cfg, rng.split(f"expert/{i}")).rewards.sum() for i in range(n)
        ]))
    return {"random": random_mean, "expert": expert_mean}


def dataset_meta(env, seed: int, references: Dict[str, float]) -> DatasetMeta:
    return DatasetMeta(
        env_id=env.env_id,
        state_dim=env.state_dim,
        action_dim=env.action_dim,
        max_episode_steps=env.max_episode_steps,
        goal_mode=env.goal_mode,
        goal_subspace=list(env.goal_subspace),
        reference_scores=references,
        layout=env.spec.name if isinstance(env, MiniMaze) else None,
        split_seed=seed,
    )


def collect_dataset(env, config: CollectorConfig, seed: int, out) -> Path:
    """Collect ``config.n_trajectories`` trajectories and write them as a dataset directory."""
    rng = RngStream(seed)
    trajectories = [collect_trajectory(env, config, rng.split(f"trajectory/{i}")) for i in range(config.n_trajectories)]
    references = reference_scores(env, config, rng.split("reference"))
    meta = dataset_meta(env, seed, references)
    path = save_dataset(out, meta, trajectories)
    log.info("wrote %d %s trajectories to %s", len(trajectories), env.env_id, path)
    return path


def audit(env, trajectories: List[Trajectory]) -> Dict[str, Any]:
    """Summary printed by ``gen-data``: count, length statistics, success fractions."""
    lengths = np.array([len(tr) for tr in trajectories])
    summary: Dict[str, Any] = {
        "n": len(trajectories),
        "length": {"min": int(lengths.min()), "max": int(lengths.max()), "mean": float(lengths.mean())},
        "return": {"mean": float(np.mean([tr.rewards.sum() for tr in trajectories]))},
    }
    if isinstance(env, MiniMaze):
        spec = env.spec
        starts = set(spec.start_cells())
        summary["success_fraction"] = float(np.mean([tr.rewards.max() > 0 for tr in trajectories]))
        summary["endpoint_task_fraction"] = float(np.mean([
            spec.cell_of(tr.states[0, :2]) in starts and env.reached(tr.states[-1]) for tr in trajectories
        ]))
    return summary
