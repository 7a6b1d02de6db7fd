"""
Desk-scale environments and their scripted data collectors: MiniMaze
(target-state goals) and LineRun (return-to-go goals).
"""

from .collector import (
    CollectorConfig, EnvConfig, Style, WaypointController, audit, collect_dataset, collect_trajectory, dataset_meta,
    env_from_meta, make_env, random_policy_return, reference_scores,
)
from .error import MalformedLayout, UnknownEnv, UnknownLayout, Unreachable
from .linerun import HORIZON, LineRun, LineRunState, expert_return, linerun_reset, linerun_step
from .maze import DEFAULT_CAPS, MazeSpec, MazeState, MiniMaze, layout_names, load_layout, maze_reset, maze_step
from .planner import NEIGHBOURS, plan_waypoints, shortest_path

__all__ = [
    # MiniMaze
    "DEFAULT_CAPS",
    "MazeSpec",
    "MazeState",
    "MiniMaze",
    "layout_names",
    "load_layout",
    "maze_reset",
    "maze_step",
    # LineRun
    "HORIZON",
    "LineRun",
    "LineRunState",
    "expert_return",
    "linerun_reset",
    "linerun_step",
    # Planning
    "NEIGHBOURS",
    "plan_waypoints",
    "shortest_path",
    # Collection
    "CollectorConfig",
    "EnvConfig",
    "Style",
    "WaypointController",
    "audit",
    "collect_dataset",
    "collect_trajectory",
    "dataset_meta",
    "env_from_meta",
    "make_env",
    "random_policy_return",
    "reference_scores",
    # Errors
    "MalformedLayout",
    "UnknownEnv",
    "UnknownLayout",
    "Unreachable",
]
