"""
MiniMaze: a point mass in a grid of unit cells.

Cell ``(row, col)`` spans ``x in [col, col+1)`` and ``y in [row, row+1)``,
so its center is ``(col + 0.5, row + 0.5)``. The observation is
``[x, y, vx, vy]``; target-state goals use the ``(x, y)`` subspace.
"""

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..data import GoalMode
from ..numeric import RngStream
from .error import MalformedLayout, UnknownLayout

LAYOUT_DIR = Path(__file__).parent / "layouts"
LAYOUT_CHARS = set("#.SG")
DEFAULT_CAPS = {"corridor-S": 400, "junction-T": 200}
START_JITTER = 0.2

Cell = Tuple[int, int]


def layout_names() -> List[str]:
    return sorted(p.stem for p in LAYOUT_DIR.glob("*.txt"))


def load_layout(name: str) -> List[str]:
    path = LAYOUT_DIR / f"{name}.txt"
    if not path.exists():
        raise UnknownLayout(name, layout_names())
    return [line.rstrip("\n") for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]


@dataclass(frozen=True)
class MazeSpec:
    """
    Static description of a maze.

    Attributes:
        layout (Tuple[str, ...]): Rows over ``#`` wall, ``.`` free, ``S`` start region, ``G`` goal region
        dt (float): Seconds per step
        v_max (float): Per-axis speed limit, units/s
        success_radius (float): Distance to the goal that counts as reaching it
        episode_cap (int): Steps before an episode is cut off
    """

    layout: Tuple[str, ...]
    name: str = "custom"
    dt: float = 0.1
    v_max: float = 2.0
    success_radius: float = 0.5
    episode_cap: int = 400
    accel_scale: float = 10.0

    def __post_init__(self):
        rows = tuple(self.layout)
        object.__setattr__(self, "layout", rows)
        if not rows or len({len(r) for r in rows}) != 1:
            raise MalformedLayout("rows must be non-empty and of equal length")
        if any(ch not in LAYOUT_CHARS for row in rows for ch in row):
            raise MalformedLayout(f"characters outside {''.join(sorted(LAYOUT_CHARS))}")
        border = rows[0] + rows[-1] + "".join(r[0] + r[-1] for r in rows)
        if set(border) != {"#"}:
            raise MalformedLayout("outer boundary must be all walls")
        if not self.free_cells():
            raise MalformedLayout("no free cell")
        if self.episode_cap < 1:
            raise MalformedLayout("episode_cap must be >= 1")

    @classmethod
    def named(cls, name: str, episode_cap: Optional[int] = None) -> "MazeSpec":
        cap = episode_cap or DEFAULT_CAPS.get(name, 400)
        return cls(tuple(load_layout(name)), name=name, episode_cap=cap)

    @property
    def height(self) -> int:
        return len(self.layout)

    @property
    def width(self) -> int:
        return len(self.layout[0])

    def char(self, cell: Cell) -> str:
        return self.layout[cell[0]][cell[1]]

    def is_free(self, cell: Cell) -> bool:
        r, c = cell
        return 0 <= r < self.height and 0 <= c < self.width and self.layout[r][c] != "#"

    def cells(self, chars: str) -> List[Cell]:
        return [(r, c) for r, row in enumerate(self.layout) for c, ch in enumerate(row) if ch in chars]

    def free_cells(self) -> List[Cell]:
        return self.cells(".SG")

    def wall_cells(self) -> List[Cell]:
        return self.cells("#")

    def start_cells(self) -> List[Cell]:
        return self.cells("S") or self.free_cells()

    def goal_cell(self) -> Cell:
        goals = self.cells("G")
        return goals[0] if goals else self.free_cells()[-1]

    @staticmethod
    def center(cell: Cell) -> np.ndarray:
        return np.array([cell[1] + 0.5, cell[0] + 0.5])

    @property
    def goal_position(self) -> np.ndarray:
        return self.center(self.goal_cell())

    def cell_of(self, point: Sequence[float]) -> Cell:
        return int(math.floor(point[1])), int(math.floor(point[0]))

    def is_wall_point(self, x: float, y: float) -> bool:
        return not self.is_free(self.cell_of((x, y)))


@dataclass
class MazeState:
    position: np.ndarray
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(2))
    t: int = 0

    def observe(self) -> np.ndarray:
        return np.concatenate([self.position, self.velocity])


def maze_reset(spec: MazeSpec, rng: RngStream, cells: Optional[List[Cell]] = None) -> MazeState:
    """At rest near the center of a random start cell (or of one of ``cells``)."""
    cells = cells or spec.start_cells()
    cell = cells[int(rng.integers(0, len(cells)))]
    jitter = rng.uniform(-START_JITTER, START_JITTER, size=2)
    return MazeState(spec.center(cell) + jitter, np.zeros(2), 0)


def maze_step(spec: MazeSpec, state: MazeState, action, goal: Optional[np.ndarray] = None):
    """
    Advance one step.

    Velocity integrates the clipped action, positions integrate velocity axis
    by axis; an axis whose move would enter a wall keeps its coordinate and
    loses its velocity.

    Returns:
        (MazeState, reward, done)
    """
    goal = spec.goal_position if goal is None else goal
    a = np.clip(np.asarray(action, dtype=np.float64), -1.0, 1.0)
    vx, vy = np.clip(state.velocity + a * spec.dt * spec.accel_scale, -spec.v_max, spec.v_max)
    x, y = state.position
    nx = x + vx * spec.dt
    if spec.is_wall_point(nx, y):
        nx, vx = x, 0.0
    ny = y + vy * spec.dt
    if spec.is_wall_point(nx, ny):
        ny, vy = y, 0.0
    t = state.t + 1
    position = np.array([nx, ny])
    success = float(np.linalg.norm(position - goal)) <= spec.success_radius
    done = success or t >= spec.episode_cap
    return MazeState(position, np.array([vx, vy]), t), (1.0 if success else 0.0), done


class MiniMaze:
    """Environment facade over ``maze_reset`` / ``maze_step`` with a fixed goal."""

    env_id = "minimaze"
    state_dim = 4
    action_dim = 2
    goal_mode = GoalMode.TARGET_STATE
    goal_subspace = [0, 1]

    def __init__(self, spec: MazeSpec, goal: Optional[np.ndarray] = None):
        self.spec = spec
        self.goal = spec.goal_position if goal is None else np.asarray(goal, dtype=np.float64)

    @property
    def max_episode_steps(self) -> int:
        return self.spec.episode_cap

    def reset(self, rng: RngStream) -> MazeState:
        return maze_reset(self.spec, rng)

    def step(self, state: MazeState, action):
        return maze_step(self.spec, state, action, self.goal)

    def observe(self, state: MazeState) -> np.ndarray:
        return state.observe()

    def eval_goal(self) -> np.ndarray:
        return self.goal.copy()

    def reached(self, observation: np.ndarray) -> bool:
        return float(np.linalg.norm(observation[:2] - self.goal)) <= self.spec.success_radius
