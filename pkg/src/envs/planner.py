"""Breadth-first cell planning over maze layouts."""

from collections import deque
from typing import Dict, List, Optional

import numpy as np

from .error import Unreachable
from .maze import Cell, MazeSpec

# N, E, S, W
NEIGHBOURS = ((-1, 0), (0, 1), (1, 0), (0, -1))


def shortest_path(spec: MazeSpec, start: Cell, goal: Cell) -> List[Cell]:
    """Shortest cell path from ``start`` to ``goal`` inclusive; ties go to the earlier neighbour in N, E, S, W."""
    start, goal = tuple(start), tuple(goal)
    if not spec.is_free(start) or not spec.is_free(goal):
        raise Unreachable(start, goal)
    parent: Dict[Cell, Optional[Cell]] = {start: None}
    frontier = deque([start])
    while frontier:
        cell = frontier.popleft()
        if cell == goal:
            break
        for dr, dc in NEIGHBOURS:
            nxt = (cell[0] + dr, cell[1] + dc)
            if nxt not in parent and spec.is_free(nxt):
                parent[nxt] = cell
                frontier.append(nxt)
    if goal not in parent:
        raise Unreachable(start, goal)
    path = [goal]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return path[::-1]


def plan_waypoints(spec: MazeSpec, start: Cell, goal: Cell) -> List[np.ndarray]:
    """Cell-center waypoints along ``shortest_path``."""
    return [spec.center(cell) for cell in shortest_path(spec, start, goal)]
