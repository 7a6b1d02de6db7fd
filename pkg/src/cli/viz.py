"""
Latent-future export: decode the future a TrajNet imagines from one history.

The CSV holds the ``p`` decoded states in data units. For MiniMaze data an SVG
overlays the walls, the observed history, the decoded future and the goal;
every artist carries a ``gid`` so each wall cell is one addressable element.
"""

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

from ..data import Dataset, GoalMode, TimestepOutOfRange, rtg_goal, sample_window  # noqa: E402
from ..envs import MazeSpec  # noqa: E402
from ..policy import decode_explicit_future  # noqa: E402
from ..trajnet import TrajNetBundle, check_compatible, encode  # noqa: E402
from ..utils.error import UsageError  # noqa: E402
from ..utils.log import get_logger  # noqa: E402

log = get_logger("cli")

plt.rcParams["svg.hashsalt"] = "gcpc"


@dataclass
class FutureExport:
    """
    Attributes:
        history (np.ndarray): Observed states ``[k, state_dim]``, data units
        future (np.ndarray): Decoded ``[p, recon_width]``, data units
        timesteps (List[int]): ``t+1 .. t+p``
        dims (List[int]): State dimensions of the future columns
        goal (np.ndarray): Raw goal the trajectory was conditioned on
    """

    history: np.ndarray
    future: np.ndarray
    timesteps: List[int]
    dims: List[int]
    goal: np.ndarray
    conditioned: bool = True


def decode_future(bundle: TrajNetBundle, dataset: Dataset, index: int, t: int, use_goal: bool = True,
                  goal: Optional[Sequence[float]] = None) -> FutureExport:
    """
    Encode trajectory ``index``'s unmasked history ending at ``t`` and decode
    its future.

    The goal defaults to the trajectory's own final state (target mode) or its
    return-to-go at ``t``; ``goal`` overrides it in raw units, so one history
    can be decoded toward several goals.
    """
    check_compatible(bundle, dataset.meta)
    if not 0 <= index < len(dataset):
        raise UsageError(f"--index {index} out of range for {len(dataset)} trajectories")
    traj = dataset.trajectories[index]
    if not 1 <= t <= len(traj):
        raise TimestepOutOfRange(t, len(traj))
    cfg, stats, meta = bundle.config, bundle.stats, dataset.meta

    window = sample_window(traj, t, cfg.k, 0)
    if goal is not None:
        goal = np.asarray(goal, dtype=np.float64)
        if goal.shape != (meta.goal_width,):
            raise UsageError(f"--goal needs {meta.goal_width} values, got {goal.size}")
    elif meta.goal_mode is GoalMode.TARGET_STATE:
        goal = traj.states[-1, meta.goal_subspace].copy()
    else:
        goal = np.array([rtg_goal(traj, t, meta.max_episode_steps)])
    goals = stats.normalize_goal(goal)[None] if use_goal else None
    actions = window.history_actions[None] if cfg.include_actions else None

    bottleneck = encode(bundle.model, stats.normalize_states(window.history)[None], None, goals, actions)
    future = decode_explicit_future(bundle.model, bottleneck, stats)[0]
    return FutureExport(
        history=window.history,
        future=future,
        timesteps=list(range(t + 1, t + cfg.p + 1)),
        dims=list(cfg.reconstruction_subspace),
        goal=goal,
        conditioned=use_goal,
    )


def write_future_csv(export: FutureExport, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["t"] + [f"dim{d}" for d in export.dims])
        for t, row in zip(export.timesteps, export.future):
            writer.writerow([t] + [repr(float(v)) for v in row])
    return path


def write_future_svg(export: FutureExport, spec: MazeSpec, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(spec.width / 2.0, spec.height / 2.0))
    for r, c in spec.wall_cells():
        ax.add_patch(Rectangle((c, r), 1.0, 1.0, facecolor="0.35", edgecolor="none", gid=f"wall-{r}-{c}"))

    ax.plot(export.history[:, 0], export.history[:, 1], color="tab:blue", marker="o", markersize=2, gid="history")
    xy = _position_columns(export.dims)
    if xy is None:
        log.warning("decoded future has no x/y columns; the SVG shows the history only")
    else:
        ax.plot(export.future[:, xy[0]], export.future[:, xy[1]], color="tab:orange", linestyle="--",
                marker="o", markersize=2, gid="future")
    ax.plot([export.goal[0]], [export.goal[1]], color="tab:green", marker="*", markersize=12,
            linestyle="none", gid="goal")

    ax.set_xlim(0, spec.width)
    ax.set_ylim(spec.height, 0)
    ax.set_aspect("equal")
    ax.axis("off")
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def _position_columns(dims: List[int]) -> Optional[tuple]:
    if 0 in dims and 1 in dims:
        return dims.index(0), dims.index(1)
    return None
