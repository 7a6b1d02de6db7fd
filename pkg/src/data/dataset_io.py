"""
Reading and writing the on-disk dataset format.

A dataset is a directory with ``meta.json`` (DatasetMeta) and
``trajectories.jsonl`` holding one trajectory object per line.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from ..numeric import RngStream
from ..utils.log import get_logger
from .error import EmptyDataset, MalformedRecord
from .trajectory import DatasetMeta, Trajectory

META_FILE = "meta.json"
TRAJECTORIES_FILE = "trajectories.jsonl"
VALIDATION_FRACTION = 0.1

log = get_logger("data")


@dataclass
class Dataset:
    """
    Validated trajectories with their train/validation split.

    Attributes:
        meta (DatasetMeta): Dataset metadata
        trajectories (List[Trajectory]): All trajectories in file order
        train_indices, validation_indices (np.ndarray): Split by trajectory
        path (Path | None): Source directory
    """

    meta: DatasetMeta
    trajectories: List[Trajectory]
    train_indices: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    validation_indices: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    path: Optional[Path] = None

    @property
    def train(self) -> List[Trajectory]:
        return [self.trajectories[i] for i in self.train_indices]

    @property
    def validation(self) -> List[Trajectory]:
        return [self.trajectories[i] for i in self.validation_indices]

    def __len__(self):
        return len(self.trajectories)


def split_indices(n: int, seed: int):
    """Seeded 90/10 split by trajectory; every split keeps at least one trajectory when n >= 2."""
    order = RngStream(seed).split("split").permutation(n)
    n_val = int(round(n * VALIDATION_FRACTION))
    if n >= 2:
        n_val = min(max(n_val, 1), n - 1)
    else:
        n_val = 0
    return np.sort(order[n_val:]), np.sort(order[:n_val])


def save_dataset(path, meta: DatasetMeta, trajectories: Sequence[Trajectory]) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    with (path / META_FILE).open("w", encoding="utf-8") as f:
        json.dump(meta.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    with (path / TRAJECTORIES_FILE).open("w", encoding="utf-8") as f:
        for traj in trajectories:
            f.write(json.dumps(traj.to_record()) + "\n")
    return path


def load_dataset(path, split_seed: Optional[int] = None) -> Dataset:
    """
    Load and validate a dataset directory.

    Args:
        path: Dataset directory
        split_seed (int | None): Overrides the split seed stored in meta.json

    Raises:
        MalformedRecord: A record fails validation (index names the line)
        EmptyDataset: No trajectory in the file
    """
    path = Path(path)
    try:
        with (path / META_FILE).open("r", encoding="utf-8") as f:
            meta = DatasetMeta.from_dict(json.load(f))
    except FileNotFoundError:
        raise EmptyDataset(path)
    except json.JSONDecodeError as e:
        raise MalformedRecord(-1, f"meta.json is not JSON ({e.msg})")

    trajectories = []
    try:
        with (path / TRAJECTORIES_FILE).open("r", encoding="utf-8") as f:
            for index, line in enumerate(f):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as e:
                    raise MalformedRecord(index, f"not JSON ({e.msg})")
                trajectories.append(Trajectory.from_record(record, index, meta))
    except FileNotFoundError:
        raise EmptyDataset(path)
    if not trajectories:
        raise EmptyDataset(path)

    if split_seed is not None:
        meta.split_seed = int(split_seed)
    train, validation = split_indices(len(trajectories), meta.split_seed)
    log.debug("loaded %d trajectories from %s (%d train / %d validation)",
              len(trajectories), path, len(train), len(validation))
    return Dataset(meta, trajectories, train, validation, path)
