"""
Checkpoint selection and multi-seed aggregation.

Per seed the reported score is the best of the last five epoch checkpoints;
across seeds we report mean, sample standard deviation, median and the
interquartile mean.
"""

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Sequence

import numpy as np

from ..utils.error import UsageError

LAST_K = 5


def best_of_last_k(scores: Sequence[float], k: int = LAST_K) -> float:
    """Max over the final ``min(k, len(scores))`` entries."""
    if not len(scores):
        raise UsageError("best_of_last_k needs at least one score")
    return float(max(scores[-k:]))


def interquartile_mean(scores: Sequence[float]) -> float:
    """Mean after dropping ``floor(n/4)`` scores from each end."""
    ordered = sorted(scores)
    cut = len(ordered) // 4
    return float(np.mean(ordered[cut:len(ordered) - cut]))


@dataclass
class RunRecord:
    """
    Evaluation of one training run under one evaluation seed.

    Attributes:
        scores (List[float]): Per retained checkpoint, oldest first
        epochs (List[int]): Epoch of each scored checkpoint
        chosen (float): ``best_of_last_k(scores)``
    """

    seed: int
    scores: List[float]
    epochs: List[int] = field(default_factory=list)
    chosen: float = float("nan")
    run: str = ""
    eval_seed: int = 0

    def __post_init__(self):
        if math.isnan(self.chosen):
            self.chosen = best_of_last_k(self.scores)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class AggregateReport:
    mean: float
    std: float
    median: float
    iqm: float
    n_seeds: int

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def aggregate_seeds(scores: Sequence[float]) -> AggregateReport:
    if not len(scores):
        raise UsageError("aggregate_seeds needs at least one score")
    values = np.asarray(scores, dtype=np.float64)
    std = float(values.std(ddof=1)) if len(values) > 1 else 0.0
    return AggregateReport(
        mean=float(values.mean()),
        std=std,
        median=float(np.median(values)),
        iqm=interquartile_mean(values.tolist()),
        n_seeds=len(values),
    )
