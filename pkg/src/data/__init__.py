"""
Trajectory data: storage format, normalization, window and goal sampling,
and the masking objectives.
"""

from .dataset_io import Dataset, load_dataset, save_dataset, split_indices
from .error import EmptyDataset, GoalUnavailable, MalformedRecord, TimestepOutOfRange, UnknownObjective
from .masking import DYNAMIC, DYNAMIC_RATIOS, MaskSpec, Objective, Segment, apply_mask, build_mask, resolve_ratio
from .sampling import (
    Goal, WindowBatch, WindowSample, WindowSampler, anchor_range, rtg_goal, sample_goal, sample_window,
    window_positions,
)
from .trajectory import DatasetMeta, GoalMode, NormStats, Trajectory, compute_norm_stats, rtg_sequence

__all__ = [
    # Containers
    "Trajectory",
    "DatasetMeta",
    "GoalMode",
    "Dataset",
    "WindowSample",
    "WindowBatch",
    "Goal",
    # Storage
    "load_dataset",
    "save_dataset",
    "split_indices",
    # Normalization
    "NormStats",
    "compute_norm_stats",
    "rtg_sequence",
    # Sampling
    "WindowSampler",
    "anchor_range",
    "rtg_goal",
    "sample_goal",
    "sample_window",
    "window_positions",
    # Masking
    "DYNAMIC",
    "DYNAMIC_RATIOS",
    "MaskSpec",
    "Objective",
    "Segment",
    "apply_mask",
    "build_mask",
    "resolve_ratio",
    # Errors
    "EmptyDataset",
    "GoalUnavailable",
    "MalformedRecord",
    "TimestepOutOfRange",
    "UnknownObjective",
]
