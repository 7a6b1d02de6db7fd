"""Errors raised while loading and sampling trajectory data."""

from ..utils.error import IncompatibleError, PipelineError, UsageError


class MalformedRecord(IncompatibleError):
    """
    Raised when a dataset record fails validation.

    Args:
        index (int): Zero-based line index in trajectories.jsonl (-1 for meta.json)
        reason (str): What is wrong with the record
    """

    def __init__(self, index, reason):
        self.index = index
        self.reason = reason
        PipelineError.__init__(self, f"MalformedRecord(#{index}: {reason})")


class EmptyDataset(IncompatibleError):
    """
    Raised when a dataset (or a required split of it) holds no trajectory.

    Args:
        path (str): Dataset directory
    """

    def __init__(self, path):
        self.path = str(path)
        PipelineError.__init__(self, f"EmptyDataset({self.path})")


class TimestepOutOfRange(UsageError):
    """
    Raised when an anchor timestep lies outside ``[1, H]``.

    Args:
        t (int): The requested timestep (1-based)
        length (int): Trajectory length H
    """

    def __init__(self, t, length):
        self.t = t
        self.length = length
        PipelineError.__init__(self, f"TimestepOutOfRange(t={t}, H={length})")


class GoalUnavailable(PipelineError):
    """
    Raised when target-state goal sampling has no future state to pick from
    (the anchor is the final timestep); callers resample the anchor.

    Args:
        t (int): The anchor timestep
    """

    def __init__(self, t):
        self.t = t
        super().__init__(f"GoalUnavailable(t={t})")


class UnknownObjective(UsageError):
    """
    Raised for a masking objective outside the five supported ones.

    Args:
        name (str): The rejected objective name
    """

    def __init__(self, name):
        self.name = name
        valid = "ae-h, mae-h, mae-f, mae-rc, mae-all"
        PipelineError.__init__(self, f"UnknownObjective({name}; valid: {valid})")
