"""Errors raised by environments, the planner and the data collectors."""

from ..utils.error import IncompatibleError, PipelineError, UsageError


class MalformedLayout(IncompatibleError):
    """
    Raised when a maze layout is not a walled rectangle over ``# . S G``.

    Args:
        reason (str): What is wrong with the layout
    """

    def __init__(self, reason):
        self.reason = reason
        PipelineError.__init__(self, f"MalformedLayout({reason})")


class UnknownLayout(UsageError):
    """
    Raised for a layout name with no fixture.

    Args:
        name (str): The requested layout
        valid (list): Shipped layout names
    """

    def __init__(self, name, valid):
        self.name = name
        PipelineError.__init__(self, f"UnknownLayout({name}; valid: {', '.join(valid)})")


class UnknownEnv(UsageError):
    """
    Raised for an environment id other than ``minimaze`` and ``linerun``.

    Args:
        name (str): The requested environment
    """

    def __init__(self, name):
        self.name = name
        PipelineError.__init__(self, f"UnknownEnv({name}; valid: minimaze, linerun)")


class Unreachable(IncompatibleError):
    """
    Raised when no path of free cells joins two cells.

    Args:
        start (tuple): (row, col) of the start cell
        goal (tuple): (row, col) of the goal cell
    """

    def __init__(self, start, goal):
        self.start = tuple(start)
        self.goal = tuple(goal)
        PipelineError.__init__(self, f"Unreachable({self.start} -> {self.goal})")
