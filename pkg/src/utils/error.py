"""
Error classes shared by every stage of the GCPC pipeline.

Each class carries the process exit code the command-line entry point reports
when the error escapes a command:
    2 usage error, 3 data/model incompatibility, 4 runtime numerical failure.
"""


class PipelineError(Exception):
    """Base class for all pipeline errors."""

    exit_code = 1


class UsageError(PipelineError):
    """
    Raised when a command is invoked with invalid arguments.

    Args:
        message (str): Human-readable description naming the valid choices
    """

    exit_code = 2

    def __init__(self, message):
        self.message = message
        super().__init__(message)


class UnknownConfigKey(UsageError):
    """
    Raised when a config document contains a key no section declares.

    Args:
        section (str): Dotted name of the config section
        key (str): The offending key
    """

    def __init__(self, section, key):
        self.section = section
        self.key = key
        super().__init__(f"UnknownConfigKey({section}.{key})")


class IncompatibleError(PipelineError):
    """
    Raised when data and a model (or two models) disagree on their layout.

    Args:
        message (str): Which dimensions or settings disagree
    """

    exit_code = 3

    def __init__(self, message):
        self.message = message
        super().__init__(f"Incompatible({message})")


class CheckpointFormatError(IncompatibleError):
    """
    Raised when a checkpoint file is corrupted or has an unexpected layout.

    Args:
        path (str): The checkpoint file
        reason (str): What failed (magic, version, truncation, tensor table)
    """

    def __init__(self, path, reason):
        self.path = str(path)
        self.reason = reason
        PipelineError.__init__(self, f"CheckpointFormatError({self.path}: {reason})")


class NumericalError(PipelineError):
    """
    Raised when a computation produces NaN/Inf or otherwise diverges.

    Args:
        message (str): Diagnostic with the location of the failure
    """

    exit_code = 4

    def __init__(self, message):
        self.message = message
        super().__init__(f"NumericalError({message})")
