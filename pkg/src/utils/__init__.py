"""
Shared plumbing for every stage of the pipeline: the error hierarchy,
console logging, strict config sections, the binary checkpoint container,
the metrics log and the run directory layout.
"""

from .checkpoint import FORMAT_VERSION, MAGIC, CheckpointData, file_digest, read_checkpoint, save_checkpoint
from .config import ConfigSection
from .error import (
    CheckpointFormatError, IncompatibleError, NumericalError, PipelineError, UnknownConfigKey, UsageError,
)
from .log import ColorFormatter, Colors, configure_logging, get_logger
from .metrics import MetricsLog
from .run_dir import RunDir, checkpoint_epoch

__all__ = [
    # Errors
    "PipelineError",
    "UsageError",
    "UnknownConfigKey",
    "IncompatibleError",
    "CheckpointFormatError",
    "NumericalError",
    # Logging
    "Colors",
    "ColorFormatter",
    "configure_logging",
    "get_logger",
    # Configuration
    "ConfigSection",
    # Checkpoints and run directories
    "MAGIC",
    "FORMAT_VERSION",
    "CheckpointData",
    "file_digest",
    "read_checkpoint",
    "save_checkpoint",
    "MetricsLog",
    "RunDir",
    "checkpoint_epoch",
]
