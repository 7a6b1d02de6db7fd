"""
Console logging for the pipeline.

Log records go to stderr so stdout stays free for machine-readable output.
"""

import logging
import os
import sys

from ..console import Colors

ROOT_LOGGER = "gcpc"


class ColorFormatter(logging.Formatter):
    """Formatter that colours the level name."""

    def __init__(self, colors: Colors):
        super().__init__("%(levelname)s %(name)s: %(message)s")
        self.colors = colors
        self._paint = {
            logging.DEBUG: colors.blue,
            logging.INFO: colors.green,
            logging.WARNING: colors.yellow,
            logging.ERROR: colors.red,
            logging.CRITICAL: colors.red,
        }

    def format(self, record):
        record = logging.makeLogRecord(record.__dict__)
        paint = self._paint.get(record.levelno, str)
        record.levelname = paint(record.levelname)
        return super().format(record)


def configure_logging(level=None):
    """Attach the stderr handler to the package logger (idempotent)."""
    logger = logging.getLogger(ROOT_LOGGER)
    level = level or os.environ.get("GCPC_LOG_LEVEL", "INFO")
    logger.setLevel(level.upper() if isinstance(level, str) else level)
    if not any(getattr(h, "_gcpc", False) for h in logger.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(ColorFormatter(Colors(sys.stderr)))
        handler._gcpc = True
        logger.addHandler(handler)
    logger.propagate = False
    return logger


def get_logger(name: str) -> logging.Logger:
    """Return the child logger ``gcpc.<name>``."""
    return logging.getLogger(f"{ROOT_LOGGER}.{name}")
