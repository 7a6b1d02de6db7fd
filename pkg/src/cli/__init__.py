"""
Command-line surface of the pipeline and its run configuration document.
"""

from .config import SECTIONS, RunConfig
from .main import build_parser, main
from .viz import FutureExport, decode_future, write_future_csv, write_future_svg

__all__ = [
    "SECTIONS",
    "RunConfig",
    "build_parser",
    "main",
    "FutureExport",
    "decode_future",
    "write_future_csv",
    "write_future_svg",
]
