"""Run directory layout shared by both training stages and evaluation."""

import json
import re
from pathlib import Path
from typing import Any, Dict, List, Optional

from .metrics import MetricsLog

RESOLVED_CONFIG = "resolved-config.json"
METRICS = "metrics.jsonl"
REPORT = "report.json"
CHECKPOINTS = "checkpoints"
BEST = "best.json"

_EPOCH = re.compile(r"-epoch-(\d+)\.ckpt$")


class RunDir:
    """
    ``{resolved-config.json, checkpoints/, metrics.jsonl, report.json}``.

    Attributes:
        root (Path): The run directory
        metrics (MetricsLog): Its metrics log
    """

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.checkpoints.mkdir(exist_ok=True)
        self.metrics = MetricsLog(self.root / METRICS)

    @property
    def checkpoints(self) -> Path:
        return self.root / CHECKPOINTS

    @property
    def report_path(self) -> Path:
        return self.root / REPORT

    @property
    def config_path(self) -> Path:
        return self.root / RESOLVED_CONFIG

    def checkpoint_path(self, component: str, epoch: int) -> Path:
        return self.checkpoints / f"{component}-epoch-{epoch:03d}.ckpt"

    def list_checkpoints(self, component: str) -> List[Path]:
        """Epoch checkpoints of one component, oldest first."""
        found = [p for p in self.checkpoints.glob(f"{component}-epoch-*.ckpt") if _EPOCH.search(p.name)]
        return sorted(found, key=checkpoint_epoch)

    def clear_checkpoints(self, component: str) -> None:
        """Remove a previous run's epoch checkpoints of ``component`` and the best marker."""
        for stale in self.list_checkpoints(component):
            stale.unlink()
        marker = self.checkpoints / BEST
        if marker.exists():
            marker.unlink()

    def reset_metrics(self) -> None:
        if self.metrics.path.exists():
            self.metrics.path.unlink()

    def write_json(self, name: str, document: Dict[str, Any]) -> Path:
        path = self.root / name
        _dump(path, document)
        return path

    def write_config(self, document: Dict[str, Any]) -> Path:
        _dump(self.config_path, document)
        return self.config_path

    def read_config(self) -> Dict[str, Any]:
        with self.config_path.open("r", encoding="utf-8") as f:
            return json.load(f)

    def mark_best(self, path: Path, epoch: int, loss: float) -> None:
        _dump(self.checkpoints / BEST, {"epoch": epoch, "loss": loss, "path": path.name})

    def best(self) -> Optional[Path]:
        marker = self.checkpoints / BEST
        if not marker.exists():
            return None
        with marker.open("r", encoding="utf-8") as f:
            return self.checkpoints / json.load(f)["path"]


def checkpoint_epoch(path) -> int:
    return int(_EPOCH.search(Path(path).name).group(1))


def _dump(path: Path, document: Dict[str, Any]) -> None:
    with path.open("w", encoding="utf-8") as f:
        json.dump(document, f, indent=2, sort_keys=True)
        f.write("\n")
