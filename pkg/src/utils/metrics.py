"""Append-only JSON-lines metrics log."""

import json
from pathlib import Path
from typing import Any, Dict, List


class MetricsLog:
    """
    Writes one JSON object per event to ``metrics.jsonl``.

    Keys are sorted and floats use Python's shortest round-trip repr, so two
    runs with identical seeds produce byte-identical files.
    """

    def __init__(self, path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)

    def append(self, phase: str, **fields: Any) -> Dict[str, Any]:
        event = {"phase": phase, **fields}
        with self.path.open("a", encoding="utf-8") as f:
            f.write(json.dumps(event, sort_keys=True) + "\n")
        return event

    def read(self) -> List[Dict[str, Any]]:
        if not self.path.exists():
            return []
        with self.path.open("r", encoding="utf-8") as f:
            return [json.loads(line) for line in f if line.strip()]

    def select(self, phase: str) -> List[Dict[str, Any]]:
        return [e for e in self.read() if e["phase"] == phase]
