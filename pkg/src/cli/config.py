"""
The run configuration document.

A JSON object with optional sections ``env``, ``data``, ``trajnet``,
``policy``, ``eval`` and ``run``. Missing keys take module defaults; unknown
sections and keys are rejected.
"""

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Optional

from ..data import DatasetMeta
from ..envs import CollectorConfig, EnvConfig
from ..evaluation import EvalConfig
from ..policy import PolicyConfig
from ..trajnet import TrajNetConfig
from ..utils.error import UnknownConfigKey, UsageError

SECTIONS = {
    "env": EnvConfig,
    "data": CollectorConfig,
    "trajnet": TrajNetConfig,
    "policy": PolicyConfig,
    "eval": EvalConfig,
}


@dataclass
class RunConfig:
    env: EnvConfig = field(default_factory=EnvConfig)
    data: CollectorConfig = field(default_factory=CollectorConfig)
    trajnet: TrajNetConfig = field(default_factory=TrajNetConfig)
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    run: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, document: Dict[str, Any]) -> "RunConfig":
        if not isinstance(document, dict):
            raise UsageError("config must be a JSON object")
        sections = {}
        for name in sorted(document):
            if name == "run":
                continue
            if name not in SECTIONS:
                raise UnknownConfigKey("config", name)
            sections[name] = SECTIONS[name].from_dict(document[name])
        return cls(run=dict(document.get("run") or {}), **sections)

    @classmethod
    def load(cls, path: Optional[str] = None) -> "RunConfig":
        """Read a config file; no path means all defaults."""
        if path is None:
            return cls()
        try:
            with Path(path).open("r", encoding="utf-8") as f:
                document = json.load(f)
        except FileNotFoundError:
            raise UsageError(f"config file {path} not found")
        except json.JSONDecodeError as e:
            raise UsageError(f"config file {path} is not valid JSON ({e})")
        return cls.from_dict(document)

    def to_dict(self) -> Dict[str, Any]:
        document = {name: getattr(self, name).to_dict() for name in SECTIONS}
        document["run"] = dict(self.run)
        return document

    def resolve(self, meta: DatasetMeta, **run) -> "RunConfig":
        """Concrete values for every dataset-dependent default, plus the invocation record."""
        return replace(
            self,
            trajnet=self.trajnet.resolve(meta),
            eval=self.eval.resolve(meta),
            run={**self.run, **run},
        )
