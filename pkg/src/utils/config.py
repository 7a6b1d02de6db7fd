"""
Strict dataclass-backed config sections.

A section is a dataclass whose fields are the accepted keys. ``from_dict``
rejects keys the dataclass does not declare so a typo never silently falls
back to a default.
"""

import dataclasses
import enum
from typing import Any, Dict

from .error import UnknownConfigKey, UsageError


class ConfigSection:
    """Mixin for dataclass config sections."""

    SECTION = "config"

    @classmethod
    def from_dict(cls, data: Dict[str, Any] = None):
        data = dict(data or {})
        names = {f.name for f in dataclasses.fields(cls)}
        for key in sorted(data):
            if key not in names:
                raise UnknownConfigKey(cls.SECTION, key)
        try:
            section = cls(**data)
        except (TypeError, ValueError) as e:
            raise UsageError(f"{cls.SECTION}: {e}") from e
        section.validate()
        return section

    def to_dict(self) -> Dict[str, Any]:
        return {f.name: _plain(getattr(self, f.name)) for f in dataclasses.fields(self)}

    def replace(self, **changes):
        updated = dataclasses.replace(self, **changes)
        updated.validate()
        return updated

    def validate(self) -> None:
        """Check invariants; subclasses raise UsageError on violation."""


def _plain(value):
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    if isinstance(value, list):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, enum.Enum):
        return value.value
    return value
