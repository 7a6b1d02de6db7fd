"""
Binary checkpoint container shared by both model kinds.

Layout::

    b"GCPC"                      magic
    u32 little-endian            format version
    u64 little-endian            JSON header length in bytes
    JSON header (UTF-8)          {"component", "config", "meta",
                                  "tensors": [{"name", "shape", "byte_offset"}]}
    payload                      little-endian float64 tensors in table order

``byte_offset`` is relative to the start of the payload.
"""

import hashlib
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping

import numpy as np

from .error import CheckpointFormatError

MAGIC = b"GCPC"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<4sIQ")
_DTYPE = np.dtype("<f8")


@dataclass
class CheckpointData:
    component: str
    config: Dict[str, Any]
    meta: Dict[str, Any]
    tensors: Dict[str, np.ndarray] = field(default_factory=dict)


def save_checkpoint(path, component: str, config: Mapping[str, Any], meta: Mapping[str, Any],
                    tensors: Mapping[str, np.ndarray]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table, chunks, offset = [], [], 0
    for name, array in tensors.items():
        data = np.ascontiguousarray(array, dtype=_DTYPE)
        table.append({"name": name, "shape": list(data.shape), "byte_offset": offset})
        chunks.append(data.tobytes())
        offset += data.nbytes
    header = json.dumps(
        {"component": component, "config": dict(config), "meta": dict(meta), "tensors": table},
        sort_keys=True,
    ).encode("utf-8")
    with path.open("wb") as f:
        f.write(_PREFIX.pack(MAGIC, FORMAT_VERSION, len(header)))
        f.write(header)
        for chunk in chunks:
            f.write(chunk)
    return path


def read_checkpoint(path, component: str = None) -> CheckpointData:
    """
    Parse and validate a checkpoint file.

    Raises:
        CheckpointFormatError: Bad magic, unknown version, truncated file,
            inconsistent tensor table, or an unexpected component
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except FileNotFoundError:
        raise CheckpointFormatError(path, "file not found")
    if len(raw) < _PREFIX.size:
        raise CheckpointFormatError(path, "truncated prefix")
    magic, version, header_len = _PREFIX.unpack_from(raw)
    if magic != MAGIC:
        raise CheckpointFormatError(path, f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise CheckpointFormatError(path, f"unsupported version {version}")
    start = _PREFIX.size + header_len
    if len(raw) < start:
        raise CheckpointFormatError(path, "truncated header")
    try:
        header = json.loads(raw[_PREFIX.size:start].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise CheckpointFormatError(path, "header is not JSON")
    for key in ("component", "config", "meta", "tensors"):
        if key not in header:
            raise CheckpointFormatError(path, f"header lacks '{key}'")
    if component is not None and header["component"] != component:
        raise CheckpointFormatError(path, f"component {header['component']} where {component} was expected")

    payload = memoryview(raw)[start:]
    tensors, expected = {}, 0
    for entry in header["tensors"]:
        name, shape, offset = entry.get("name"), entry.get("shape"), entry.get("byte_offset")
        if name in tensors or offset != expected or not isinstance(shape, list):
            raise CheckpointFormatError(path, f"inconsistent tensor table at {name}")
        nbytes = int(np.prod(shape, dtype=np.int64)) * _DTYPE.itemsize
        if offset + nbytes > len(payload):
            raise CheckpointFormatError(path, f"truncated payload at {name}")
        tensors[name] = np.frombuffer(payload[offset:offset + nbytes], dtype=_DTYPE).reshape(shape).astype(np.float64)
        expected = offset + nbytes
    if expected != len(payload):
        raise CheckpointFormatError(path, f"{len(payload) - expected} trailing payload bytes")
    return CheckpointData(header["component"], header["config"], header["meta"], tensors)


def file_digest(path) -> str:
    """SHA-256 of a file's bytes."""
    digest = hashlib.sha256()
    with Path(path).open("rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()
