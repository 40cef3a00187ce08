"""Checkpoint container.

A checkpoint is a single UTF-8 JSON object::

    {
      "format": "tdparse-checkpoint",
      "version": 1,
      "kind": "<model kind>",
      "hyperparameters": {...},
      "vocabularies": {"<name>": ["tok0", "tok1", ...], ...},
      "extra": {...},
      "tensors": {"<name>": {"shape": [..], "dtype": "<f8",
                             "data": "<base64 of little-endian float64, row-major>"}}
    }

Keys are written sorted with fixed separators, so equal models give equal bytes.
"""

from __future__ import annotations

import base64
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

FORMAT = "tdparse-checkpoint"
VERSION = 1


class CheckpointError(ValueError):
    pass


@dataclass
class Checkpoint:
    kind: str
    hyperparameters: dict
    vocabularies: dict[str, list[str]]
    tensors: dict[str, np.ndarray]
    extra: dict = field(default_factory=dict)


def encode_tensor(array: np.ndarray) -> dict:
    array = np.ascontiguousarray(array, dtype="<f8")
    return {
        "shape": list(array.shape),
        "dtype": "<f8",
        "data": base64.b64encode(array.tobytes()).decode("ascii"),
    }


def decode_tensor(record: dict) -> np.ndarray:
    raw = base64.b64decode(record["data"])
    array = np.frombuffer(raw, dtype=record.get("dtype", "<f8")).astype(np.float64)
    shape = tuple(record["shape"])
    if int(np.prod(shape, dtype=np.int64)) != array.size:
        raise CheckpointError(f"tensor data of size {array.size} does not match shape {shape}")
    return array.reshape(shape)


def dumps(ckpt: Checkpoint) -> bytes:
    payload = {
        "format": FORMAT,
        "version": VERSION,
        "kind": ckpt.kind,
        "hyperparameters": ckpt.hyperparameters,
        "vocabularies": ckpt.vocabularies,
        "extra": ckpt.extra,
        "tensors": {name: encode_tensor(t) for name, t in ckpt.tensors.items()},
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def loads(raw: bytes | str) -> Checkpoint:
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"checkpoint is not valid JSON: {exc}") from None
    if payload.get("format") != FORMAT:
        raise CheckpointError(f"not a {FORMAT} file")
    if payload.get("version") != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {payload.get('version')}")
    return Checkpoint(
        kind=payload["kind"],
        hyperparameters=payload["hyperparameters"],
        vocabularies=payload["vocabularies"],
        tensors={k: decode_tensor(v) for k, v in payload["tensors"].items()},
        extra=payload.get("extra", {}),
    )


def save(path, ckpt: Checkpoint) -> str:
    """Write ``ckpt`` and return the SHA-256 digest of the bytes written."""
    raw = dumps(ckpt)
    Path(path).write_bytes(raw)
    return hashlib.sha256(raw).hexdigest()


def load(path) -> Checkpoint:
    return loads(Path(path).read_bytes())


def digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
