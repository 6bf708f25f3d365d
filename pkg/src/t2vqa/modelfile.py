"""Versioned JSON model files with base64-packed float64 matrices.

All persisted models (pristine-statistics models, the block-quality
regressor, classifier trees, ensemble weights) share this container so
files are self-describing: ``{"version": 1, "kind": ..., ...}``.
Matrices are little-endian float64, base64 encoded, with an explicit
shape.
"""

from __future__ import annotations

import base64
import json
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1


class ModelFormatError(Exception):
    """Raised when a model file is missing, malformed, or the wrong kind."""


def encode_array(array: np.ndarray) -> dict:
    arr = np.ascontiguousarray(array, dtype="<f8")
    return {"shape": list(arr.shape), "data": base64.b64encode(arr.tobytes()).decode("ascii")}


def decode_array(obj: dict) -> np.ndarray:
    try:
        raw = base64.b64decode(obj["data"])
        arr = np.frombuffer(raw, dtype="<f8").reshape(obj["shape"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed matrix field: {exc}") from exc
    return arr.astype(np.float64)


def write_model(path: str | Path, kind: str, payload: dict) -> None:
    doc = {"version": FORMAT_VERSION, "kind": kind}
    doc.update(payload)
    Path(path).write_text(json.dumps(doc, sort_keys=True) + "\n", encoding="utf-8")


def read_model(path: str | Path, kind: str) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ModelFormatError(f"model file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model file {path} is not valid JSON: {exc}") from exc
    if doc.get("version") != FORMAT_VERSION:
        raise ModelFormatError(
            f"model file {path} has version {doc.get('version')!r}, "
            f"expected {FORMAT_VERSION}"
        )
    if doc.get("kind") != kind:
        raise ModelFormatError(
            f"model file {path} holds a {doc.get('kind')!r} model, expected {kind!r}"
        )
    return doc
