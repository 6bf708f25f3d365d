"""Pluggable sources for captions, sentence embeddings, and class
probabilities.

Three interchangeable modes:

* :class:`StubProvider` — pure deterministic functions of the input bytes
  and a seed, so every pipeline stage runs with no ML runtime and no
  network.
* :class:`FileProvider` — replays previously recorded outputs from disk.
* :class:`HttpProvider` — talks JSON over HTTP to a model service
  (``POST /caption``, ``POST /embed``, ``POST /class_probs``,
  ``GET /health``).

All providers expose ``caption(frame) -> str``, ``embed(text) -> vector``
and ``class_probs(frame) -> vector`` and raise :class:`ProviderError` on
failure — never a silent default.
"""

from __future__ import annotations

import base64
import hashlib
import io
import json
import math
import os
from pathlib import Path

import numpy as np

from t2vqa.validation import check_rgb_frame

ENV_PROVIDER = "T2VQA_PROVIDER"

STUB_PHRASES = (
    "a person walking along a sandy beach at sunset",
    "a red car driving down a city street",
    "a dog running through a grassy field",
    "a cat sitting on a window sill",
    "a group of people standing in a room",
    "a bird flying over the ocean",
    "a boat sailing on calm blue water",
    "a mountain landscape covered in snow",
    "a close up of a flower in bloom",
    "a city skyline at night with bright lights",
    "a child playing with a ball in a park",
    "a train moving along the tracks",
    "a plate of food on a wooden table",
    "a horse grazing in an open meadow",
    "a waterfall cascading over mossy rocks",
    "a street market crowded with shoppers",
    "an airplane taking off from a runway",
    "a bicycle leaning against a brick wall",
    "a forest path covered with fallen leaves",
    "a bridge spanning a wide river",
    "two people talking at a cafe table",
    "a desert landscape under a clear sky",
    "a lighthouse standing on a rocky coast",
    "a field of yellow flowers in spring",
    "a busy highway seen from above",
    "a snowman in a quiet winter garden",
    "a chef cooking in a restaurant kitchen",
    "a library filled with rows of books",
    "a hot air balloon floating over hills",
    "a lake reflecting the surrounding trees",
    "a crowd watching a concert on stage",
    "an empty road stretching to the horizon",
)


class ProviderError(RuntimeError):
    """A provider could not produce the requested output."""


def _canonical_image_bytes(frame: np.ndarray) -> bytes:
    """Dimensions plus raw RGB bytes — container-format independent."""
    frame = check_rgb_frame(frame, "frame")
    h, w = frame.shape[:2]
    return h.to_bytes(4, "little") + w.to_bytes(4, "little") + frame.tobytes()


def _hash_floats(data: bytes, seed: int, count: int, label: bytes) -> np.ndarray:
    """``count`` floats in [0, 1), a pure function of (data, seed, label).

    Counter-mode BLAKE2b: platform-independent, unlike Python's builtin
    ``hash`` which is salted per process.
    """
    need = count * 8
    blocks = []
    for i in range(math.ceil(need / 64)):
        h = hashlib.blake2b(digest_size=64)
        h.update(label)
        h.update(seed.to_bytes(8, "little", signed=True))
        h.update(i.to_bytes(8, "little"))
        h.update(data)
        blocks.append(h.digest())
    raw = b"".join(blocks)[:need]
    return np.frombuffer(raw, dtype="<u8").astype(np.float64) / 2.0 ** 64


class StubProvider:
    """Deterministic stand-in for the model service.

    Captions pick from a fixed phrase list by image hash; embeddings are a
    hash-projection of the token multiset onto ``dim`` axes; class
    probabilities are a softmax over hashed image features.  Outputs are
    identical across runs and platforms for the same inputs and seed.
    """

    def __init__(self, seed: int = 0, dim: int = 64, classes: int = 1000):
        if dim < 1 or classes < 2:
            raise ValueError("dim must be >= 1 and classes >= 2")
        self.seed = int(seed)
        self.dim = int(dim)
        self.classes = int(classes)

    def caption(self, frame: np.ndarray) -> str:
        data = _canonical_image_bytes(frame)
        index = int(_hash_floats(data, self.seed, 1, b"caption")[0] * len(STUB_PHRASES))
        return STUB_PHRASES[min(index, len(STUB_PHRASES) - 1)]

    def embed(self, text: str) -> np.ndarray:
        tokens = [t for t in "".join(
            c if c.isalnum() else " " for c in text.lower()
        ).split()]
        vector = np.zeros(self.dim)
        for token in tokens:
            vector += 2.0 * _hash_floats(token.encode("utf-8"), self.seed,
                                         self.dim, b"embed") - 1.0
        return vector

    def class_probs(self, frame: np.ndarray) -> np.ndarray:
        data = _canonical_image_bytes(frame)
        logits = 6.0 * _hash_floats(data, self.seed, self.classes, b"class_probs") - 3.0
        logits -= logits.max()
        exps = np.exp(logits)
        return exps / exps.sum()

    def health(self) -> dict:
        return {"status": "ok", "mode": "stub"}


def image_digest(frame: np.ndarray) -> str:
    """Stable lookup key for recorded per-image outputs."""
    return hashlib.sha256(_canonical_image_bytes(frame)).hexdigest()


class FileProvider:
    """Replays recorded outputs from a directory.

    Layout: ``embeddings.json`` maps text to a vector; ``captions.json``
    and ``class_probs.json`` map :func:`image_digest` keys to a caption or
    a probability vector.  A missing file or key raises
    :class:`ProviderError` naming what was absent.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        if not self.root.is_dir():
            raise ProviderError(f"file provider root {self.root} is not a directory")

    def _table(self, name: str) -> dict:
        path = self.root / name
        if not path.exists():
            raise ProviderError(f"file provider has no {name} at {path}")
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ProviderError(f"{path} is not valid JSON: {exc}") from exc

    def caption(self, frame: np.ndarray) -> str:
        key = image_digest(frame)
        table = self._table("captions.json")
        if key not in table:
            raise ProviderError(f"no recorded caption for image {key[:12]}…")
        return str(table[key])

    def embed(self, text: str) -> np.ndarray:
        table = self._table("embeddings.json")
        if text not in table:
            raise ProviderError(f"no recorded embedding for text {text!r}")
        return np.asarray(table[text], dtype=np.float64)

    def class_probs(self, frame: np.ndarray) -> np.ndarray:
        key = image_digest(frame)
        table = self._table("class_probs.json")
        if key not in table:
            raise ProviderError(f"no recorded class probabilities for image {key[:12]}…")
        return np.asarray(table[key], dtype=np.float64)

    def health(self) -> dict:
        return {"status": "ok", "mode": "file"}


def encode_png_base64(frame: np.ndarray) -> str:
    from PIL import Image

    frame = check_rgb_frame(frame, "frame")
    buf = io.BytesIO()
    Image.fromarray(frame, mode="RGB").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


class HttpProvider:
    """JSON-over-HTTP client for a running model service."""

    def __init__(self, base_url: str, timeout: float = 30.0, retries: int = 2):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.retries = max(0, int(retries))

    def _post(self, endpoint: str, payload: dict) -> dict:
        import requests

        last = None
        for _ in range(self.retries + 1):
            try:
                resp = requests.post(f"{self.base_url}{endpoint}", json=payload,
                                     timeout=self.timeout)
                if resp.status_code == 200:
                    return resp.json()
                last = f"HTTP {resp.status_code}: {resp.text[:200]}"
                if 400 <= resp.status_code < 500:
                    break  # client errors will not heal on retry
            except requests.RequestException as exc:
                last = str(exc)
        raise ProviderError(f"{endpoint} failed after {self.retries + 1} attempts: {last}")

    def caption(self, frame: np.ndarray) -> str:
        doc = self._post("/caption", {"image": encode_png_base64(frame)})
        if "caption" not in doc:
            raise ProviderError(f"/caption response lacks 'caption': {doc}")
        return str(doc["caption"])

    def embed(self, text: str) -> np.ndarray:
        doc = self._post("/embed", {"text": text})
        if "vector" not in doc:
            raise ProviderError(f"/embed response lacks 'vector': {doc}")
        vector = np.asarray(doc["vector"], dtype=np.float64)
        if "dim" in doc and int(doc["dim"]) != vector.size:
            raise ProviderError(
                f"/embed dim field {doc['dim']} does not match vector length {vector.size}"
            )
        return vector

    def class_probs(self, frame: np.ndarray) -> np.ndarray:
        doc = self._post("/class_probs", {"image": encode_png_base64(frame)})
        if "probs" not in doc:
            raise ProviderError(f"/class_probs response lacks 'probs': {doc}")
        probs = np.asarray(doc["probs"], dtype=np.float64)
        if abs(float(probs.sum()) - 1.0) > 1e-6:
            raise ProviderError(f"/class_probs sum {probs.sum()} is not 1 within 1e-6")
        if "classes" in doc and int(doc["classes"]) != probs.size:
            raise ProviderError(
                f"/class_probs classes field {doc['classes']} does not match "
                f"vector length {probs.size}"
            )
        return probs

    def health(self) -> dict:
        import requests

        try:
            resp = requests.get(f"{self.base_url}/health", timeout=self.timeout)
            resp.raise_for_status()
            return resp.json()
        except requests.RequestException as exc:
            raise ProviderError(f"/health failed: {exc}") from exc


def make_provider(spec: str | None = None, seed: int = 0):
    """Build a provider from a mode string.

    ``"stub"`` (default), ``"file:<directory>"``, or an ``http(s)://`` base
    URL.  With ``spec=None`` the ``T2VQA_PROVIDER`` environment variable is
    consulted before falling back to the stub.
    """
    if spec is None:
        spec = os.environ.get(ENV_PROVIDER, "stub")
    if spec == "stub":
        return StubProvider(seed=seed)
    if spec.startswith("file:"):
        return FileProvider(spec[len("file:"):])
    if spec.startswith(("http://", "https://")):
        return HttpProvider(spec)
    raise ValueError(
        f"unknown provider spec {spec!r}; use 'stub', 'file:<dir>', or an http(s) URL"
    )
