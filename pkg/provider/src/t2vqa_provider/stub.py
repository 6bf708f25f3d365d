"""Deterministic stand-ins for the three model endpoints.

Every output is a pure function of the request bytes and the server seed:
hashing (keyed BLAKE2b in counter mode) replaces model inference, so two
servers configured identically produce byte-identical responses on any
platform.  No third-party dependencies.
"""

from __future__ import annotations

import hashlib
import math
import re
import struct

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"

#: Fixed caption vocabulary for stub mode; the image hash picks one entry.
CAPTION_PHRASES = (
    "a person standing in a brightly lit room",
    "a dog running across an open field",
    "a city street crowded with pedestrians",
    "a red car parked beside a tall building",
    "waves breaking against a rocky shoreline",
    "a bowl of fruit on a wooden table",
    "two children playing with a ball in a park",
    "a bird perched on a leafless branch",
    "a mountain range under a cloudy sky",
    "a cup of coffee next to an open laptop",
    "a cyclist riding along a tree-lined path",
    "a cat sleeping on a sunlit windowsill",
    "a group of people sitting around a campfire",
    "a sailboat drifting on calm water",
    "a plate of food photographed from above",
    "an empty train platform at dusk",
    "a field of flowers stretching to the horizon",
    "a man holding an umbrella in the rain",
    "a narrow alley between old brick houses",
    "a child blowing out candles on a cake",
    "a bridge spanning a wide river",
    "a bookshelf filled with worn paperbacks",
    "a horse grazing in a fenced pasture",
    "a snow-covered street with parked cars",
    "a market stall stacked with vegetables",
    "a plane flying low over rooftops",
    "a woman jogging along a beach at sunrise",
    "a ferris wheel lit up at night",
    "a desk cluttered with papers and pens",
    "a waterfall cascading into a clear pool",
    "a row of colorful houses on a hillside",
    "a musician playing guitar on a street corner",
)

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Lowercase alphanumeric tokens; the embedding treats them as a
    multiset, so order never matters downstream."""
    return _TOKEN_RE.findall(text.lower())


class StubModel:
    """Hash-based caption, embedding, and class-probability generator."""

    def __init__(self, seed: int = 0, embed_dim: int = 64, classes: int = 1000):
        if embed_dim < 1:
            raise ValueError("embed_dim must be >= 1")
        if classes < 2:
            raise ValueError("classes must be >= 2")
        self.seed = int(seed)
        self.embed_dim = int(embed_dim)
        self.classes = int(classes)
        self._key = struct.pack("<q", self.seed)

    def _unit_floats(self, label: bytes, data: bytes, n: int) -> list[float]:
        """``n`` floats in [0, 1) from a keyed hash of ``label + data``,
        extended counter-mode so any length is available."""
        out: list[float] = []
        counter = 0
        while len(out) < n:
            digest = hashlib.blake2b(
                label + struct.pack("<I", counter) + data,
                digest_size=32, key=self._key,
            ).digest()
            for i in range(0, 32, 8):
                if len(out) == n:
                    break
                (value,) = struct.unpack_from("<Q", digest, i)
                out.append(value / 2.0 ** 64)
            counter += 1
        return out

    def caption(self, image_bytes: bytes) -> str:
        digest = hashlib.blake2b(b"caption" + image_bytes, digest_size=8,
                                 key=self._key).digest()
        (value,) = struct.unpack("<Q", digest)
        return CAPTION_PHRASES[value % len(CAPTION_PHRASES)]

    def embed(self, text: str) -> list[float]:
        """Sum of per-token hash vectors in [-1, 1]^dim over the token
        multiset: order-invariant (tokens are accumulated in sorted order
        so reorderings are bit-identical), and repeating a token scales
        its contribution."""
        vector = [0.0] * self.embed_dim
        for token in sorted(tokenize(text)):
            unit = self._unit_floats(b"embed", token.encode("utf-8"), self.embed_dim)
            for i, u in enumerate(unit):
                vector[i] += 2.0 * u - 1.0
        return vector

    def class_probs(self, image_bytes: bytes) -> list[float]:
        logits = [6.0 * u - 3.0
                  for u in self._unit_floats(b"probs", image_bytes, self.classes)]
        top = max(logits)
        exps = [math.exp(v - top) for v in logits]
        total = sum(exps)
        return [v / total for v in exps]


def is_png(data: bytes) -> bool:
    return data.startswith(PNG_SIGNATURE)
