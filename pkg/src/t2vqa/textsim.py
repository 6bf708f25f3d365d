"""Prompt-to-caption similarity scoring.

Two complementary signals per caption: a surface bag-of-words cosine over
stopword-filtered term frequencies, and an embedding cosine from a
pluggable provider.  They combine linearly — ``0.25*cos + 0.75*emb`` when
the surface cosine is nonzero, else ``0.5*emb`` — and aggregate to a
video-level score that weights each caption by how often it recurs across
frames, down-weighting one-off outlier captions.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

# Common English function words dropped before the surface cosine.  The
# list is fixed so that scores are reproducible across environments.
STOPWORDS = frozenset("""
a about above after again against all am an and any are as at be because
been before being below between both but by can did do does doing down
during each few for from further had has have having he her here hers
herself him himself his how i if in into is it its itself just me more
most my myself no nor not now of off on once only or other our ours
ourselves out over own same she should so some such than that the their
theirs them themselves then there these they this those through to too
under until up very was we were what when where which while who whom why
will with you your yours yourself yourselves
""".split())

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Lowercase, split on non-alphanumerics, drop stopwords."""
    return [t for t in _TOKEN_RE.findall(text.lower()) if t not in STOPWORDS]


def bow_cosine(a: str, b: str) -> float:
    """Term-frequency cosine of two sentences after stopword removal.

    Returns 0.0 when either side has no content tokens left.
    """
    if not a or not b:
        raise ValueError("bow_cosine requires non-empty strings")
    ta, tb = Counter(tokenize(a)), Counter(tokenize(b))
    if not ta or not tb:
        return 0.0
    dot = sum(ta[w] * tb[w] for w in ta.keys() & tb.keys())
    norm = math.sqrt(sum(v * v for v in ta.values())) * math.sqrt(
        sum(v * v for v in tb.values())
    )
    return dot / norm


def embedding_cosine(a: str, b: str, provider) -> float:
    """Cosine of the provider's sentence embeddings, clamped to [0, 1].

    Provider failures propagate; a zero-norm embedding scores 0.0 rather
    than raising.
    """
    va = np.asarray(provider.embed(a), dtype=np.float64)
    vb = np.asarray(provider.embed(b), dtype=np.float64)
    na, nb = float(np.linalg.norm(va)), float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(min(1.0, max(0.0, float(va @ vb) / (na * nb))))


def combined_similarity(cos_sim: float, emb_sim: float,
                        emb_weight: float = 0.75,
                        fallback_weight: float = 0.5) -> float:
    """Blend the surface and embedding similarities.

    With a nonzero surface cosine the result is
    ``(1 - emb_weight) * cos_sim + emb_weight * emb_sim``; when the surface
    cosine is exactly zero (no shared content words) only the embedding
    counts, scaled by ``fallback_weight``.
    """
    for name, value in (("cos_sim", cos_sim), ("emb_sim", emb_sim)):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} must be in [0, 1], got {value}")
    if cos_sim != 0.0:
        return (1.0 - emb_weight) * cos_sim + emb_weight * emb_sim
    return fallback_weight * emb_sim


@dataclass(frozen=True)
class CaptionSet:
    """Ordered per-frame captions; duplicates are meaningful."""

    captions: tuple[str, ...]

    def __post_init__(self):
        if not self.captions:
            raise ValueError("CaptionSet needs at least one caption")
        if any(not c for c in self.captions):
            raise ValueError("captions must be non-empty strings")

    @property
    def n(self) -> int:
        return len(self.captions)


@dataclass(frozen=True)
class CaptionSimilarity:
    caption: str
    cos_sim: float
    emb_sim: float
    combined_sim: float
    weight: float


@dataclass(frozen=True)
class SimilarityReport:
    """Per-caption similarity rows plus the weighted video-level score."""

    per_caption: tuple[CaptionSimilarity, ...]
    video_score: float


def video_text_similarity(prompt: str, captions: CaptionSet, provider,
                          emb_weight: float = 0.75,
                          fallback_weight: float = 0.5) -> SimilarityReport:
    """Score a whole video's captions against its prompt.

    Each frame contributes ``w_i * sim_i`` where ``w_i`` is the fraction of
    frames sharing that caption; the video score is the mean of those
    contributions.  Repeated captions therefore dominate, and a caption
    unique among n frames is discounted by 1/n.
    """
    if not prompt:
        raise ValueError("prompt must be non-empty")
    n = captions.n
    counts = Counter(captions.captions)
    sim_cache: dict[str, tuple[float, float, float]] = {}
    for caption in counts:
        cos = bow_cosine(prompt, caption)
        emb = embedding_cosine(prompt, caption, provider)
        sim_cache[caption] = (cos, emb,
                              combined_similarity(cos, emb, emb_weight, fallback_weight))
    rows = []
    total = 0.0
    for caption in captions.captions:
        cos, emb, combined = sim_cache[caption]
        weight = counts[caption] / n
        rows.append(CaptionSimilarity(caption, cos, emb, combined, weight))
        total += weight * combined
    return SimilarityReport(per_caption=tuple(rows), video_score=total / n)


def save_captions(path: str | Path, captions: CaptionSet) -> None:
    """Write one ``{"frame": i, "caption": ...}`` JSON object per line."""
    lines = [
        json.dumps({"frame": i, "caption": c}, sort_keys=True)
        for i, c in enumerate(captions.captions)
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_captions(path: str | Path) -> CaptionSet:
    path = Path(path)
    entries: dict[int, str] = {}
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            frame, caption = int(obj["frame"]), str(obj["caption"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"{path}:{line_no}: bad caption record: {exc}") from exc
        if frame in entries:
            raise ValueError(f"{path}:{line_no}: duplicate frame index {frame}")
        entries[frame] = caption
    if not entries or sorted(entries) != list(range(len(entries))):
        raise ValueError(f"{path}: frame indices must cover 0..n-1 exactly")
    return CaptionSet(tuple(entries[i] for i in range(len(entries))))


def caption_video(video, provider, cache_path: str | Path | None = None,
                  max_workers: int = 4) -> CaptionSet:
    """Caption every frame via the provider, order-preserving.

    With ``cache_path`` set, an existing well-formed cache for the same
    frame count is returned without touching the provider, and fresh
    results are written back for the next run.  Captioning runs on a
    bounded thread pool; any per-frame failure aborts with the frame index.
    """
    if cache_path is not None:
        cache_path = Path(cache_path)
        if cache_path.exists():
            cached = load_captions(cache_path)
            if cached.n != video.n_frames:
                raise ValueError(
                    f"{cache_path} holds {cached.n} captions but the video has "
                    f"{video.n_frames} frames"
                )
            return cached

    def one(i: int) -> str:
        try:
            return str(provider.caption(video.frames[i]))
        except Exception as exc:
            from t2vqa.providers import ProviderError

            raise ProviderError(f"captioning failed at frame {i}: {exc}") from exc

    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as pool:
        captions = tuple(pool.map(one, range(video.n_frames)))
    result = CaptionSet(captions)
    if cache_path is not None:
        save_captions(cache_path, result)
    return result
