"""Class-distribution scores for a video's frames.

Frame-level class probability distributions are an external input (see the
provider protocol); this module reduces them to the classic
inception-style score and to a modified variant that rewards a video whose
mean distribution concentrates on few classes, obtained by replacing the
marginal with the uniform distribution.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from t2vqa.validation import check_probability_rows


def load_class_probs(path: str | Path) -> np.ndarray:
    """Read a ``{"classes": K, "frames": [[...], ...]}`` JSON file."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    probs = check_probability_rows(np.asarray(doc["frames"], dtype=np.float64))
    if probs.shape[1] != doc.get("classes"):
        raise ValueError(
            f"class_probs file {path}: rows have {probs.shape[1]} classes, "
            f"header says {doc.get('classes')}"
        )
    return probs


def save_class_probs(path: str | Path, probs: np.ndarray) -> None:
    probs = check_probability_rows(probs)
    doc = {"classes": int(probs.shape[1]), "frames": probs.tolist()}
    Path(path).write_text(json.dumps(doc) + "\n", encoding="utf-8")


def _entropy_nats(p: np.ndarray) -> float:
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))


def modified_inception_score(probs: np.ndarray) -> float:
    """``exp(KL(mean distribution || uniform))`` over a video's frames.

    Equals ``exp(log K - H(p_mean))``: 1.0 when the mean distribution is
    uniform, K when it is one-hot.  Larger values mean the classifier
    concentrated on few classes throughout the video.
    """
    probs = check_probability_rows(probs)
    k = probs.shape[1]
    p_mean = probs.mean(axis=0)
    return float(np.exp(np.log(k) - _entropy_nats(p_mean)))


def inception_score(probs: np.ndarray) -> float:
    """Classic inception score: ``exp(mean_i KL(p_i || p_mean))``."""
    probs = check_probability_rows(probs)
    p_mean = probs.mean(axis=0)
    kls = []
    for row in probs:
        mask = row > 0
        kls.append(float(np.sum(row[mask] * (np.log(row[mask]) - np.log(p_mean[mask])))))
    return float(np.exp(np.mean(kls)))
