"""Final quality score: a fitted linear blend of naturalness and text
similarity.

Weights come from ordinary least squares against human quality targets in
[0, 1]; scoring clamps the affine combination back into [0, 1].
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator


@dataclass(frozen=True)
class EnsembleWeights:
    """Affine weights over (naturalness, text_similarity)."""

    intercept: float
    w_naturalness: float
    w_textsim: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("intercept", "w_naturalness", "w_textsim"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def save(self, path: str | Path) -> None:
        doc = {
            "intercept": self.intercept,
            "w_naturalness": self.w_naturalness,
            "w_textsim": self.w_textsim,
            "meta": self.meta,
        }
        Path(path).write_text(json.dumps(doc, sort_keys=True) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "EnsembleWeights":
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
            return cls(
                intercept=float(doc["intercept"]),
                w_naturalness=float(doc["w_naturalness"]),
                w_textsim=float(doc["w_textsim"]),
                meta=dict(doc.get("meta", {})),
            )
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValueError(f"malformed ensemble weights file {path}: {exc}") from exc


@dataclass(frozen=True)
class VideoQualityResult:
    """One video's metric outputs; the ensemble score is clamped."""

    video_id: str
    naturalness: float
    text_similarity: float
    ensemble_score: float

    def __post_init__(self):
        if not 0.0 <= self.ensemble_score <= 1.0:
            raise ValueError("ensemble_score must lie in [0, 1]")


def fit_ensemble(rows, meta: dict | None = None) -> EnsembleWeights:
    """Exact least squares of human scores on (1, naturalness, similarity).

    ``rows`` holds ``(naturalness, text_similarity, human_score)`` triples,
    at least three of them; a rank-deficient design (e.g. constant
    predictors) is an error.
    """
    data = np.asarray(list(rows), dtype=np.float64)
    if data.ndim != 2 or data.shape[1] != 3:
        raise ValueError("rows must be (naturalness, similarity, human_score) triples")
    if data.shape[0] < 3:
        raise ValueError(f"need at least 3 rows to fit, got {data.shape[0]}")
    if not np.all(np.isfinite(data)):
        raise ValueError("rows contain non-finite values")
    X = np.column_stack([np.ones(data.shape[0]), data[:, 0], data[:, 1]])
    if np.linalg.matrix_rank(X) < 3:
        raise ValueError(
            "rank-deficient design matrix: predictors are collinear or constant"
        )
    beta, *_ = np.linalg.lstsq(X, data[:, 2], rcond=None)
    fit_meta = {"rows": int(data.shape[0])}
    fit_meta.update(meta or {})
    return EnsembleWeights(
        intercept=float(beta[0]), w_naturalness=float(beta[1]),
        w_textsim=float(beta[2]), meta=fit_meta,
    )


def score_video(nat: float, sim: float, weights: EnsembleWeights) -> float:
    """Clamped affine combination of the two metric outputs."""
    for name, value in (("nat", nat), ("sim", sim)):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} must be in [0, 1], got {value}")
    raw = weights.intercept + weights.w_naturalness * nat + weights.w_textsim * sim
    return float(min(1.0, max(0.0, raw)))


class LinearEnsembleCombiner(BaseEstimator):
    """Estimator-style wrapper: fit on (n, 2) predictor rows, predict
    clamped scores."""

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != 2:
            raise ValueError("X must be (n, 2): naturalness and text similarity")
        self.weights_ = fit_ensemble(np.column_stack([X, y]))
        return self

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return np.array([score_video(row[0], row[1], self.weights_) for row in X])
