"""Binary naturalness classifier: gradient-boosted regression trees.

Stagewise fitting against the logistic loss with second-order (Newton)
leaf weights ``w = -G / (H + lambda)`` and greedy gain-based splits

    gain = 1/2 * [G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - G^2/(H+lambda)]

No external learner is used; trees, split search, and prediction live
here.  Training is deterministic for a fixed seed: candidate splits are
enumerated over sorted distinct feature values (stable sort, ascending
feature index, ascending threshold), so models are invariant to row
permutation when subsampling is off.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator

from t2vqa import modelfile
from t2vqa.features.extract import FEATURE_COLUMNS, FeatureVector

_GAIN_EPS = 1e-12
# Two candidates whose gains agree to this relative tolerance are treated
# as tied, so the earliest candidate in scan order wins regardless of
# float summation noise (distinct candidates can induce the same row
# partition and therefore mathematically equal gains).
_TIE_REL_TOL = 1e-9


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of one boosted-tree fit."""

    n_trees: int = 100
    max_depth: int = 3
    learning_rate: float = 0.1
    min_child_weight: float = 1.0
    subsample: float = 1.0
    l2_reg: float = 1.0
    seed: int = 42

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must be in (0, 1]")
        if not 0.0 < self.subsample <= 1.0:
            raise ValueError("subsample must be in (0, 1]")
        if self.l2_reg < 0.0:
            raise ValueError("l2_reg must be >= 0")
        if self.min_child_weight < 0.0:
            raise ValueError("min_child_weight must be >= 0")


@dataclass(frozen=True)
class GbtModel:
    """A fitted ensemble: flat-node trees plus prediction metadata.

    Trees are tuples of node dicts; node 0 is the root, internal nodes
    hold ``{"feature", "threshold", "left", "right"}`` child indices and
    leaves hold ``{"leaf": value}``.  Prediction is
    ``sigmoid(base_score + learning_rate * sum(leaf values))``.
    """

    feature_names: tuple[str, ...]
    base_score: float
    learning_rate: float
    trees: tuple[tuple[dict, ...], ...]
    imputation: dict[str, float] = field(default_factory=dict)

    def predict_margin(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        margin = np.full(X.shape[0], self.base_score)
        for tree in self.trees:
            margin += self.learning_rate * _tree_predict(tree, X)
        return margin

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return _sigmoid(self.predict_margin(X))

    def impute_row(self, row: np.ndarray) -> np.ndarray:
        row = np.array(row, dtype=np.float64)
        for j, name in enumerate(self.feature_names):
            if np.isnan(row[j]):
                if name not in self.imputation:
                    raise ValueError(f"no imputation value recorded for feature {name!r}")
                row[j] = self.imputation[name]
        return row

    def to_json_dict(self) -> dict:
        return {
            "version": modelfile.FORMAT_VERSION,
            "kind": "gbt",
            "feature_names": list(self.feature_names),
            "base_score": self.base_score,
            "learning_rate": self.learning_rate,
            "imputation": {k: self.imputation[k] for k in sorted(self.imputation)},
            "trees": [{"nodes": list(tree)} for tree in self.trees],
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json_dict(), sort_keys=True) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "GbtModel":
        doc = modelfile.read_model(path, "gbt")
        try:
            return cls(
                feature_names=tuple(doc["feature_names"]),
                base_score=float(doc["base_score"]),
                learning_rate=float(doc["learning_rate"]),
                imputation={k: float(v) for k, v in doc.get("imputation", {}).items()},
                trees=tuple(tuple(t["nodes"]) for t in doc["trees"]),
            )
        except (KeyError, TypeError) as exc:
            raise modelfile.ModelFormatError(f"malformed gbt model {path}: {exc}") from exc


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _tree_predict(nodes: tuple[dict, ...], X: np.ndarray) -> np.ndarray:
    out = np.empty(X.shape[0])
    for i in range(X.shape[0]):
        node = nodes[0]
        while "leaf" not in node:
            if X[i, node["feature"]] < node["threshold"]:
                node = nodes[node["left"]]
            else:
                node = nodes[node["right"]]
        out[i] = node["leaf"]
    return out


def _best_split(X: np.ndarray, g: np.ndarray, h: np.ndarray, idx: np.ndarray,
                l2_reg: float, min_child_weight: float):
    """Greedy best split over all features and distinct-value midpoints.

    Returns ``(gain, feature, threshold)`` or ``None``.  Candidates are
    scanned in ascending feature then threshold order and only a gain
    larger than the incumbent's by a small relative margin replaces it,
    which fixes the tie-break (first maximum wins) even when equal-gain
    candidates are computed with different rounding.
    """
    g_total = float(g[idx].sum())
    h_total = float(h[idx].sum())
    parent_term = g_total * g_total / (h_total + l2_reg)
    best = None
    for feature in range(X.shape[1]):
        values = X[idx, feature]
        order = np.argsort(values, kind="stable")
        sorted_vals = values[order]
        cum_g = np.cumsum(g[idx][order])
        cum_h = np.cumsum(h[idx][order])
        distinct = np.nonzero(sorted_vals[:-1] < sorted_vals[1:])[0]
        for i in distinct:
            h_left = float(cum_h[i])
            h_right = h_total - h_left
            if h_left < min_child_weight or h_right < min_child_weight:
                continue
            g_left = float(cum_g[i])
            g_right = g_total - g_left
            gain = 0.5 * (
                g_left * g_left / (h_left + l2_reg)
                + g_right * g_right / (h_right + l2_reg)
                - parent_term
            )
            if gain > _GAIN_EPS and (
                best is None or gain > best[0] + _TIE_REL_TOL * max(1.0, abs(best[0]))
            ):
                threshold = 0.5 * (float(sorted_vals[i]) + float(sorted_vals[i + 1]))
                best = (gain, feature, threshold)
    return best


def _build_tree(X: np.ndarray, g: np.ndarray, h: np.ndarray, idx: np.ndarray,
                config: TrainConfig) -> list[dict]:
    nodes: list[dict] = []

    def grow(node_idx: np.ndarray, depth: int) -> int:
        position = len(nodes)
        split = None
        if depth < config.max_depth and node_idx.size >= 2:
            split = _best_split(X, g, h, node_idx, config.l2_reg, config.min_child_weight)
        if split is None:
            g_sum = float(g[node_idx].sum())
            h_sum = float(h[node_idx].sum())
            nodes.append({"leaf": -g_sum / (h_sum + config.l2_reg)})
            return position
        gain, feature, threshold = split
        nodes.append({"feature": feature, "threshold": threshold, "left": -1, "right": -1})
        left_mask = X[node_idx, feature] < threshold
        nodes[position]["left"] = grow(node_idx[left_mask], depth + 1)
        nodes[position]["right"] = grow(node_idx[~left_mask], depth + 1)
        return position

    grow(idx, 0)
    return nodes


def logistic_loss(y: np.ndarray, margin: np.ndarray) -> float:
    """Mean logistic loss of raw margins against 0/1 labels."""
    return float(np.mean(np.log1p(np.exp(-np.abs(margin))) + np.maximum(margin, 0) - margin * y))


def train_gbt(X: np.ndarray, y: np.ndarray, config: TrainConfig = TrainConfig(),
              feature_names: tuple[str, ...] | None = None,
              imputation: dict[str, float] | None = None) -> tuple[GbtModel, list[float]]:
    """Fit the boosted ensemble; returns the model and the per-round
    training-loss curve (length ``n_trees + 1``, including the initial loss).

    ``X`` must be NaN-free (impute first); ``y`` holds 0/1 labels with both
    classes present.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError(f"X {X.shape} and y {y.shape} do not align")
    if np.any(np.isnan(X)):
        raise ValueError("X contains NaN after imputation")
    classes = np.unique(y)
    if not np.array_equal(classes, [0.0, 1.0]):
        if classes.size == 1:
            raise ValueError("training set holds a single class; need both labels")
        raise ValueError(f"labels must be 0/1, got {classes}")
    if feature_names is None:
        feature_names = tuple(f"f{j}" for j in range(X.shape[1]))
    if len(feature_names) != X.shape[1]:
        raise ValueError("feature_names length does not match X columns")

    n = X.shape[0]
    rng = np.random.default_rng(config.seed)
    base_score = 0.0
    margin = np.full(n, base_score)
    trees: list[tuple[dict, ...]] = []
    loss_curve = [logistic_loss(y, margin)]

    for _ in range(config.n_trees):
        p = _sigmoid(margin)
        g = p - y
        h = p * (1.0 - p)
        if config.subsample < 1.0:
            m = max(1, int(math.floor(n * config.subsample)))
            idx = np.sort(rng.choice(n, size=m, replace=False))
        else:
            idx = np.arange(n)
        nodes = _build_tree(X, g, h, idx, config)
        tree = tuple(nodes)
        trees.append(tree)
        margin += config.learning_rate * _tree_predict(tree, X)
        loss_curve.append(logistic_loss(y, margin))

    model = GbtModel(
        feature_names=tuple(feature_names),
        base_score=base_score,
        learning_rate=config.learning_rate,
        trees=tuple(trees),
        imputation=dict(imputation or {}),
    )
    return model, loss_curve


def predict_naturalness(model: GbtModel, features) -> float:
    """Continuous naturalness score in (0, 1) for one video.

    ``features`` may be a :class:`FeatureVector`, a name->value mapping, or
    a dense row aligned with ``model.feature_names``.  Mappings must cover
    exactly the model's features (missing values may be NaN and are
    imputed); unknown names are an error.
    """
    if isinstance(features, FeatureVector):
        row = np.array([features.values.get(n, np.nan) for n in model.feature_names])
    elif isinstance(features, dict):
        extra = set(features) - set(model.feature_names)
        if extra:
            raise ValueError(f"unknown feature names: {sorted(extra)}")
        missing = set(model.feature_names) - set(features)
        if missing:
            raise ValueError(f"missing feature names: {sorted(missing)}")
        row = np.array([features[n] for n in model.feature_names], dtype=np.float64)
    else:
        row = np.asarray(features, dtype=np.float64)
        if row.shape != (len(model.feature_names),):
            raise ValueError(
                f"feature row of shape {row.shape} does not match the model's "
                f"{len(model.feature_names)} features"
            )
    row = model.impute_row(row)
    return float(model.predict_proba(row[None, :])[0])


def classify_threshold(score: float, threshold: float = 0.5) -> int:
    """Binarize a naturalness score; the boundary value maps to 1."""
    if not 0.0 <= score <= 1.0:
        raise ValueError(f"score {score} outside [0, 1]")
    return 1 if score >= threshold else 0


def f1_score(predictions, labels) -> float:
    """F1 over binary lists; 0.0 when the denominator vanishes."""
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if predictions.shape != labels.shape or predictions.ndim != 1:
        raise ValueError(
            f"predictions {predictions.shape} and labels {labels.shape} must be "
            "equal-length 1-D sequences"
        )
    if predictions.size == 0:
        raise ValueError("need at least one example")
    tp = int(np.sum((predictions == 1) & (labels == 1)))
    fp = int(np.sum((predictions == 1) & (labels == 0)))
    fn = int(np.sum((predictions == 0) & (labels == 1)))
    denom = 2 * tp + fp + fn
    return 0.0 if denom == 0 else 2.0 * tp / denom


class GradientBoostedNaturalnessClassifier(BaseEstimator):
    """Estimator-style front end over :func:`train_gbt`.

    Parameters mirror :class:`TrainConfig`; ``fit`` imputes NaN cells with
    the training median per feature and records those medians in the model
    for prediction time.
    """

    def __init__(self, n_trees: int = 100, max_depth: int = 3,
                 learning_rate: float = 0.1, min_child_weight: float = 1.0,
                 subsample: float = 1.0, l2_reg: float = 1.0, seed: int = 42):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.min_child_weight = min_child_weight
        self.subsample = subsample
        self.l2_reg = l2_reg
        self.seed = seed

    def _config(self) -> TrainConfig:
        return TrainConfig(
            n_trees=self.n_trees, max_depth=self.max_depth,
            learning_rate=self.learning_rate, min_child_weight=self.min_child_weight,
            subsample=self.subsample, l2_reg=self.l2_reg, seed=self.seed,
        )

    def fit(self, X, y, feature_names: tuple[str, ...] | None = None):
        X = np.asarray(X, dtype=np.float64)
        if feature_names is None:
            feature_names = tuple(f"f{j}" for j in range(X.shape[1]))
        imputation = {}
        X_filled = X.copy()
        for j, name in enumerate(feature_names):
            col = X_filled[:, j]
            mask = np.isnan(col)
            if np.any(mask):
                if np.all(mask):
                    raise ValueError(f"feature {name!r} has no observed training values")
                median = float(np.nanmedian(col))
                col[mask] = median
                imputation[name] = median
        self.model_, self.train_loss_curve_ = train_gbt(
            X_filled, y, self._config(), feature_names, imputation
        )
        return self

    def predict_proba(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        X = np.vstack([self.model_.impute_row(row) for row in X])
        return self.model_.predict_proba(X)

    def predict(self, X, threshold: float = 0.5) -> np.ndarray:
        return (self.predict_proba(X) >= threshold).astype(int)


@dataclass(frozen=True)
class LabelledSet:
    """Feature rows with 0/1 labels and train/val/test split tags."""

    X: np.ndarray
    y: np.ndarray
    split: np.ndarray
    feature_names: tuple[str, ...]
    video_ids: tuple[str, ...] = ()

    SPLITS = ("train", "val", "test")

    def __post_init__(self):
        if not (len(self.X) == len(self.y) == len(self.split)):
            raise ValueError("X, y, and split must have equal length")
        bad = set(np.unique(self.split)) - set(self.SPLITS)
        if bad:
            raise ValueError(f"unknown split tags: {sorted(bad)} (use train/val/test)")
        if self.video_ids and len(set(self.video_ids)) != len(self.video_ids):
            raise ValueError("duplicate video ids across splits")

    def part(self, tag: str) -> tuple[np.ndarray, np.ndarray]:
        mask = self.split == tag
        return self.X[mask], self.y[mask]


def load_labelled_csv(path: str | Path) -> LabelledSet:
    """Read a labelled feature table.

    Expected columns: optional ``video_id``, one column per feature,
    ``label`` (0/1), and ``split`` (train/val/test).  Empty feature cells
    become NaN and are median-imputed at training time.
    """
    import csv

    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row and not row[0].startswith("#")]
    if not rows:
        raise ValueError(f"{path} is empty")
    header = rows[0]
    for required in ("label", "split"):
        if required not in header:
            raise ValueError(f"{path} lacks required column {required!r}")
    reserved = {"video_id", "label", "split"}
    feature_names = tuple(c for c in header if c not in reserved)
    if not feature_names:
        raise ValueError(f"{path} has no feature columns")
    col = {name: header.index(name) for name in header}

    X = np.full((len(rows) - 1, len(feature_names)), np.nan)
    y = np.empty(len(rows) - 1)
    split = np.empty(len(rows) - 1, dtype=object)
    video_ids = []
    for i, row in enumerate(rows[1:]):
        if len(row) != len(header):
            raise ValueError(f"{path} row {i + 2}: expected {len(header)} cells, got {len(row)}")
        for j, name in enumerate(feature_names):
            cell = row[col[name]].strip()
            if cell:
                X[i, j] = float(cell)
        y[i] = float(row[col["label"]])
        if y[i] not in (0.0, 1.0):
            raise ValueError(f"{path} row {i + 2}: label must be 0 or 1")
        split[i] = row[col["split"]].strip()
        if "video_id" in col:
            video_ids.append(row[col["video_id"]])
    return LabelledSet(X=X, y=y, split=split.astype(str), feature_names=feature_names,
                       video_ids=tuple(video_ids))


def split_pool(labels: np.ndarray, seed: int = 42,
               fractions: tuple[float, float, float] = (0.6, 0.2, 0.2)) -> np.ndarray:
    """Assign train/val/test tags, stratified by label, 60/20/20 by default."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    tags = np.empty(labels.shape[0], dtype=object)
    for cls in np.unique(labels):
        idx = np.nonzero(labels == cls)[0]
        idx = idx[rng.permutation(idx.size)]
        n_train = int(round(fractions[0] * idx.size))
        n_val = int(round(fractions[1] * idx.size))
        tags[idx[:n_train]] = "train"
        tags[idx[n_train:n_train + n_val]] = "val"
        tags[idx[n_train + n_val:]] = "test"
    return tags.astype(str)


DEFAULT_GRID = {
    "n_trees": (50, 100, 200),
    "max_depth": (2, 3, 4),
    "learning_rate": (0.1, 0.3),
    "l2_reg": (1.0,),
}


@dataclass(frozen=True)
class GridSearchReport:
    best_config: TrainConfig
    train_f1: float
    val_f1: float
    test_f1: float
    table: tuple[tuple[TrainConfig, float], ...]


def grid_search(data: LabelledSet, grid: dict | None = None,
                base_config: TrainConfig = TrainConfig(),
                threshold: float = 0.5) -> tuple[GbtModel, GridSearchReport]:
    """Train every grid point on the train split and pick the best
    validation F1.

    Ties break toward fewer trees, then shallower trees, then earlier
    enumeration order (the grid expands in the key order of
    ``DEFAULT_GRID`` with ascending values).
    """
    grid = dict(DEFAULT_GRID if grid is None else grid)
    for key in grid:
        if key not in TrainConfig.__dataclass_fields__:
            raise ValueError(f"unknown grid parameter {key!r}")
        if not grid[key]:
            raise ValueError(f"empty grid for parameter {key!r}")
    for tag in LabelledSet.SPLITS:
        if not np.any(data.split == tag):
            raise ValueError(f"empty {tag!r} split")

    X_train, y_train = data.part("train")
    X_val, y_val = data.part("val")
    X_test, y_test = data.part("test")

    # Impute every split with the training-split medians.
    imputation: dict[str, float] = {}
    X_train = X_train.copy()
    X_val = X_val.copy()
    X_test = X_test.copy()
    for j, name in enumerate(data.feature_names):
        if np.any(np.isnan(X_train[:, j])) or np.any(np.isnan(X_val[:, j])) \
                or np.any(np.isnan(X_test[:, j])):
            median = float(np.nanmedian(X_train[:, j]))
            if np.isnan(median):
                raise ValueError(f"feature {name!r} has no observed training values")
            for block in (X_train, X_val, X_test):
                col = block[:, j]
                col[np.isnan(col)] = median
            imputation[name] = median

    keys = list(grid.keys())
    candidates = []
    for combo in itertools.product(*(grid[k] for k in keys)):
        candidates.append(replace(base_config, **dict(zip(keys, combo))))

    best = None  # (neg-ranking tuple, model, config, val_f1)
    table = []
    for order, config in enumerate(candidates):
        model, _ = train_gbt(X_train, y_train, config, data.feature_names, imputation)
        val_pred = (model.predict_proba(X_val) >= threshold).astype(int)
        val_f1 = f1_score(val_pred, y_val.astype(int))
        table.append((config, val_f1))
        rank = (-val_f1, config.n_trees, config.max_depth, order)
        if best is None or rank < best[0]:
            best = (rank, model, config, val_f1)

    _, model, config, val_f1 = best
    train_pred = (model.predict_proba(X_train) >= threshold).astype(int)
    test_pred = (model.predict_proba(X_test) >= threshold).astype(int)
    report = GridSearchReport(
        best_config=config,
        train_f1=f1_score(train_pred, y_train.astype(int)),
        val_f1=val_f1,
        test_f1=f1_score(test_pred, y_test.astype(int)),
        table=tuple(table),
    )
    return model, report
