"""Human-rating analytics: opinion-score adjustment, per-model statistics,
Tukey HSD multiple comparison, prompt-length bucketing, and rank
agreement.

The adjustment pipeline per rating group: shift every score so the group
mean lands on the scale midpoint 5, z-score with the group's own standard
deviation, clip z to ±k, and map back to score units.  Because the
z transform round-trips exactly, this is implemented as clipping in score
units at mean ± k·sigma, which keeps untouched scores bit-identical.
Adjusted values may leave [1, 10]; downstream combined scores clamp into
[0, 1] and count how often that happened.
"""

from __future__ import annotations

import csv
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats as _sstats

ASPECTS = ("alignment", "perception")
RATINGS_COLUMNS = ("video_id", "model_name", "prompt", "annotator_id", "aspect", "score")
MID_SCORE = 5.0


# --------------------------------------------------------------------------
# Ratings table


@dataclass(frozen=True)
class RatingRow:
    video_id: str
    model_name: str
    prompt: str
    annotator_id: str
    aspect: str
    score: float


@dataclass(frozen=True)
class RatingsTable:
    """Raw ratings; one row per (video, annotator, aspect, round)."""

    rows: tuple[RatingRow, ...]

    def __post_init__(self):
        if not self.rows:
            raise ValueError("ratings table is empty")
        video_model: dict[str, str] = {}
        video_prompt: dict[str, str] = {}
        for row in self.rows:
            if row.aspect not in ASPECTS:
                raise ValueError(
                    f"unknown aspect {row.aspect!r} for video {row.video_id!r}; "
                    f"expected one of {ASPECTS}"
                )
            if not 1.0 <= row.score <= 10.0:
                raise ValueError(
                    f"score {row.score} for video {row.video_id!r} outside [1, 10]"
                )
            if video_model.setdefault(row.video_id, row.model_name) != row.model_name:
                raise ValueError(f"video {row.video_id!r} maps to two model names")
            if video_prompt.setdefault(row.video_id, row.prompt) != row.prompt:
                raise ValueError(f"video {row.video_id!r} maps to two prompts")

    @property
    def models(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for row in self.rows:
            seen.setdefault(row.model_name)
        return tuple(seen)

    def prompts(self) -> dict[str, str]:
        return {row.video_id: row.prompt for row in self.rows}

    @classmethod
    def from_csv(cls, path: str | Path) -> "RatingsTable":
        path = Path(path)
        with path.open(newline="", encoding="utf-8") as fh:
            raw = [row for row in csv.reader(fh) if row and not row[0].startswith("#")]
        if not raw:
            raise ValueError(f"{path} is empty")
        if tuple(raw[0]) != RATINGS_COLUMNS:
            raise ValueError(
                f"{path} header {raw[0]} does not match {list(RATINGS_COLUMNS)}"
            )
        rows = []
        for i, cells in enumerate(raw[1:], start=2):
            if len(cells) != len(RATINGS_COLUMNS):
                raise ValueError(f"{path} row {i}: expected {len(RATINGS_COLUMNS)} cells")
            try:
                score = float(cells[5])
            except ValueError as exc:
                raise ValueError(f"{path} row {i}: bad score {cells[5]!r}") from exc
            rows.append(RatingRow(cells[0], cells[1], cells[2], cells[3], cells[4], score))
        return cls(tuple(rows))


# --------------------------------------------------------------------------
# Score adjustment


@dataclass(frozen=True)
class AdjustedScores:
    """One group's adjusted scores plus the statistics that produced them."""

    adjusted: tuple[float, ...]
    pid_delta: float
    mean: float
    std: float


def adjust_scores(raw, k_outlier: float = 3.0) -> AdjustedScores:
    """Shift a score group onto midpoint 5, then clip at mean ± k·sigma.

    With zero spread the scores pass through unchanged after the shift;
    ``k_outlier=inf`` reduces to the pure shift.
    """
    values = np.asarray(list(raw), dtype=np.float64)
    if values.size == 0:
        raise ValueError("adjust_scores needs at least one score")
    if not np.all(np.isfinite(values)):
        raise ValueError("scores must be finite")
    if k_outlier < 0:
        raise ValueError("k_outlier must be >= 0")
    pid_delta = MID_SCORE - float(values.mean())
    shifted = values + pid_delta
    mu = float(shifted.mean())
    sigma = float(shifted.std())
    if sigma == 0.0 or math.isinf(k_outlier):
        adjusted = shifted
    else:
        adjusted = np.clip(shifted, mu - k_outlier * sigma, mu + k_outlier * sigma)
    return AdjustedScores(
        adjusted=tuple(float(v) for v in adjusted),
        pid_delta=pid_delta, mean=mu, std=sigma,
    )


@dataclass(frozen=True)
class AdjustedRow:
    video_id: str
    model_name: str
    prompt: str
    annotator_id: str
    aspect: str
    raw_score: float
    adjusted_score: float


ADJUST_GROUPS = ("per-annotator", "global")


def deduplicate_rounds(table: RatingsTable) -> tuple[RatingRow, ...]:
    """Average repeated ratings per (video, annotator, aspect)."""
    grouped: dict[tuple[str, str, str], list[RatingRow]] = defaultdict(list)
    for row in table.rows:
        grouped[(row.video_id, row.annotator_id, row.aspect)].append(row)
    out = []
    for rows in grouped.values():
        first = rows[0]
        score = float(np.mean([r.score for r in rows]))
        out.append(RatingRow(first.video_id, first.model_name, first.prompt,
                             first.annotator_id, first.aspect, score))
    return tuple(out)


def adjust_table(table: RatingsTable, k_outlier: float = 3.0,
                 group: str = "per-annotator") -> tuple[AdjustedRow, ...]:
    """Deduplicate rating rounds, then adjust scores group-by-group.

    ``group`` picks the normalization pool: ``per-annotator`` adjusts each
    (annotator, aspect) slice — removing individual scale bias — while
    ``global`` pools all annotators within an aspect.
    """
    if group not in ADJUST_GROUPS:
        raise ValueError(f"group must be one of {ADJUST_GROUPS}, got {group!r}")
    rows = deduplicate_rounds(table)
    pools: dict[tuple, list[int]] = defaultdict(list)
    for i, row in enumerate(rows):
        key = (row.annotator_id, row.aspect) if group == "per-annotator" else (row.aspect,)
        pools[key].append(i)
    adjusted = [0.0] * len(rows)
    for indices in pools.values():
        result = adjust_scores([rows[i].score for i in indices], k_outlier)
        for i, value in zip(indices, result.adjusted):
            adjusted[i] = value
    return tuple(
        AdjustedRow(r.video_id, r.model_name, r.prompt, r.annotator_id, r.aspect,
                    r.score, adjusted[i])
        for i, r in enumerate(rows)
    )


# --------------------------------------------------------------------------
# Per-model statistics


@dataclass(frozen=True)
class VideoScore:
    """Adjusted per-video scores: one MOS per aspect plus the combined
    [0, 1] value."""

    video_id: str
    model_name: str
    prompt: str
    alignment_mos: float
    perception_mos: float
    combined: float
    clamped: bool


@dataclass(frozen=True)
class ModelStats:
    alignment_mean: float
    alignment_std: float
    perception_mean: float
    perception_std: float
    combined: float
    n_videos: int
    n_clamped: int


def video_scores(table: RatingsTable, k_outlier: float = 3.0,
                 group: str = "per-annotator") -> tuple[VideoScore, ...]:
    """Adjusted MOS per (video, aspect) and the combined [0, 1] score.

    MOS = mean over annotators of the adjusted score; combined = mean of
    the two aspect MOS values divided by 10, clamped into [0, 1].
    """
    rows = adjust_table(table, k_outlier, group)
    by_video: dict[str, dict[str, list[float]]] = defaultdict(lambda: defaultdict(list))
    meta: dict[str, tuple[str, str]] = {}
    for row in rows:
        by_video[row.video_id][row.aspect].append(row.adjusted_score)
        meta[row.video_id] = (row.model_name, row.prompt)
    out = []
    for video_id in sorted(by_video):
        aspects = by_video[video_id]
        missing = [a for a in ASPECTS if a not in aspects]
        if missing:
            raise ValueError(f"video {video_id!r} lacks aspect(s) {missing}")
        align = float(np.mean(aspects["alignment"]))
        perc = float(np.mean(aspects["perception"]))
        raw_combined = (align + perc) / 2.0 / 10.0
        combined = float(min(1.0, max(0.0, raw_combined)))
        model_name, prompt = meta[video_id]
        out.append(VideoScore(video_id, model_name, prompt, align, perc, combined,
                              clamped=combined != raw_combined))
    return tuple(out)


def model_stats(table: RatingsTable, k_outlier: float = 3.0,
                group: str = "per-annotator") -> dict[str, ModelStats]:
    """Mean/std of adjusted MOS per aspect over each model's videos, plus
    the mean combined score.  Standard deviations use the n−1 divisor and
    are 0 for a single video."""
    per_video = video_scores(table, k_outlier, group)
    by_model: dict[str, list[VideoScore]] = defaultdict(list)
    for vs in per_video:
        by_model[vs.model_name].append(vs)
    out = {}
    for model in table.models:
        videos = by_model[model]
        align = np.array([v.alignment_mos for v in videos])
        perc = np.array([v.perception_mos for v in videos])
        combined = np.array([v.combined for v in videos])
        out[model] = ModelStats(
            alignment_mean=float(align.mean()),
            alignment_std=float(align.std(ddof=1)) if align.size > 1 else 0.0,
            perception_mean=float(perc.mean()),
            perception_std=float(perc.std(ddof=1)) if perc.size > 1 else 0.0,
            combined=float(combined.mean()),
            n_videos=len(videos),
            n_clamped=sum(v.clamped for v in videos),
        )
    return out


# --------------------------------------------------------------------------
# Tukey HSD with an embedded studentized-range table

# Critical values of the studentized range distribution, upper tail, for
# k = 2..10 groups.  Rows are error degrees of freedom; generated once from
# the exact distribution and frozen here so the toolkit needs no special
# functions at run time.
_Q_DF = (2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20,
         24, 30, 40, 60, 120)
_Q_K_MIN, _Q_K_MAX = 2, 10

_Q_TABLE_05 = np.array([
    [6.0849, 8.3308, 9.7980, 10.8811, 11.7343, 12.4349, 13.0273, 13.5390, 13.9885],
    [4.5007, 5.9096, 6.8245, 7.5017, 8.0371, 8.4783, 8.8525, 9.1766, 9.4620],
    [3.9265, 5.0402, 5.7571, 6.2870, 6.7064, 7.0526, 7.3465, 7.6015, 7.8263],
    [3.6354, 4.6017, 5.2183, 5.6731, 6.0329, 6.3299, 6.5823, 6.8014, 6.9947],
    [3.4605, 4.3392, 4.8956, 5.3049, 5.6284, 5.8953, 6.1222, 6.3192, 6.4931],
    [3.3441, 4.1649, 4.6813, 5.0601, 5.3591, 5.6057, 5.8153, 5.9973, 6.1579],
    [3.2612, 4.0410, 4.5288, 4.8858, 5.1672, 5.3991, 5.5962, 5.7673, 5.9183],
    [3.1992, 3.9485, 4.4149, 4.7554, 5.0235, 5.2444, 5.4319, 5.5947, 5.7384],
    [3.1511, 3.8768, 4.3266, 4.6543, 4.9120, 5.1242, 5.3042, 5.4605, 5.5984],
    [3.1127, 3.8196, 4.2561, 4.5736, 4.8230, 5.0281, 5.2021, 5.3531, 5.4863],
    [3.0813, 3.7729, 4.1987, 4.5077, 4.7502, 4.9496, 5.1187, 5.2653, 5.3946],
    [3.0552, 3.7341, 4.1509, 4.4529, 4.6897, 4.8842, 5.0491, 5.1921, 5.3181],
    [3.0332, 3.7014, 4.1105, 4.4066, 4.6385, 4.8290, 4.9903, 5.1301, 5.2534],
    [3.0143, 3.6734, 4.0760, 4.3670, 4.5947, 4.7816, 4.9399, 5.0770, 5.1979],
    [2.9980, 3.6491, 4.0461, 4.3327, 4.5568, 4.7406, 4.8962, 5.0310, 5.1498],
    [2.9837, 3.6280, 4.0200, 4.3027, 4.5237, 4.7048, 4.8580, 4.9907, 5.1077],
    [2.9712, 3.6093, 3.9970, 4.2763, 4.4944, 4.6731, 4.8243, 4.9552, 5.0705],
    [2.9600, 3.5927, 3.9766, 4.2528, 4.4685, 4.6450, 4.7944, 4.9236, 5.0375],
    [2.9500, 3.5779, 3.9583, 4.2319, 4.4452, 4.6199, 4.7676, 4.8954, 5.0079],
    [2.9188, 3.5317, 3.9013, 4.1663, 4.3727, 4.5413, 4.6838, 4.8069, 4.9152],
    [2.8882, 3.4864, 3.8454, 4.1021, 4.3015, 4.4642, 4.6014, 4.7199, 4.8241],
    [2.8582, 3.4421, 3.7907, 4.0391, 4.2316, 4.3885, 4.5205, 4.6345, 4.7345],
    [2.8288, 3.3987, 3.7371, 3.9774, 4.1632, 4.3141, 4.4411, 4.5504, 4.6463],
    [2.8000, 3.3561, 3.6846, 3.9169, 4.0960, 4.2412, 4.3630, 4.4678, 4.5595],
])
_Q_INF_05 = np.array([2.7718, 3.3145, 3.6332, 3.8577, 4.0301, 4.1696, 4.2863,
                      4.3865, 4.4741])

_Q_TABLE_01 = np.array([
    [14.0358, 19.0189, 22.2937, 24.7172, 26.6290, 28.2006, 29.5301, 30.6794, 31.6894],
    [8.2603, 10.6185, 12.1695, 13.3243, 14.2407, 14.9978, 15.6410, 16.1990, 16.6908],
    [6.5112, 8.1198, 9.1729, 9.9583, 10.5832, 11.1009, 11.5418, 11.9251, 12.2637],
    [5.7023, 6.9757, 7.8042, 8.4215, 8.9131, 9.3209, 9.6687, 9.9715, 10.2393],
    [5.2431, 6.3305, 7.0333, 7.5560, 7.9723, 8.3177, 8.6125, 8.8693, 9.0966],
    [4.9490, 5.9193, 6.5424, 7.0050, 7.3730, 7.6784, 7.9390, 8.1662, 8.3674],
    [4.7452, 5.6354, 6.2038, 6.6248, 6.9594, 7.2369, 7.4738, 7.6803, 7.8632],
    [4.5960, 5.4280, 5.9567, 6.3473, 6.6574, 6.9145, 7.1339, 7.3251, 7.4945],
    [4.4820, 5.2702, 5.7686, 6.1361, 6.4275, 6.6690, 6.8749, 7.0544, 7.2133],
    [4.3923, 5.1460, 5.6208, 5.9701, 6.2468, 6.4759, 6.6713, 6.8414, 6.9921],
    [4.3198, 5.0459, 5.5016, 5.8363, 6.1011, 6.3202, 6.5069, 6.6696, 6.8136],
    [4.2600, 4.9635, 5.4036, 5.7262, 5.9812, 6.1920, 6.3717, 6.5280, 6.6664],
    [4.2099, 4.8945, 5.3215, 5.6340, 5.8808, 6.0847, 6.2583, 6.4095, 6.5432],
    [4.1673, 4.8359, 5.2518, 5.5558, 5.7956, 5.9936, 6.1621, 6.3087, 6.4384],
    [4.1306, 4.7855, 5.1919, 5.4885, 5.7223, 5.9152, 6.0793, 6.2221, 6.3483],
    [4.0987, 4.7418, 5.1399, 5.4301, 5.6586, 5.8471, 6.0074, 6.1468, 6.2700],
    [4.0707, 4.7034, 5.0942, 5.3788, 5.6028, 5.7874, 5.9443, 6.0807, 6.2013],
    [4.0460, 4.6694, 5.0539, 5.3336, 5.5535, 5.7346, 5.8886, 6.0223, 6.1406],
    [4.0239, 4.6392, 5.0180, 5.2933, 5.5095, 5.6876, 5.8389, 5.9703, 6.0865],
    [3.9555, 4.5456, 4.9068, 5.1684, 5.3735, 5.5420, 5.6850, 5.8092, 5.9187],
    [3.8891, 4.4549, 4.7992, 5.0476, 5.2418, 5.4012, 5.5361, 5.6531, 5.7563],
    [3.8247, 4.3672, 4.6951, 4.9308, 5.1145, 5.2648, 5.3920, 5.5020, 5.5989],
    [3.7622, 4.2822, 4.5944, 4.8178, 4.9913, 5.1330, 5.2525, 5.3558, 5.4466],
    [3.7016, 4.1999, 4.4970, 4.7085, 4.8722, 5.0055, 5.1176, 5.2143, 5.2992],
])
_Q_INF_01 = np.array([3.6428, 4.1203, 4.4028, 4.6028, 4.7570, 4.8822, 4.9872,
                      5.0775, 5.1566])

_Q_TABLES = {0.05: (_Q_TABLE_05, _Q_INF_05), 0.01: (_Q_TABLE_01, _Q_INF_01)}


def q_critical(k: int, df: int, alpha: float = 0.05) -> float:
    """Upper critical value of the studentized range for k groups.

    Exact table rows where available; log-df interpolation between rows;
    a 1/df blend toward the limiting row beyond df = 120.
    """
    if alpha not in _Q_TABLES:
        raise ValueError(f"alpha must be one of {sorted(_Q_TABLES)}, got {alpha}")
    if not _Q_K_MIN <= k <= _Q_K_MAX:
        raise ValueError(f"k must be in [{_Q_K_MIN}, {_Q_K_MAX}], got {k}")
    if df < _Q_DF[0]:
        raise ValueError(f"df must be >= {_Q_DF[0]}, got {df}")
    table, inf_row = _Q_TABLES[alpha]
    col = k - _Q_K_MIN
    if df in _Q_DF:
        return float(table[_Q_DF.index(df), col])
    if df > _Q_DF[-1]:
        frac = 1.0 - _Q_DF[-1] / df
        return float(table[-1, col] + (inf_row[col] - table[-1, col]) * frac)
    hi = next(i for i, v in enumerate(_Q_DF) if v > df)
    lo = hi - 1
    t = (math.log(df) - math.log(_Q_DF[lo])) / (math.log(_Q_DF[hi]) - math.log(_Q_DF[lo]))
    return float(table[lo, col] + (table[hi, col] - table[lo, col]) * t)


@dataclass(frozen=True)
class TukeyPair:
    model_a: str
    model_b: str
    mean_diff: float
    q_statistic: float
    significant: bool


@dataclass(frozen=True)
class TukeyResult:
    """All unordered pairwise comparisons at one significance level."""

    pairs: tuple[TukeyPair, ...]
    group_means: dict[str, float]
    group_sizes: dict[str, int]
    msw: float
    df: int
    critical_value: float
    alpha: float

    def significant_pairs(self) -> set[frozenset]:
        return {frozenset((p.model_a, p.model_b)) for p in self.pairs if p.significant}


def tukey_hsd(groups: dict[str, list[float] | np.ndarray],
              alpha: float = 0.05) -> TukeyResult:
    """Pairwise mean comparison via the studentized range statistic.

    One-way ANOVA supplies the pooled within-group mean square (MSW); for
    each pair q = |mean_a − mean_b| / sqrt(MSW/2 · (1/n_a + 1/n_b)), judged
    against the critical value for (k groups, N−k df).  Zero MSW means
    identical values within every group: equal means give q = 0, different
    means are separated with certainty (q = inf).
    """
    if len(groups) < 2:
        raise ValueError("need at least two groups")
    arrays = {name: np.asarray(values, dtype=np.float64) for name, values in groups.items()}
    for name, values in arrays.items():
        if values.size < 2:
            raise ValueError(f"group {name!r} needs at least 2 values, has {values.size}")
        if not np.all(np.isfinite(values)):
            raise ValueError(f"group {name!r} contains non-finite values")
    k = len(arrays)
    n_total = sum(v.size for v in arrays.values())
    df = n_total - k
    ssw = sum(float(((v - v.mean()) ** 2).sum()) for v in arrays.values())
    msw = ssw / df
    critical = q_critical(k, df, alpha)
    means = {name: float(v.mean()) for name, v in arrays.items()}
    sizes = {name: int(v.size) for name, v in arrays.items()}

    names = list(arrays)
    pairs = []
    for i in range(k):
        for j in range(i + 1, k):
            a, b = names[i], names[j]
            diff = means[a] - means[b]
            if msw == 0.0:
                q = 0.0 if diff == 0.0 else math.inf
            else:
                se = math.sqrt(msw / 2.0 * (1.0 / sizes[a] + 1.0 / sizes[b]))
                q = abs(diff) / se
            pairs.append(TukeyPair(a, b, diff, q, q > critical))
    return TukeyResult(tuple(pairs), means, sizes, msw, df, critical, alpha)


# --------------------------------------------------------------------------
# Prompt-length buckets and rank agreement

PROMPT_BUCKETS = ("short", "average", "long")


def prompt_length_bucket(prompt: str) -> str:
    """Whitespace word count → short (≤8), average (9–13), or long (≥14)."""
    words = prompt.split()
    if not words:
        raise ValueError("prompt must be non-empty")
    n = len(words)
    if n <= 8:
        return "short"
    if n <= 13:
        return "average"
    return "long"


@dataclass(frozen=True)
class Ranking:
    """Models ordered best-first, with 1-based ranks (ties share the
    average rank)."""

    order: tuple[str, ...]
    ranks: dict[str, float]


def rank_models(scores: dict[str, float]) -> Ranking:
    """Rank by descending score; exact ties get the average of their
    positions, and the display order breaks ties by name."""
    if not scores:
        raise ValueError("no scores to rank")
    names = sorted(scores, key=lambda m: (-scores[m], m))
    values = np.array([scores[m] for m in names])
    ranks = _sstats.rankdata(-values, method="average")
    return Ranking(order=tuple(names),
                   ranks={m: float(r) for m, r in zip(names, ranks)})


def rank_agreement(r1: Ranking | dict[str, float], r2: Ranking | dict[str, float]) -> float:
    """Kendall tau-b between two rankings of the same model set."""
    d1 = r1.ranks if isinstance(r1, Ranking) else dict(r1)
    d2 = r2.ranks if isinstance(r2, Ranking) else dict(r2)
    if set(d1) != set(d2):
        raise ValueError(
            f"rankings cover different model sets: {sorted(set(d1) ^ set(d2))}"
        )
    if len(d1) < 2:
        raise ValueError("need at least two models to compare rankings")
    names = sorted(d1)
    # Rankings order best-first, so agreement on ranks equals agreement on
    # the underlying scores with the sign preserved.
    tau = _sstats.kendalltau([d1[m] for m in names], [d2[m] for m in names]).statistic
    return float(tau)
