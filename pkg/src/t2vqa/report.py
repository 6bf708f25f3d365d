"""Render ratings-analysis results as CSV tables and static SVG figures.

All outputs are byte-deterministic for fixed input: CSV floats use a fixed
format, and the SVG backend is pinned (stable hash salt, no creation
date).  Every file embeds the run metadata so results can be traced back
to a tool version, seed, and configuration.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from t2vqa.ratings import (  # noqa: E402
    PROMPT_BUCKETS,
    ModelStats,
    Ranking,
    TukeyResult,
)

REPORT_FILES = (
    "model_stats.csv",
    "tukey.csv",
    "mos_distributions.svg",
    "tukey_intervals.svg",
    "prompt_length_box.svg",
    "rank_compare.svg",
)

_SVG_RC = {
    "svg.hashsalt": "t2vqa-report",
    "svg.fonttype": "path",
    "figure.dpi": 100,
    "font.family": "DejaVu Sans",
}


def _fmt(value: float) -> str:
    return f"{value:.10g}"


def _meta_line(meta: dict) -> str:
    return "# meta=" + json.dumps(meta or {}, sort_keys=True)


def _write_csv(path: Path, header: list[str], rows: list[list[str]], meta: dict) -> None:
    lines = [_meta_line(meta), ",".join(header)]
    lines.extend(",".join(row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _save_svg(fig, path: Path, meta: dict) -> None:
    fig.savefig(
        path, format="svg",
        metadata={"Date": None, "Description": json.dumps(meta or {}, sort_keys=True)},
    )
    plt.close(fig)


def emit_report(stats: dict[str, ModelStats], tukey: TukeyResult,
                buckets: dict[str, list[float]], rankings: dict[str, Ranking],
                out_dir: str | Path,
                distributions: dict[str, list[float]] | None = None,
                meta: dict | None = None) -> list[Path]:
    """Write the full report bundle into ``out_dir``; returns the paths.

    ``stats`` comes from :func:`t2vqa.ratings.model_stats`; ``buckets``
    maps prompt-length bucket names to combined scores; ``rankings`` maps a
    metric label to its :class:`Ranking`; ``distributions`` (defaulting to
    the Tukey input groups' values being unavailable, a bar of means)
    supplies per-model combined scores for the histogram panel.
    """
    meta = dict(meta or {})
    out_dir = Path(out_dir)

    # Validate everything up front: nothing is written on bad input.
    if not stats:
        raise ValueError("empty model list: nothing to report")
    models = list(stats)
    k = len(tukey.group_means)
    if len(tukey.pairs) != k * (k - 1) // 2:
        raise ValueError("tukey result does not cover all unordered pairs")
    unknown_buckets = set(buckets) - set(PROMPT_BUCKETS)
    if unknown_buckets:
        raise ValueError(f"unknown prompt-length buckets: {sorted(unknown_buckets)}")
    for label, ranking in rankings.items():
        if not isinstance(ranking, Ranking):
            raise ValueError(f"ranking {label!r} is not a Ranking")
    out_dir.mkdir(parents=True, exist_ok=True)

    paths = [out_dir / name for name in REPORT_FILES]

    _write_csv(
        paths[0],
        ["model_name", "alignment_mean", "alignment_std", "perception_mean",
         "perception_std", "combined", "n_videos", "n_clamped"],
        [
            [m, _fmt(s.alignment_mean), _fmt(s.alignment_std), _fmt(s.perception_mean),
             _fmt(s.perception_std), _fmt(s.combined), str(s.n_videos), str(s.n_clamped)]
            for m, s in stats.items()
        ],
        meta,
    )

    _write_csv(
        paths[1],
        ["model_a", "model_b", "mean_diff", "q_statistic", "critical_value",
         "significant"],
        [
            [p.model_a, p.model_b, _fmt(p.mean_diff), _fmt(p.q_statistic),
             _fmt(tukey.critical_value), str(int(p.significant))]
            for p in tukey.pairs
        ],
        meta,
    )

    with plt.rc_context(_SVG_RC):
        _plot_distributions(stats, distributions, paths[2], meta)
        _plot_tukey_intervals(tukey, paths[3], meta)
        _plot_buckets(buckets, paths[4], meta)
        _plot_rankings(rankings, models, paths[5], meta)

    return paths


def _plot_distributions(stats, distributions, path: Path, meta: dict) -> None:
    models = list(stats)
    fig, axes = plt.subplots(len(models), 1, figsize=(6, 1.8 * len(models)),
                             squeeze=False, sharex=True)
    for ax, model in zip(axes[:, 0], models):
        if distributions and model in distributions:
            ax.hist(distributions[model], bins=20, range=(0.0, 1.0),
                    color="#4878a8", edgecolor="black", linewidth=0.5)
        else:
            ax.bar([stats[model].combined], [1.0], width=0.02, color="#4878a8")
        ax.set_ylabel(model, rotation=0, ha="right", va="center", fontsize=8)
    axes[-1, 0].set_xlabel("combined score")
    fig.suptitle("Combined score distributions per model")
    fig.tight_layout()
    _save_svg(fig, path, meta)


def _plot_tukey_intervals(tukey: TukeyResult, path: Path, meta: dict) -> None:
    import math

    fig, ax = plt.subplots(figsize=(6, 0.6 * max(4, len(tukey.pairs))))
    labels, diffs, halfwidths, colors = [], [], [], []
    for p in tukey.pairs:
        labels.append(f"{p.model_a} vs {p.model_b}")
        diffs.append(p.mean_diff)
        if tukey.msw == 0.0:
            halfwidths.append(0.0)
        else:
            se = math.sqrt(tukey.msw / 2.0 * (1.0 / tukey.group_sizes[p.model_a]
                                              + 1.0 / tukey.group_sizes[p.model_b]))
            halfwidths.append(tukey.critical_value * se)
        colors.append("#b04030" if p.significant else "#808080")
    y = range(len(labels))
    ax.axvline(0.0, color="black", linewidth=0.8)
    for yi, d, hw, c in zip(y, diffs, halfwidths, colors):
        ax.errorbar([d], [yi], xerr=[[hw], [hw]], fmt="o", color=c, capsize=3)
    ax.set_yticks(list(y))
    ax.set_yticklabels(labels, fontsize=8)
    ax.invert_yaxis()
    ax.set_xlabel("mean difference")
    ax.set_title(f"Pairwise mean differences (alpha={tukey.alpha:g})")
    fig.tight_layout()
    _save_svg(fig, path, meta)


def _plot_buckets(buckets: dict[str, list[float]], path: Path, meta: dict) -> None:
    present = [b for b in PROMPT_BUCKETS if buckets.get(b)]
    fig, ax = plt.subplots(figsize=(6, 4))
    if present:
        ax.boxplot([buckets[b] for b in present], tick_labels=present)
    ax.set_xlabel("prompt length bucket")
    ax.set_ylabel("combined score")
    ax.set_title("Combined score by prompt length")
    fig.tight_layout()
    _save_svg(fig, path, meta)


def _plot_rankings(rankings: dict[str, Ranking], models: list[str], path: Path,
                   meta: dict) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    labels = list(rankings)
    for model in models:
        ys = [rankings[label].ranks.get(model) for label in labels]
        if any(y is None for y in ys):
            continue
        ax.plot(range(len(labels)), ys, marker="o", label=model)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels)
    ax.invert_yaxis()  # rank 1 on top
    ax.set_ylabel("rank (1 = best)")
    ax.set_title("Model ranks by metric")
    if models:
        ax.legend(fontsize=8)
    fig.tight_layout()
    _save_svg(fig, path, meta)
