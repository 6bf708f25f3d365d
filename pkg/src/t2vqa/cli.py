"""Command-line entry point for reproducible batch runs.

Subcommands: ``features``, ``train-classifier``, ``textsim``,
``train-ensemble``, ``score``, ``analyze``.  Flags are long-form only; a
``key=value`` config file can supply any flag, with explicit flags taking
precedence.  Every output embeds ``{tool_version, seed, config_hash}`` so
runs are traceable, and any failure prints a single machine-parseable
JSON line to stderr and exits nonzero.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from t2vqa import __version__
from t2vqa.boosting import GbtModel, LabelledSet, grid_search, predict_naturalness, split_pool
from t2vqa.ensemble import EnsembleWeights, fit_ensemble, score_video
from t2vqa.features.extract import FEATURE_COLUMNS, extract_video_features
from t2vqa.features.inception import load_class_probs
from t2vqa.features.niqe import NiqeModel, fit_niqe_model
from t2vqa.features.brisque import BrisqueModel
from t2vqa.media import load_frames, load_manifest
from t2vqa.providers import make_provider
from t2vqa.ratings import (
    RatingsTable,
    model_stats,
    prompt_length_bucket,
    rank_models,
    tukey_hsd,
    video_scores,
)
from t2vqa.report import emit_report
from t2vqa.textsim import CaptionSet, caption_video, load_captions, video_text_similarity


def _fmt(value: float) -> str:
    return "" if math.isnan(value) else f"{value:.17g}"


def read_config_file(path: str | Path) -> dict[str, str]:
    """Parse a minimal ``key=value`` config file (one pair per line,
    ``#`` comments)."""
    pairs: dict[str, str] = {}
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{line_no}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ValueError(f"{path}:{line_no}: empty key")
        pairs[key] = value.strip().strip('"')
    return pairs


def _expand_config(argv: list[str]) -> list[str]:
    """Turn ``--config FILE`` into leading flags so explicit flags win."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise ValueError("--config requires a file path")
    pairs = read_config_file(argv[i + 1])
    injected: list[str] = []
    for key, value in pairs.items():
        injected.extend([f"--{key.replace('_', '-')}", value])
    rest = argv[:i] + argv[i + 2:]
    if not rest:
        raise ValueError("--config needs a subcommand")
    return [rest[0]] + injected + rest[1:]


def _run_meta(args: argparse.Namespace) -> dict:
    resolved = {k: (str(v) if isinstance(v, Path) else v)
                for k, v in sorted(vars(args).items()) if k != "func"}
    blob = json.dumps(resolved, sort_keys=True, default=str).encode("utf-8")
    return {
        "tool_version": __version__,
        "seed": getattr(args, "seed", None),
        "config_hash": hashlib.sha256(blob).hexdigest()[:16],
    }


def _write_table(path: Path, header: list[str], rows: list[list[str]], meta: dict) -> None:
    lines = ["# meta=" + json.dumps(meta, sort_keys=True), ",".join(header)]
    lines.extend(",".join(row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _read_table(path: Path) -> tuple[list[str], list[list[str]]]:
    lines = [ln for ln in path.read_text(encoding="utf-8").splitlines()
             if ln and not ln.startswith("#")]
    if not lines:
        raise ValueError(f"{path} is empty")
    header = lines[0].split(",")
    rows = [ln.split(",") for ln in lines[1:]]
    for i, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise ValueError(f"{path} line {i}: expected {len(header)} cells, got {len(row)}")
    return header, rows


# --------------------------------------------------------------------------
# features


def cmd_features(args) -> None:
    manifest = load_manifest(args.manifest)
    niqe_path = Path(args.niqe_model)
    if not niqe_path.exists():
        if args.niqe_corpus is None:
            raise FileNotFoundError(
                f"NIQE model {niqe_path} not found; fit one first or pass --niqe-corpus"
            )
        corpus = load_frames(args.niqe_corpus)
        model = fit_niqe_model(corpus.frames, patch_size=args.niqe_patch_size)
        model.save(niqe_path)
    niqe_model = NiqeModel.load(niqe_path)
    brisque_model = (BrisqueModel.load(args.brisque_model)
                     if args.brisque_model else None)
    provider = make_provider(args.provider, seed=args.seed) if args.provider else None

    def probs_for(entry) -> np.ndarray | None:
        if args.probs_dir:
            path = Path(args.probs_dir) / f"{entry.video_id}.json"
            if path.exists():
                return load_class_probs(path)
        if provider is not None:
            video = load_frames(entry.frames_path)
            return np.vstack([provider.class_probs(f) for f in video.frames])
        return None

    def one(entry):
        try:
            video = load_frames(entry.frames_path)
            return extract_video_features(
                video, niqe_model, brisque_model=brisque_model,
                probs=probs_for(entry), seed=args.seed,
                spectral_mode=args.spectral_mode,
            )
        except Exception as exc:
            raise RuntimeError(f"feature extraction failed for video "
                               f"{entry.video_id!r}: {exc}") from exc

    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        vectors = list(pool.map(one, manifest.entries))

    header = ["video_id"] + list(FEATURE_COLUMNS)
    rows = []
    for entry, fv in zip(manifest.entries, vectors):
        row = fv.as_row()
        rows.append([entry.video_id] + [_fmt(v) for v in row])
    _write_table(Path(args.out), header, rows, _run_meta(args))


# --------------------------------------------------------------------------
# train-classifier


def _load_features_csv(path: Path) -> tuple[list[str], dict[str, dict[str, float]]]:
    header, rows = _read_table(path)
    if not header or header[0] != "video_id":
        raise ValueError(f"{path}: first column must be video_id")
    names = header[1:]
    table: dict[str, dict[str, float]] = {}
    for row in rows:
        video_id = row[0]
        if video_id in table:
            raise ValueError(f"{path}: duplicate video_id {video_id!r}")
        table[video_id] = {
            n: (float(cell) if cell else math.nan) for n, cell in zip(names, row[1:])
        }
    return names, table


def _parse_grid(text: str) -> dict[str, tuple]:
    grid: dict[str, tuple] = {}
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ValueError(f"bad grid entry {part!r}; use name=v1,v2;name2=v3")
        key, values = part.split("=", 1)
        parsed = []
        for v in values.split(","):
            v = v.strip()
            parsed.append(int(v) if v.lstrip("-").isdigit() else float(v))
        grid[key.strip()] = tuple(parsed)
    return grid


def cmd_train_classifier(args) -> None:
    names, features = _load_features_csv(Path(args.features))
    header, rows = _read_table(Path(args.labels))
    required = {"video_id", "label"}
    if not required <= set(header):
        raise ValueError(f"{args.labels}: needs columns video_id,label")
    col = {name: header.index(name) for name in header}
    has_split = "split" in col

    video_ids, y, split = [], [], []
    for row in rows:
        video_id = row[col["video_id"]]
        if video_id not in features:
            raise ValueError(f"label row {video_id!r} has no feature row")
        video_ids.append(video_id)
        y.append(float(row[col["label"]]))
        if has_split:
            split.append(row[col["split"]])
    y_arr = np.array(y)
    split_arr = np.array(split) if has_split else split_pool(y_arr, seed=args.seed)

    X = np.array([[features[v][n] for n in names] for v in video_ids])
    data = LabelledSet(X=X, y=y_arr, split=split_arr, feature_names=tuple(names),
                       video_ids=tuple(video_ids))
    grid = _parse_grid(args.grid) if args.grid else None
    model, report = grid_search(data, grid=grid)
    model.save(args.out)
    report_doc = {
        "best_config": asdict(report.best_config),
        "train_f1": report.train_f1,
        "val_f1": report.val_f1,
        "test_f1": report.test_f1,
        "grid": [{"config": asdict(c), "val_f1": f1} for c, f1 in report.table],
        "meta": _run_meta(args),
    }
    report_path = Path(args.report) if args.report else Path(str(args.out) + ".report.json")
    report_path.write_text(json.dumps(report_doc, indent=2, sort_keys=True) + "\n",
                           encoding="utf-8")


# --------------------------------------------------------------------------
# textsim


def cmd_textsim(args) -> None:
    manifest = load_manifest(args.manifest)
    if not manifest.entries:
        raise ValueError(f"{args.manifest}: empty manifest")
    provider = make_provider(args.provider, seed=args.seed)

    def one(entry):
        try:
            if entry.captions_path and Path(entry.captions_path).exists():
                captions = load_captions(entry.captions_path)
            else:
                cache = None
                if args.captions_dir:
                    Path(args.captions_dir).mkdir(parents=True, exist_ok=True)
                    cache = Path(args.captions_dir) / f"{entry.video_id}.jsonl"
                video = load_frames(entry.frames_path)
                captions = caption_video(video, provider, cache_path=cache,
                                         max_workers=args.jobs)
            report = video_text_similarity(entry.prompt, captions, provider,
                                           emb_weight=args.emb_weight)
            return captions, report
        except Exception as exc:
            raise RuntimeError(f"text similarity failed for video "
                               f"{entry.video_id!r}: {exc}") from exc

    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        results = list(pool.map(one, manifest.entries))

    rows = []
    for entry, (captions, report) in zip(manifest.entries, results):
        rows.append([
            entry.video_id, _fmt(report.video_score), str(captions.n),
            str(len(set(captions.captions))),
        ])
    _write_table(Path(args.out), ["video_id", "video_score", "n_captions", "n_distinct"],
                 rows, _run_meta(args))


# --------------------------------------------------------------------------
# train-ensemble / score


def _naturalness_by_video(features_path: Path, classifier_path: Path) -> dict[str, float]:
    names, features = _load_features_csv(features_path)
    model = GbtModel.load(classifier_path)
    missing = set(model.feature_names) - set(names)
    if missing:
        raise ValueError(f"{features_path} lacks model features: {sorted(missing)}")
    out = {}
    for video_id, row in features.items():
        out[video_id] = predict_naturalness(
            model, {n: row[n] for n in model.feature_names}
        )
    return out


def _textsim_by_video(path: Path) -> dict[str, float]:
    header, rows = _read_table(path)
    if "video_id" not in header or "video_score" not in header:
        raise ValueError(f"{path}: needs columns video_id,video_score")
    vid, score = header.index("video_id"), header.index("video_score")
    return {row[vid]: float(row[score]) for row in rows}


def cmd_train_ensemble(args) -> None:
    nat = _naturalness_by_video(Path(args.features), Path(args.classifier))
    sim = _textsim_by_video(Path(args.textsim))
    table = RatingsTable.from_csv(args.ratings)
    human = {vs.video_id: vs.combined
             for vs in video_scores(table, args.k_outlier, args.adjust_group)}
    common = sorted(set(nat) & set(sim) & set(human))
    if len(common) < 3:
        raise ValueError(
            f"only {len(common)} videos present in features, textsim, and ratings; "
            "need at least 3"
        )
    meta = _run_meta(args)
    weights = fit_ensemble([(nat[v], sim[v], human[v]) for v in common],
                           meta={**meta, "videos": len(common)})
    weights.save(args.out)


def cmd_score(args) -> None:
    nat = _naturalness_by_video(Path(args.features), Path(args.classifier))
    sim = _textsim_by_video(Path(args.textsim))
    weights = EnsembleWeights.load(args.weights)
    only_nat = sorted(set(nat) - set(sim))
    only_sim = sorted(set(sim) - set(nat))
    if only_nat or only_sim:
        raise ValueError(
            f"video ids do not match between features and textsim: "
            f"features-only={only_nat}, textsim-only={only_sim}"
        )
    rows = [
        [v, _fmt(nat[v]), _fmt(sim[v]), _fmt(score_video(nat[v], sim[v], weights))]
        for v in nat
    ]
    _write_table(Path(args.out),
                 ["video_id", "naturalness", "text_similarity", "ensemble_score"],
                 rows, _run_meta(args))


# --------------------------------------------------------------------------
# analyze


def cmd_analyze(args) -> None:
    table = RatingsTable.from_csv(args.ratings)
    stats = model_stats(table, args.k_outlier, args.adjust_group)
    per_video = video_scores(table, args.k_outlier, args.adjust_group)

    groups = {}
    for vs in per_video:
        groups.setdefault(vs.model_name, []).append(vs.combined)
    small = [m for m, values in groups.items() if len(values) < 2]
    if small:
        raise ValueError(f"models with fewer than 2 videos cannot enter the "
                         f"pairwise test: {small}")
    tukey = tukey_hsd(groups, alpha=args.alpha)

    buckets: dict[str, list[float]] = {}
    for vs in per_video:
        buckets.setdefault(prompt_length_bucket(vs.prompt), []).append(vs.combined)

    rankings = {"human": rank_models({m: s.combined for m, s in stats.items()})}
    if args.scores:
        header, rows = _read_table(Path(args.scores))
        vid = header.index("video_id")
        ens = header.index("ensemble_score")
        model_of = {vs.video_id: vs.model_name for vs in per_video}
        by_model: dict[str, list[float]] = {}
        for row in rows:
            model = model_of.get(row[vid])
            if model is not None:
                by_model.setdefault(model, []).append(float(row[ens]))
        if by_model:
            rankings["ensemble"] = rank_models(
                {m: float(np.mean(v)) for m, v in by_model.items()}
            )

    emit_report(stats, tukey, buckets, rankings, args.out_dir,
                distributions=groups, meta=_run_meta(args))


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="t2vqa",
        description="Text-to-video output quality toolkit: frame features, "
                    "naturalness classification, prompt similarity, ensembling, "
                    "and human-rating analysis.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--config", help="key=value config file; flags override it")
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)

    p = sub.add_parser("features", help="extract per-video feature rows")
    common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--niqe-model", required=True)
    p.add_argument("--niqe-corpus", help="frames dir to fit the NIQE model from "
                                         "when --niqe-model does not exist yet")
    p.add_argument("--niqe-patch-size", type=int, default=96)
    p.add_argument("--brisque-model")
    p.add_argument("--probs-dir", help="per-video class-probability JSON files")
    p.add_argument("--provider", help="stub | file:<dir> | http(s) URL")
    p.add_argument("--spectral-mode", choices=["fourier", "spatial"], default="fourier")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train-classifier", help="grid-search the naturalness classifier")
    common(p)
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True,
                   help="CSV with video_id,label[,split] columns")
    p.add_argument("--grid", help="e.g. 'n_trees=50,100;max_depth=2,3'")
    p.add_argument("--out", required=True)
    p.add_argument("--report", help="F1 report path (default <out>.report.json)")
    p.set_defaults(func=cmd_train_classifier)

    p = sub.add_parser("textsim", help="prompt-caption similarity per video")
    common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--provider", default=None)
    p.add_argument("--captions-dir", help="cache directory for generated captions")
    p.add_argument("--emb-weight", type=float, default=0.75)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_textsim)

    p = sub.add_parser("train-ensemble", help="fit the final linear combiner")
    common(p)
    p.add_argument("--features", required=True)
    p.add_argument("--classifier", required=True)
    p.add_argument("--textsim", required=True)
    p.add_argument("--ratings", required=True)
    p.add_argument("--k-outlier", type=float, default=3.0)
    p.add_argument("--adjust-group", choices=["per-annotator", "global"],
                   default="per-annotator")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_ensemble)

    p = sub.add_parser("score", help="final per-video quality scores")
    common(p)
    p.add_argument("--features", required=True)
    p.add_argument("--classifier", required=True)
    p.add_argument("--textsim", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("analyze", help="human-ratings statistics and report bundle")
    common(p)
    p.add_argument("--ratings", required=True)
    p.add_argument("--k-outlier", type=float, default=3.0)
    p.add_argument("--adjust-group", choices=["per-annotator", "global"],
                   default="per-annotator")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--scores", help="score CSV for metric-vs-human rank comparison")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_analyze)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _expand_config(argv)
        args = build_parser().parse_args(argv)
        args.func(args)
        return 0
    except SystemExit as exc:  # argparse errors already printed usage
        return int(exc.code or 0)
    except Exception as exc:
        print(json.dumps({"error": str(exc), "type": type(exc).__name__,
                          "argv": argv}, sort_keys=True), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
