"""Shared fixtures: synthetic frames, videos, small fitted models, and a
per-criterion PASS/FAIL line printer for the acceptance suite."""

from __future__ import annotations

import pytest
from PIL import Image

from t2vqa.features.niqe import NiqeModel, fit_niqe_model
from t2vqa.media import FrameSequence
from t2vqa.providers import StubProvider

from frame_helpers import synth_frames


def pytest_runtest_logreport(report):
    """Print one status line per acceptance test as it finishes."""
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call":
        status = "PASS" if report.passed else "FAIL" if report.failed else "SKIP"
        print(f"\n[{status}] acceptance: {name}")
    elif report.when == "setup" and report.skipped:
        print(f"\n[SKIP] acceptance: {name}")


@pytest.fixture(scope="session")
def niqe_model_16() -> NiqeModel:
    """Small pristine model usable on 64x64 frames (patch size 16)."""
    return fit_niqe_model(synth_frames(101, 14), patch_size=16)


@pytest.fixture(scope="session")
def corpus_frames() -> list[np.ndarray]:
    return synth_frames(101, 14)


@pytest.fixture()
def video_8() -> FrameSequence:
    return FrameSequence.from_arrays(synth_frames(7, 8), source_id="video_8")


@pytest.fixture()
def stub_provider() -> StubProvider:
    return StubProvider(seed=0)


@pytest.fixture()
def video_tree(tmp_path):
    """Three 8-frame videos on disk plus their manifest, for CLI runs."""
    rows = []
    for v in range(3):
        frames_dir = tmp_path / f"vid{v}"
        frames_dir.mkdir()
        for i, frame in enumerate(synth_frames(50 + v, 8)):
            Image.fromarray(frame).save(frames_dir / f"frame_{i:03d}.png")
        rows.append(f"vid{v},gen_model_{v % 2},a red ball bouncing on a sandy beach,"
                    f"{frames_dir},")
    manifest = tmp_path / "manifest.csv"
    manifest.write_text(
        "video_id,model_name,prompt,frames_path,captions_path\n" + "\n".join(rows) + "\n",
        encoding="utf-8",
    )
    corpus_dir = tmp_path / "corpus"
    corpus_dir.mkdir()
    for i, frame in enumerate(synth_frames(99, 12)):
        Image.fromarray(frame).save(corpus_dir / f"c_{i:02d}.png")
    return {"root": tmp_path, "manifest": manifest, "corpus": corpus_dir}
