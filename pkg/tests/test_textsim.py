"""Prompt-to-caption similarity: hand-computed cosines, the blending rule,
frequency weighting, caption persistence, and provider caching."""

import math

import numpy as np
import pytest

from t2vqa.providers import ProviderError, StubProvider
from t2vqa.textsim import (
    STOPWORDS,
    CaptionSet,
    bow_cosine,
    caption_video,
    combined_similarity,
    embedding_cosine,
    load_captions,
    save_captions,
    tokenize,
    video_text_similarity,
)


class RecordingProvider:
    """Stub wrapper that counts calls, for cache behaviour tests."""

    def __init__(self, fail_at: int | None = None):
        self.inner = StubProvider(seed=0)
        self.caption_calls = 0
        self.embed_calls = 0
        self.fail_at = fail_at

    def caption(self, frame):
        if self.fail_at is not None and self.caption_calls == self.fail_at:
            raise RuntimeError("backend down")
        self.caption_calls += 1
        return self.inner.caption(frame)

    def embed(self, text):
        self.embed_calls += 1
        return self.inner.embed(text)


class ConstantProvider:
    """Returns a fixed embedding per distinct text, for exact arithmetic."""

    def __init__(self, table):
        self.table = table

    def embed(self, text):
        return np.asarray(self.table[text], dtype=np.float64)


class TestTokenize:
    def test_lowercases_and_drops_stopwords(self):
        assert tokenize("The red BALL, bouncing!") == ["red", "ball", "bouncing"]

    def test_numbers_kept(self):
        assert tokenize("2 dogs on a beach") == ["2", "dogs", "beach"]

    def test_stopword_list_is_function_words_only(self):
        for word in ("the", "was", "and", "over", "with"):
            assert word in STOPWORDS
        for word in ("sunrise", "ocean", "red", "ball", "beach"):
            assert word not in STOPWORDS


class TestBowCosine:
    def test_disjoint_content_words_zero(self):
        """No shared content words means an exact zero, triggering the
        fallback branch downstream."""
        a = "The sunrise was beautiful over the ocean"
        b = "The bulldozer was loud and destroyed the building"
        assert bow_cosine(a, b) == 0.0

    def test_identical_sentences_one(self):
        s = "a red ball bouncing on sand"
        assert bow_cosine(s, s) == pytest.approx(1.0, rel=1e-12)

    def test_term_frequency_hand_case(self):
        """'red red ball' vs 'red ball': dot = 2*1 + 1*1 = 3, norms
        sqrt(5) and sqrt(2)."""
        assert bow_cosine("red red ball", "red ball") == pytest.approx(
            3.0 / math.sqrt(10.0), rel=1e-12
        )

    def test_symmetric(self):
        a, b = "a dog runs across grass", "grass where a cat runs"
        assert bow_cosine(a, b) == bow_cosine(b, a)
        assert bow_cosine(a, b) > 0.0

    def test_only_stopwords_scores_zero(self):
        assert bow_cosine("the of and", "red ball") == 0.0

    def test_empty_string_rejected(self):
        with pytest.raises(ValueError, match="non-empty"):
            bow_cosine("", "red ball")


class TestEmbeddingCosine:
    def test_identical_text_scores_one(self, stub_provider):
        s = "a red ball on sand"
        assert embedding_cosine(s, s, stub_provider) == pytest.approx(1.0, rel=1e-12)

    def test_negative_cosine_clamped_to_zero(self):
        provider = ConstantProvider({"a": [1.0, 0.0], "b": [-1.0, 0.0]})
        assert embedding_cosine("a", "b", provider) == 0.0

    def test_zero_norm_embedding_scores_zero(self):
        provider = ConstantProvider({"a": [0.0, 0.0], "b": [1.0, 0.0]})
        assert embedding_cosine("a", "b", provider) == 0.0

    def test_matches_numpy_oracle(self, stub_provider):
        a, b = "a dog in a park", "a cat on a sofa"
        va = np.asarray(stub_provider.embed(a))
        vb = np.asarray(stub_provider.embed(b))
        expected = float(va @ vb / (np.linalg.norm(va) * np.linalg.norm(vb)))
        expected = min(1.0, max(0.0, expected))
        assert embedding_cosine(a, b, stub_provider) == pytest.approx(expected, rel=1e-12)


class TestCombinedSimilarity:
    def test_fallback_branch_reference_value(self):
        """Zero surface cosine: only the embedding counts, halved."""
        assert combined_similarity(0.0, 0.45) == pytest.approx(0.225, abs=1e-9)

    def test_blend_branch_reference_value(self):
        assert combined_similarity(0.28, 0.76) == pytest.approx(0.64, abs=1e-9)

    def test_weights_configurable(self):
        assert combined_similarity(0.4, 0.8, emb_weight=0.5) == pytest.approx(0.6)
        assert combined_similarity(0.0, 0.8, fallback_weight=0.25) == pytest.approx(0.2)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError, match="cos_sim"):
            combined_similarity(1.5, 0.5)
        with pytest.raises(ValueError, match="emb_sim"):
            combined_similarity(0.5, -0.1)

    def test_monotone_in_embedding_similarity(self):
        for cos in (0.0, 0.3):
            sims = [combined_similarity(cos, e) for e in np.linspace(0, 1, 11)]
            assert all(x < y for x, y in zip(sims, sims[1:]))


class TestVideoSimilarity:
    def test_all_identical_captions_return_caption_sim(self, stub_provider):
        """Weights collapse to 1 and the mean over frames is the single
        caption's similarity, exactly."""
        prompt = "a red ball bouncing on a sandy beach"
        caption = "a person walking along a sandy beach at sunset"
        captions = CaptionSet((caption,) * 5)
        report = video_text_similarity(prompt, captions, stub_provider)
        cos = bow_cosine(prompt, caption)
        emb = embedding_cosine(prompt, caption, stub_provider)
        expected = combined_similarity(cos, emb)
        assert report.video_score == pytest.approx(expected, rel=1e-12)
        assert all(row.weight == 1.0 for row in report.per_caption)

    def test_mixed_caption_hand_case(self):
        """[A, A, A, B] with sims 0.8 and 0.4: the video score is
        (3*(3/4)*0.8 + (1/4)*0.4) / 4 = 0.475.

        Both captions share one of the prompt's two content words, so the
        surface cosine is 1/2; the embeddings are constants chosen to make
        the blended similarities exactly 0.8 and 0.4.
        """
        prompt = "alpha beta"
        cap_a, cap_b = "alpha gamma", "alpha delta"
        emb_a = (0.8 - 0.25 * 0.5) / 0.75   # 0.9
        emb_b = (0.4 - 0.25 * 0.5) / 0.75   # 11/30
        provider = ConstantProvider({
            prompt: [1.0, 0.0],
            cap_a: [emb_a, math.sqrt(1.0 - emb_a ** 2)],
            cap_b: [emb_b, math.sqrt(1.0 - emb_b ** 2)],
        })
        report = video_text_similarity(
            prompt, CaptionSet((cap_a, cap_a, cap_a, cap_b)), provider
        )
        assert report.per_caption[0].combined_sim == pytest.approx(0.8, abs=1e-12)
        assert report.per_caption[3].combined_sim == pytest.approx(0.4, abs=1e-12)
        assert report.per_caption[0].weight == 0.75
        assert report.per_caption[3].weight == 0.25
        assert report.video_score == pytest.approx(0.475, abs=1e-9)

    def test_unique_caption_discounted_by_frame_count(self, stub_provider):
        """A caption unique among n frames carries weight 1/n; with all
        captions distinct the score is mean(sim)/n."""
        prompt = "a red ball bouncing on a sandy beach"
        caps = CaptionSet((
            "a dog chasing a ball",
            "a red kite above the shore",
            "waves rolling onto wet sand",
            "a child building a sandcastle",
            "a beach umbrella in the wind",
            "a seagull flying over the water",
        ))
        report = video_text_similarity(prompt, caps, stub_provider)
        mean_sim = np.mean([r.combined_sim for r in report.per_caption])
        assert report.video_score == pytest.approx(mean_sim / caps.n, rel=1e-12)

    def test_distinct_captions_scored_once(self):
        provider = RecordingProvider()
        prompt = "a red ball"
        captions = CaptionSet(("a red ball", "a red ball", "a blue cube"))
        video_text_similarity(prompt, captions, provider)
        # prompt+caption embeddings per distinct caption: 2 captions * 2 texts
        assert provider.embed_calls == 4

    def test_empty_prompt_rejected(self, stub_provider):
        with pytest.raises(ValueError, match="prompt"):
            video_text_similarity("", CaptionSet(("x",)), stub_provider)


class TestCaptionSet:
    def test_validation(self):
        with pytest.raises(ValueError, match="at least one"):
            CaptionSet(())
        with pytest.raises(ValueError, match="non-empty"):
            CaptionSet(("ok", ""))
        assert CaptionSet(("a", "b")).n == 2


class TestCaptionPersistence:
    def test_round_trip(self, tmp_path):
        caps = CaptionSet(("first frame", "second frame", "first frame"))
        path = tmp_path / "caps.jsonl"
        save_captions(path, caps)
        assert load_captions(path) == caps

    def test_order_restored_from_indices(self, tmp_path):
        path = tmp_path / "caps.jsonl"
        path.write_text(
            '{"frame": 1, "caption": "two"}\n{"frame": 0, "caption": "one"}\n'
        )
        assert load_captions(path).captions == ("one", "two")

    def test_duplicate_frame_rejected(self, tmp_path):
        path = tmp_path / "caps.jsonl"
        path.write_text(
            '{"frame": 0, "caption": "a"}\n{"frame": 0, "caption": "b"}\n'
        )
        with pytest.raises(ValueError, match="duplicate frame index 0"):
            load_captions(path)

    def test_gap_in_indices_rejected(self, tmp_path):
        path = tmp_path / "caps.jsonl"
        path.write_text(
            '{"frame": 0, "caption": "a"}\n{"frame": 2, "caption": "b"}\n'
        )
        with pytest.raises(ValueError, match="cover 0..n-1"):
            load_captions(path)

    def test_malformed_line_rejected(self, tmp_path):
        path = tmp_path / "caps.jsonl"
        path.write_text('{"frame": 0}\n')
        with pytest.raises(ValueError, match="bad caption record"):
            load_captions(path)


class TestCaptionVideo:
    def test_captions_every_frame_in_order(self, video_8, stub_provider):
        caps = caption_video(video_8, stub_provider, max_workers=3)
        assert caps.n == video_8.n_frames
        expected = tuple(stub_provider.caption(f) for f in video_8.frames)
        assert caps.captions == expected

    def test_cache_written_then_reused(self, video_8, tmp_path):
        cache = tmp_path / "caps.jsonl"
        first_provider = RecordingProvider()
        first = caption_video(video_8, first_provider, cache_path=cache)
        assert first_provider.caption_calls == video_8.n_frames
        assert cache.exists()

        second_provider = RecordingProvider()
        second = caption_video(video_8, second_provider, cache_path=cache)
        assert second == first
        assert second_provider.caption_calls == 0

    def test_stale_cache_frame_count_rejected(self, video_8, tmp_path):
        cache = tmp_path / "caps.jsonl"
        save_captions(cache, CaptionSet(("only one",)))
        with pytest.raises(ValueError, match="holds 1 captions"):
            caption_video(video_8, StubProvider(seed=0), cache_path=cache)

    def test_failure_names_frame_index(self, video_8):
        provider = RecordingProvider(fail_at=3)
        with pytest.raises(ProviderError, match="captioning failed at frame 3"):
            caption_video(video_8, provider, max_workers=1)
