"""Stub model unit tests: determinism, seed sensitivity, the token-
multiset embedding algebra, and probability normalization."""

import pytest

from t2vqa_provider.stub import CAPTION_PHRASES, StubModel, is_png, tokenize

from provider_helpers import make_png


class TestCaption:
    def test_from_fixed_phrase_list(self):
        model = StubModel(seed=0)
        for seed in range(10):
            assert model.caption(make_png(seed)) in CAPTION_PHRASES

    def test_identical_across_instances(self):
        image = make_png(3)
        assert StubModel(seed=5).caption(image) == StubModel(seed=5).caption(image)

    def test_seed_changes_some_captions(self):
        images = [make_png(i) for i in range(10)]
        a = [StubModel(seed=0).caption(img) for img in images]
        b = [StubModel(seed=1).caption(img) for img in images]
        assert a != b

    def test_different_images_hit_different_phrases(self):
        model = StubModel(seed=0)
        captions = {model.caption(make_png(i)) for i in range(30)}
        assert len(captions) > 5


class TestEmbed:
    def test_default_dim_is_64(self):
        assert len(StubModel(seed=0).embed("a red ball")) == 64

    def test_dim_configurable(self):
        assert len(StubModel(seed=0, embed_dim=16).embed("words here")) == 16

    def test_deterministic(self):
        assert StubModel(seed=2).embed("night sky") == StubModel(seed=2).embed("night sky")

    def test_token_order_irrelevant(self):
        model = StubModel(seed=0)
        assert model.embed("red ball beach") == model.embed("beach red ball")

    def test_repeated_token_scales_contribution(self):
        model = StubModel(seed=0)
        once = model.embed("red")
        twice = model.embed("red red")
        assert twice == [2.0 * v for v in once]

    def test_empty_text_is_zero_vector(self):
        assert StubModel(seed=0).embed("") == [0.0] * 64
        assert StubModel(seed=0).embed("...!?") == [0.0] * 64

    def test_single_token_components_bounded(self):
        vector = StubModel(seed=0).embed("boundedness")
        assert all(-1.0 <= v <= 1.0 for v in vector)

    def test_case_and_punctuation_normalized(self):
        model = StubModel(seed=0)
        assert model.embed("Red Ball!") == model.embed("red ball")


class TestClassProbs:
    def test_shape_and_normalization(self):
        probs = StubModel(seed=0).class_probs(make_png(0))
        assert len(probs) == 1000
        assert all(p > 0.0 for p in probs)
        assert abs(sum(probs) - 1.0) <= 1e-9

    def test_classes_configurable(self):
        probs = StubModel(seed=0, classes=10).class_probs(make_png(0))
        assert len(probs) == 10
        assert abs(sum(probs) - 1.0) <= 1e-12

    def test_deterministic_and_image_sensitive(self):
        model = StubModel(seed=0)
        assert model.class_probs(make_png(1)) == model.class_probs(make_png(1))
        assert model.class_probs(make_png(1)) != model.class_probs(make_png(2))


class TestHelpers:
    def test_tokenize(self):
        assert tokenize("The Red-BALL, rolls 2x!") == ["the", "red", "ball", "rolls", "2x"]

    def test_is_png(self):
        assert is_png(make_png(0))
        assert not is_png(b"definitely not an image")

    def test_constructor_validation(self):
        with pytest.raises(ValueError, match="embed_dim"):
            StubModel(embed_dim=0)
        with pytest.raises(ValueError, match="classes"):
            StubModel(classes=1)
