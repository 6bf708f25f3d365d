"""Shared model-file container: exact array round trips and the
self-description checks (version, kind, malformed payloads)."""

import json

import numpy as np
import pytest

from t2vqa.modelfile import (
    FORMAT_VERSION,
    ModelFormatError,
    decode_array,
    encode_array,
    read_model,
    write_model,
)


class TestArrayCodec:
    def test_round_trip_is_bit_exact(self):
        rng = np.random.default_rng(0)
        for shape in [(5,), (3, 4), (2, 3, 4)]:
            arr = rng.standard_normal(shape)
            np.testing.assert_array_equal(decode_array(encode_array(arr)), arr)

    def test_special_values_survive(self):
        arr = np.array([0.0, -0.0, np.inf, -np.inf, np.nan, 1e-308])
        out = decode_array(encode_array(arr))
        np.testing.assert_array_equal(np.isnan(out), np.isnan(arr))
        np.testing.assert_array_equal(out[~np.isnan(out)], arr[~np.isnan(arr)])

    def test_non_float_input_cast_to_float64(self):
        out = decode_array(encode_array(np.array([1, 2, 3])))
        assert out.dtype == np.float64
        np.testing.assert_array_equal(out, [1.0, 2.0, 3.0])

    def test_malformed_field_raises(self):
        with pytest.raises(ModelFormatError, match="malformed matrix"):
            decode_array({"shape": [2, 2], "data": "not-base64!!"})
        with pytest.raises(ModelFormatError, match="malformed matrix"):
            decode_array({"shape": [5]})


class TestContainer:
    def test_write_read_round_trip(self, tmp_path):
        path = tmp_path / "m.json"
        write_model(path, "demo", {"alpha": 1.5, "w": encode_array(np.arange(3.0))})
        doc = read_model(path, "demo")
        assert doc["version"] == FORMAT_VERSION
        assert doc["alpha"] == 1.5
        np.testing.assert_array_equal(decode_array(doc["w"]), [0.0, 1.0, 2.0])

    def test_output_is_stable_json(self, tmp_path):
        """Keys are sorted so identical models serialize identically."""
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        write_model(a, "demo", {"z": 1, "a": 2})
        write_model(b, "demo", {"a": 2, "z": 1})
        assert a.read_bytes() == b.read_bytes()

    def test_missing_file(self, tmp_path):
        with pytest.raises(ModelFormatError, match="not found"):
            read_model(tmp_path / "absent.json", "demo")

    def test_wrong_kind(self, tmp_path):
        path = tmp_path / "m.json"
        write_model(path, "demo", {})
        with pytest.raises(ModelFormatError, match="holds a 'demo' model"):
            read_model(path, "other")

    def test_wrong_version(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps({"version": 99, "kind": "demo"}))
        with pytest.raises(ModelFormatError, match="version 99"):
            read_model(path, "demo")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text("{not json")
        with pytest.raises(ModelFormatError, match="not valid JSON"):
            read_model(path, "demo")
