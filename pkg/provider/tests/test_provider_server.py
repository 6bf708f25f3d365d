"""HTTP surface of the provider service: endpoint results match the stub
model directly, schema validation on every payload, error statuses, live
mode, concurrency, and the command-line entry point."""

import base64
import json
import subprocess
import sys
from concurrent.futures import ThreadPoolExecutor

import jsonschema
import pytest
import requests

from t2vqa_provider.server import make_server
from t2vqa_provider.stub import CAPTION_PHRASES, StubModel

from provider_helpers import make_png, start_server


def b64(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


class TestEndpoints:
    def test_health(self, stub_url, schema_defs):
        doc = requests.get(f"{stub_url}/health", timeout=5).json()
        assert doc == {"status": "ok", "mode": "stub"}
        jsonschema.validate(doc, schema_defs["health_response"])

    def test_caption_matches_direct_model(self, stub_url, schema_defs):
        image = make_png(4)
        resp = requests.post(f"{stub_url}/caption", json={"image": b64(image)}, timeout=5)
        assert resp.status_code == 200
        doc = resp.json()
        jsonschema.validate(doc, schema_defs["caption_response"])
        assert doc["caption"] == StubModel(seed=0).caption(image)
        assert doc["caption"] in CAPTION_PHRASES

    def test_caption_batch_preserves_order(self, stub_url, schema_defs):
        images = [make_png(i) for i in range(3)]
        resp = requests.post(f"{stub_url}/caption_batch",
                             json={"images": [b64(img) for img in images]}, timeout=5)
        assert resp.status_code == 200
        doc = resp.json()
        jsonschema.validate(doc, schema_defs["caption_batch_response"])
        model = StubModel(seed=0)
        assert doc["captions"] == [model.caption(img) for img in images]

    def test_embed_matches_direct_model(self, stub_url, schema_defs):
        resp = requests.post(f"{stub_url}/embed", json={"text": "a red ball"}, timeout=5)
        assert resp.status_code == 200
        doc = resp.json()
        jsonschema.validate(doc, schema_defs["embed_response"])
        assert doc["dim"] == 64
        assert doc["vector"] == StubModel(seed=0).embed("a red ball")

    def test_class_probs_normalized(self, stub_url, schema_defs):
        image = make_png(9)
        resp = requests.post(f"{stub_url}/class_probs", json={"image": b64(image)}, timeout=5)
        assert resp.status_code == 200
        doc = resp.json()
        jsonschema.validate(doc, schema_defs["class_probs_response"])
        assert doc["classes"] == 1000
        assert len(doc["probs"]) == 1000
        assert abs(sum(doc["probs"]) - 1.0) <= 1e-6
        assert doc["probs"] == StubModel(seed=0).class_probs(image)


class TestDeterminism:
    def test_same_request_same_bytes(self, stub_url):
        payload = {"image": b64(make_png(7))}
        first = requests.post(f"{stub_url}/class_probs", json=payload, timeout=5)
        second = requests.post(f"{stub_url}/class_probs", json=payload, timeout=5)
        assert first.content == second.content

    def test_fresh_server_same_bytes(self, stub_url):
        payload = {"text": "waves on the shore"}
        body = requests.post(f"{stub_url}/embed", json=payload, timeout=5).content
        server, thread, url = start_server(mode="stub", seed=0)
        try:
            again = requests.post(f"{url}/embed", json=payload, timeout=5).content
        finally:
            server.shutdown()
            server.server_close()
            thread.join(timeout=5)
        assert again == body

    def test_concurrent_requests_agree(self, stub_url):
        payload = {"image": b64(make_png(11))}

        def one(_):
            return requests.post(f"{stub_url}/caption", json=payload, timeout=10).content

        with ThreadPoolExecutor(max_workers=8) as pool:
            results = list(pool.map(one, range(16)))
        assert len(set(results)) == 1


class TestErrors:
    def test_invalid_json_body(self, stub_url, schema_defs):
        resp = requests.post(f"{stub_url}/embed", data=b"{not json",
                             headers={"Content-Type": "application/json"}, timeout=5)
        assert resp.status_code == 400
        doc = resp.json()
        jsonschema.validate(doc, schema_defs["error_response"])
        assert "not valid JSON" in doc["error"]

    def test_missing_field(self, stub_url):
        resp = requests.post(f"{stub_url}/caption", json={"picture": "x"}, timeout=5)
        assert resp.status_code == 400
        assert "'image' is required" in resp.json()["error"]

    def test_bad_base64(self, stub_url):
        resp = requests.post(f"{stub_url}/caption", json={"image": "@@@"}, timeout=5)
        assert resp.status_code == 400
        assert "not valid base64" in resp.json()["error"]

    def test_non_png_payload(self, stub_url):
        resp = requests.post(f"{stub_url}/caption",
                             json={"image": b64(b"plain text bytes")}, timeout=5)
        assert resp.status_code == 400
        assert "not" in resp.json()["error"] and "PNG" in resp.json()["error"]

    def test_non_string_text(self, stub_url):
        resp = requests.post(f"{stub_url}/embed", json={"text": 42}, timeout=5)
        assert resp.status_code == 400
        assert "'text' must be a string" in resp.json()["error"]

    def test_empty_batch(self, stub_url):
        resp = requests.post(f"{stub_url}/caption_batch", json={"images": []}, timeout=5)
        assert resp.status_code == 400
        assert "non-empty" in resp.json()["error"]

    def test_unknown_paths(self, stub_url):
        assert requests.get(f"{stub_url}/nope", timeout=5).status_code == 404
        assert requests.post(f"{stub_url}/nope", json={}, timeout=5).status_code == 404

    def test_body_must_be_object(self, stub_url):
        resp = requests.post(f"{stub_url}/embed", json=["text"], timeout=5)
        assert resp.status_code == 400
        assert "JSON object" in resp.json()["error"]


class TestLiveMode:
    def test_health_reports_live(self, live_url, schema_defs):
        doc = requests.get(f"{live_url}/health", timeout=5).json()
        assert doc == {"status": "ok", "mode": "live"}
        jsonschema.validate(doc, schema_defs["health_response"])

    def test_model_endpoints_answer_503(self, live_url, schema_defs):
        for path, payload in (
            ("/caption", {"image": b64(make_png(0))}),
            ("/embed", {"text": "hello"}),
            ("/class_probs", {"image": b64(make_png(0))}),
        ):
            resp = requests.post(f"{live_url}{path}", json=payload, timeout=5)
            assert resp.status_code == 503
            doc = resp.json()
            jsonschema.validate(doc, schema_defs["error_response"])
            assert doc["error"] == "model not loaded"


class TestConstruction:
    def test_invalid_mode_rejected(self):
        with pytest.raises(ValueError, match="mode must be one of"):
            make_server(port=0, mode="offline")

    def test_custom_dims_flow_through(self, schema_defs):
        server, thread, url = start_server(mode="stub", seed=1, embed_dim=8, classes=10)
        try:
            doc = requests.post(f"{url}/embed", json={"text": "tiny"}, timeout=5).json()
            assert doc["dim"] == 8
            probs = requests.post(f"{url}/class_probs",
                                  json={"image": b64(make_png(0))}, timeout=5).json()
            assert probs["classes"] == 10
            jsonschema.validate(probs, schema_defs["class_probs_response"])
        finally:
            server.shutdown()
            server.server_close()
            thread.join(timeout=5)


class TestCommandLine:
    def test_serves_until_terminated(self):
        proc = subprocess.Popen(
            [sys.executable, "-m", "t2vqa_provider", "--port", "0", "--seed", "2"],
            stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True,
        )
        try:
            banner = proc.stdout.readline().strip()
            assert banner.startswith("serving stub provider on http://")
            url = banner.split(" on ", 1)[1]
            doc = requests.get(f"{url}/health", timeout=5).json()
            assert doc == {"status": "ok", "mode": "stub"}
        finally:
            proc.terminate()
            proc.wait(timeout=10)
