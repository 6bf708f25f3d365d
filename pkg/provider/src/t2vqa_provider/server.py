"""HTTP front end for the caption / embed / class_probs endpoints.

Stateless request handling on a threading server; the model object is
created once and only read afterwards, so concurrent requests are safe.
In ``live`` mode no weights ship with this package, so the three model
endpoints answer 503 until a real backend is wired in; ``stub`` mode
serves the deterministic hash model and needs nothing.

Wire protocol (shared schema file: ``schemas/provider.schema.json``):

- ``POST /caption``       ``{"image": <base64 PNG>}`` -> ``{"caption": str}``
- ``POST /caption_batch`` ``{"images": [<base64 PNG>, ...]}`` -> ``{"captions": [str, ...]}``
- ``POST /embed``         ``{"text": str}`` -> ``{"vector": [float], "dim": int}``
- ``POST /class_probs``   ``{"image": <base64 PNG>}`` -> ``{"probs": [float], "classes": int}``
- ``GET  /health``        -> ``{"status": "ok", "mode": "stub" | "live"}``

Malformed requests get 400 with ``{"error": str}``; an unavailable model
gets 503.  Responses are serialized with sorted keys so identical inputs
yield identical bytes.
"""

from __future__ import annotations

import base64
import binascii
import json
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from t2vqa_provider.stub import StubModel, is_png

MODES = ("stub", "live")
_MAX_BODY_BYTES = 64 * 1024 * 1024


class RequestError(ValueError):
    """A malformed request; reported to the client as HTTP 400."""


def _decode_image(field: str, value) -> bytes:
    if not isinstance(value, str):
        raise RequestError(f"field {field!r} must be a base64 string")
    try:
        raw = base64.b64decode(value, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise RequestError(f"field {field!r} is not valid base64: {exc}") from exc
    if not is_png(raw):
        raise RequestError(f"field {field!r} does not decode to a PNG image")
    return raw


class ProviderHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "t2vqa-provider"

    # ------------------------------------------------------------------
    # plumbing

    def log_message(self, format, *args):  # noqa: A002  (stdlib signature)
        pass  # keep test output clean; operational logging is the caller's job

    def _send(self, status: int, doc: dict) -> None:
        body = json.dumps(doc, sort_keys=True).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _read_json(self) -> dict:
        length = self.headers.get("Content-Length")
        if length is None:
            raise RequestError("missing Content-Length header")
        n = int(length)
        if n > _MAX_BODY_BYTES:
            raise RequestError(f"request body exceeds {_MAX_BODY_BYTES} bytes")
        try:
            doc = json.loads(self.rfile.read(n).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise RequestError(f"request body is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise RequestError("request body must be a JSON object")
        return doc

    # ------------------------------------------------------------------
    # routes

    def do_GET(self) -> None:
        if self.path == "/health":
            self._send(200, {"status": "ok", "mode": self.server.mode})
        else:
            self._send(404, {"error": f"unknown path {self.path!r}"})

    def do_POST(self) -> None:
        handlers = {
            "/caption": self._handle_caption,
            "/caption_batch": self._handle_caption_batch,
            "/embed": self._handle_embed,
            "/class_probs": self._handle_class_probs,
        }
        handler = handlers.get(self.path)
        if handler is None:
            self._send(404, {"error": f"unknown path {self.path!r}"})
            return
        if self.server.model is None:
            self._send(503, {"error": "model not loaded"})
            return
        try:
            self._send(200, handler(self._read_json()))
        except RequestError as exc:
            self._send(400, {"error": str(exc)})

    # ------------------------------------------------------------------
    # endpoint bodies

    def _handle_caption(self, doc: dict) -> dict:
        if "image" not in doc:
            raise RequestError("field 'image' is required")
        return {"caption": self.server.model.caption(_decode_image("image", doc["image"]))}

    def _handle_caption_batch(self, doc: dict) -> dict:
        images = doc.get("images")
        if not isinstance(images, list) or not images:
            raise RequestError("field 'images' must be a non-empty list")
        decoded = [_decode_image(f"images[{i}]", img) for i, img in enumerate(images)]
        return {"captions": [self.server.model.caption(raw) for raw in decoded]}

    def _handle_embed(self, doc: dict) -> dict:
        text = doc.get("text")
        if not isinstance(text, str):
            raise RequestError("field 'text' must be a string")
        vector = self.server.model.embed(text)
        return {"vector": vector, "dim": len(vector)}

    def _handle_class_probs(self, doc: dict) -> dict:
        if "image" not in doc:
            raise RequestError("field 'image' is required")
        probs = self.server.model.class_probs(_decode_image("image", doc["image"]))
        return {"probs": probs, "classes": len(probs)}


class ProviderServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address, mode: str, model: StubModel | None):
        self.mode = mode
        self.model = model
        super().__init__(address, ProviderHandler)


def make_server(port: int = 0, mode: str = "stub", seed: int = 0,
                embed_dim: int = 64, classes: int = 1000,
                host: str = "127.0.0.1") -> ProviderServer:
    """Build (but do not start) the HTTP server; ``port=0`` picks a free
    port, readable afterwards from ``server.server_address``.

    ``live`` mode has no bundled weights: it serves /health normally and
    503 on the model endpoints, keeping the wire protocol testable.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {list(MODES)}, got {mode!r}")
    model = StubModel(seed=seed, embed_dim=embed_dim, classes=classes) \
        if mode == "stub" else None
    return ProviderServer((host, port), mode, model)
