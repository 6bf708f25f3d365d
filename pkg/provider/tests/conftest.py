"""Fixtures for the provider service tests."""

from __future__ import annotations

import json

import pytest

from provider_helpers import SCHEMA_PATH, start_server


@pytest.fixture(scope="module")
def schema_defs() -> dict:
    return json.loads(SCHEMA_PATH.read_text(encoding="utf-8"))["$defs"]


@pytest.fixture(scope="module")
def stub_url():
    server, thread, url = start_server(mode="stub", seed=0)
    yield url
    server.shutdown()
    server.server_close()
    thread.join(timeout=5)


@pytest.fixture(scope="module")
def live_url():
    server, thread, url = start_server(mode="live")
    yield url
    server.shutdown()
    server.server_close()
    thread.join(timeout=5)
