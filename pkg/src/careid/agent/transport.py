"""Envelope transport between agents, with an anti-replay inbound guard.

Two interchangeable carriers: an in-process router (fast, test-friendly, with
a tap hook for capturing and re-injecting traffic) and plain HTTP POSTs to
another agent's inbound endpoint. Both move opaque sealed-envelope bytes and
return a JSON response that may carry a sealed reply.
"""

from __future__ import annotations

import threading
from typing import Callable, Protocol

import httpx

from careid.agent.records import AgentError, ReplayRejected
from careid.clock import Clock


class TransportError(AgentError):
    pass


class Transport(Protocol):
    def send(self, endpoint: str, raw: bytes) -> dict: ...


class InProcessRouter:
    """Delivers envelope bytes to registered handlers keyed by endpoint."""

    def __init__(self):
        self.handlers: dict[str, Callable[[bytes], dict]] = {}
        # observers get (endpoint, raw) for every send; tests use this to
        # capture traffic and replay it later
        self.taps: list[Callable[[str, bytes], None]] = []

    def register(self, endpoint: str, handler: Callable[[bytes], dict]) -> None:
        self.handlers[endpoint] = handler

    def send(self, endpoint: str, raw: bytes) -> dict:
        for tap in self.taps:
            tap(endpoint, raw)
        handler = self.handlers.get(endpoint)
        if handler is None:
            return {"ok": False, "error": f"no agent listens on {endpoint}"}
        return handler(raw)


class HttpTransport:
    """POSTs envelope bytes to ``{endpoint}/didcomm``."""

    def __init__(self, timeout: float = 10.0, client: httpx.Client | None = None):
        self._client = client or httpx.Client(timeout=timeout)

    def send(self, endpoint: str, raw: bytes) -> dict:
        url = endpoint.rstrip("/") + "/didcomm"
        try:
            response = self._client.post(
                url, content=raw, headers={"content-type": "application/json"}
            )
            return response.json()
        except httpx.HTTPError as exc:
            return {"ok": False, "error": f"transport failure: {exc}"}


class ReplayGuard:
    """Rejects envelopes seen before or timestamped outside the window."""

    def __init__(self, clock: Clock, window_ms: int):
        self.clock = clock
        self.window_ms = window_ms
        self._seen: set[tuple[bytes, bytes]] = set()
        self._lock = threading.Lock()

    def check(self, sender_key: bytes, nonce: bytes, timestamp_ms: int) -> None:
        now = self.clock.now_ms()
        if abs(now - timestamp_ms) > self.window_ms:
            raise ReplayRejected(f"timestamp {timestamp_ms} outside {self.window_ms}ms window")
        with self._lock:
            if (sender_key, nonce) in self._seen:
                raise ReplayRejected("envelope nonce already seen from this sender")
            self._seen.add((sender_key, nonce))
