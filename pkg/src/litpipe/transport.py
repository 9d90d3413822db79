"""HTTP transports: live, replaying, and recording.

Search clients talk to a Transport rather than to `requests` directly,
so tests and offline runs can swap the network for a cassette directory
without touching client code.
"""

from __future__ import annotations

import logging
import random
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Mapping, Protocol
from urllib.parse import urlencode

import requests

from .cassette import CassetteStore, http_request_key, scrub_headers
from .errors import UpstreamError

logger = logging.getLogger(__name__)


@dataclass
class TransportResponse:
    status: int
    headers: dict[str, str]
    body: Any  # parsed JSON when the payload was JSON, raw text otherwise

    def header(self, name: str) -> str | None:
        for key, value in self.headers.items():
            if key.lower() == name.lower():
                return value
        return None


class Transport(Protocol):
    def send(
        self,
        method: str,
        url: str,
        params: Mapping[str, Any] | None = None,
        json_body: Any = None,
        headers: Mapping[str, str] | None = None,
    ) -> TransportResponse: ...


class LiveTransport:
    """Sends requests over the network."""

    def __init__(self, timeout: float = 30.0):
        self.timeout = timeout

    def send(self, method, url, params=None, json_body=None, headers=None):
        try:
            rsp = requests.request(
                method,
                url,
                params=params,
                json=json_body,
                headers=dict(headers or {}),
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise UpstreamError(f"{method} {url} failed: {exc}") from exc
        try:
            body = rsp.json()
        except ValueError:
            body = rsp.text
        return TransportResponse(rsp.status_code, dict(rsp.headers), body)


class ReplayTransport:
    """Serves responses from a cassette directory; never dials out."""

    def __init__(self, store: CassetteStore | str | Path):
        self.store = store if isinstance(store, CassetteStore) else CassetteStore(store)

    def send(self, method, url, params=None, json_body=None, headers=None):
        key = http_request_key(method, url, params, json_body)
        doc = self.store.get(key)
        recorded = doc["response"]
        return TransportResponse(
            recorded["status"], dict(recorded.get("headers") or {}), recorded.get("body")
        )


class RecordingTransport:
    """Wraps another transport and writes every exchange to a cassette."""

    def __init__(self, store: CassetteStore | str | Path, inner: Transport | None = None):
        self.store = store if isinstance(store, CassetteStore) else CassetteStore(store)
        self.inner = inner if inner is not None else LiveTransport()

    def send(self, method, url, params=None, json_body=None, headers=None):
        rsp = self.inner.send(method, url, params=params, json_body=json_body, headers=headers)
        key = http_request_key(method, url, params, json_body)
        display_url = url
        if params:
            display_url = f"{url}?{urlencode({k: str(v) for k, v in params.items()})}"
        self.store.put(
            key,
            request={"method": method.upper(), "url": display_url, "body": json_body},
            response={
                "status": rsp.status,
                "headers": scrub_headers(rsp.headers),
                "body": rsp.body,
            },
        )
        return rsp


@dataclass
class RetryPolicy:
    """Exponential backoff on 429/5xx; Retry-After wins when larger."""

    max_retries: int = 3
    backoff_base: float = 1.0
    backoff_factor: float = 2.0
    max_jitter: float = 0.25  # seconds, uniform, keeps delays monotone

    def delay(self, attempt: int, rng: random.Random) -> float:
        return self.backoff_base * self.backoff_factor**attempt + rng.uniform(0, self.max_jitter)


def _retryable(status: int) -> bool:
    return status == 429 or 500 <= status < 600


def send_with_retry(
    transport: Transport,
    method: str,
    url: str,
    *,
    params: Mapping[str, Any] | None = None,
    json_body: Any = None,
    headers: Mapping[str, str] | None = None,
    policy: RetryPolicy | None = None,
    sleep: Callable[[float], None] = time.sleep,
    rng: random.Random | None = None,
) -> TransportResponse:
    """Send a request, retrying 429/5xx responses per the policy.

    Returns the final response even when it is still an error status;
    mapping statuses to exceptions is the caller's job.
    """
    policy = policy or RetryPolicy()
    rng = rng or random.Random()
    attempt = 0
    while True:
        rsp = transport.send(method, url, params=params, json_body=json_body, headers=headers)
        if not _retryable(rsp.status) or attempt >= policy.max_retries:
            return rsp
        delay = policy.delay(attempt, rng)
        retry_after = rsp.header("Retry-After")
        if retry_after:
            try:
                delay = max(delay, float(retry_after))
            except ValueError:
                pass
        logger.info("retrying %s %s after %.2fs (status %s)", method, url, delay, rsp.status)
        sleep(delay)
        attempt += 1


class RateLimiter:
    """Serializes request admission so one source is not hammered.

    Thread-safe; a zero interval disables waiting entirely.
    """

    def __init__(
        self,
        min_interval: float = 0.0,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.min_interval = min_interval
        self._clock = clock
        self._sleep = sleep
        self._lock = threading.Lock()
        self._next_slot = 0.0

    def acquire(self) -> None:
        if self.min_interval <= 0:
            return
        with self._lock:
            now = self._clock()
            wait = self._next_slot - now
            self._next_slot = max(now, self._next_slot) + self.min_interval
        if wait > 0:
            self._sleep(wait)
