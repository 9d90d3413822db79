"""LLM gateway: one chat-completion interface, swappable backends.

The live backend talks to any OpenAI-compatible chat endpoint. The
replay backend serves recorded cassettes and never dials out; the
scripted backend returns canned responses in order for unit tests.
Every completed exchange lands in the gateway's append-only audit log.
"""

from __future__ import annotations

import logging
import math
import os
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Mapping, Protocol, Sequence

import requests

from .cassette import CassetteStore, llm_request_key
from .errors import BudgetExceeded, LlmTimeout, ProviderError

logger = logging.getLogger(__name__)

API_KEY_ENV = "LITPIPE_LLM_API_KEY"
BASE_URL_ENV = "LITPIPE_LLM_BASE_URL"
DEFAULT_BASE_URL = "https://api.openai.com/v1"

# Fixed timestamp for deterministic backends, so replayed runs produce
# byte-identical audit logs.
EPOCH_ISO = "1970-01-01T00:00:00+00:00"


def estimate_tokens(text: str) -> int:
    """Heuristic token count: one token per four characters, rounded up."""
    return math.ceil(len(text) / 4)


@dataclass(frozen=True)
class LlmRequest:
    model_name: str
    user_text: str
    system_text: str | None = None
    temperature: float = 0.0
    max_output_tokens: int = 1024
    template_id: str = ""
    template_version: str = ""

    def __post_init__(self):
        if not self.user_text:
            raise ValueError("user_text must be non-empty")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature must be in [0, 2], got {self.temperature}")
        if self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be positive")

    def rendered_prompt(self) -> str:
        if self.system_text:
            return f"{self.system_text}\n\n{self.user_text}"
        return self.user_text

    def cassette_key(self) -> str:
        return llm_request_key(
            self.template_id,
            self.template_version,
            self.rendered_prompt(),
            self.model_name,
            self.temperature,
        )

    def to_dict(self) -> dict:
        return {
            "model_name": self.model_name,
            "user_text": self.user_text,
            "system_text": self.system_text,
            "temperature": self.temperature,
            "max_output_tokens": self.max_output_tokens,
            "template_id": self.template_id,
            "template_version": self.template_version,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LlmRequest":
        return cls(
            model_name=data["model_name"],
            user_text=data["user_text"],
            system_text=data.get("system_text"),
            temperature=data.get("temperature", 0.0),
            max_output_tokens=data.get("max_output_tokens", 1024),
            template_id=data.get("template_id", ""),
            template_version=data.get("template_version", ""),
        )


@dataclass
class LlmExchange:
    """One prompt/response pair; response text is stored verbatim."""

    exchange_id: str
    request: LlmRequest
    response_text: str
    latency: float
    provider: str
    timestamp: str

    def to_dict(self) -> dict:
        return {
            "exchange_id": self.exchange_id,
            "request": self.request.to_dict(),
            "response_text": self.response_text,
            "latency": self.latency,
            "provider": self.provider,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LlmExchange":
        return cls(
            exchange_id=data["exchange_id"],
            request=LlmRequest.from_dict(data["request"]),
            response_text=data["response_text"],
            latency=data["latency"],
            provider=data["provider"],
            timestamp=data["timestamp"],
        )


@dataclass
class BackendResult:
    text: str
    provider: str
    timestamp: str
    latency: float = 0.0


class LlmBackend(Protocol):
    def complete(self, request: LlmRequest) -> BackendResult: ...


class ScriptedBackend:
    """Returns canned responses in order; for unit tests."""

    def __init__(self, responses: Sequence[str]):
        self._queue = list(responses)
        self._lock = threading.Lock()

    def complete(self, request: LlmRequest) -> BackendResult:
        with self._lock:
            if not self._queue:
                raise ProviderError("scripted backend has no responses left")
            text = self._queue.pop(0)
        return BackendResult(text=text, provider="scripted", timestamp=EPOCH_ISO)


class ReplayBackend:
    """Serves recorded responses keyed by the request's cassette key."""

    def __init__(self, store: CassetteStore | str | Path):
        self.store = store if isinstance(store, CassetteStore) else CassetteStore(store)

    def complete(self, request: LlmRequest) -> BackendResult:
        doc = self.store.get(request.cassette_key())
        body = doc["response"]["body"]
        return BackendResult(
            text=body["text"],
            provider=body.get("provider", "replay"),
            timestamp=body.get("timestamp", EPOCH_ISO),
        )


class LiveBackend:
    """POSTs to an OpenAI-compatible /chat/completions endpoint."""

    def __init__(
        self,
        base_url: str | None = None,
        api_key: str | None = None,
        timeout: float = 120.0,
    ):
        self.base_url = (base_url or os.environ.get(BASE_URL_ENV) or DEFAULT_BASE_URL).rstrip("/")
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        self.timeout = timeout

    def complete(self, request: LlmRequest) -> BackendResult:
        messages = []
        if request.system_text:
            messages.append({"role": "system", "content": request.system_text})
        messages.append({"role": "user", "content": request.user_text})
        payload = {
            "model": request.model_name,
            "messages": messages,
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        }
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        started = time.perf_counter()
        try:
            rsp = requests.post(
                f"{self.base_url}/chat/completions",
                json=payload,
                headers=headers,
                timeout=self.timeout,
            )
        except requests.Timeout as exc:
            raise LlmTimeout(f"provider did not answer within {self.timeout}s") from exc
        except requests.RequestException as exc:
            raise ProviderError(f"provider request failed: {exc}") from exc
        latency = time.perf_counter() - started
        if not 200 <= rsp.status_code < 300:
            raise ProviderError(f"provider answered {rsp.status_code}: {rsp.text[:300]}")
        try:
            text = rsp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"provider payload is not chat-completion shaped: {exc}") from exc
        return BackendResult(
            text=text,
            provider="openai-compatible",
            timestamp=datetime.now(timezone.utc).isoformat(),
            latency=latency,
        )


class RecordingBackend:
    """Wraps another backend and writes each exchange to a cassette."""

    def __init__(self, inner: LlmBackend, store: CassetteStore | str | Path):
        self.inner = inner
        self.store = store if isinstance(store, CassetteStore) else CassetteStore(store)

    def complete(self, request: LlmRequest) -> BackendResult:
        result = self.inner.complete(request)
        self.store.put(
            request.cassette_key(),
            request={
                "method": "POST",
                "url": f"llm://{request.model_name}/chat-completions",
                "body": request.to_dict(),
            },
            response={
                "status": 200,
                "headers": {},
                "body": {
                    "text": result.text,
                    "provider": result.provider,
                    "timestamp": result.timestamp,
                },
            },
        )
        return result


class LlmGateway:
    """Budget-checked completions with an append-only audit log."""

    def __init__(
        self,
        backend: LlmBackend,
        token_estimator: Callable[[str], int] = estimate_tokens,
        context_limits: Mapping[str, int] | None = None,
        default_context_tokens: int = 8192,
    ):
        self.backend = backend
        self.token_estimator = token_estimator
        self.context_limits = dict(context_limits or {})
        self.default_context_tokens = default_context_tokens
        self._audit: list[LlmExchange] = []
        self._lock = threading.Lock()

    def context_limit(self, model_name: str) -> int:
        return self.context_limits.get(model_name, self.default_context_tokens)

    @property
    def audit_log(self) -> tuple[LlmExchange, ...]:
        with self._lock:
            return tuple(self._audit)

    def audit_mark(self) -> int:
        with self._lock:
            return len(self._audit)

    def audit_since(self, mark: int) -> list[LlmExchange]:
        with self._lock:
            return list(self._audit[mark:])

    def complete(self, request: LlmRequest) -> LlmExchange:
        prompt = request.rendered_prompt()
        tokens = self.token_estimator(prompt)
        limit = self.context_limit(request.model_name)
        if tokens > limit:
            raise BudgetExceeded(
                f"prompt is ~{tokens} tokens but {request.model_name} fits {limit}"
            )
        result = self.backend.complete(request)
        with self._lock:
            exchange = LlmExchange(
                exchange_id=f"{len(self._audit) + 1:04d}-{request.cassette_key()[:12]}",
                request=request,
                response_text=result.text,
                latency=result.latency,
                provider=result.provider,
                timestamp=result.timestamp,
            )
            self._audit.append(exchange)
        return exchange
