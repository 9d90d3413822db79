"""Record/replay storage for HTTP and LLM exchanges.

A cassette directory holds one JSON document per recorded exchange:

    {"key": ..., "request": {"method", "url", "body"},
     "response": {"status", "headers", "body"}}

Scholarly-API exchanges are keyed by a hash of method + URL + query
parameters + body. LLM exchanges are keyed by template id/version,
rendered prompt, model name and temperature, so editing a prompt
template invalidates stale recordings.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Mapping
from urllib.parse import parse_qsl, urlsplit

from .errors import CassetteMiss

SENSITIVE_HEADERS = ("x-api-key", "authorization")


def _canonical(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def http_request_key(
    method: str,
    url: str,
    params: Mapping[str, Any] | None = None,
    json_body: Any = None,
) -> str:
    """Canonical hash of an HTTP request: method + path + query + body.

    Query parameters given in the URL and via `params` are merged and
    sorted, so equivalent requests hash identically regardless of how
    the caller spelled them.
    """
    parts = urlsplit(url)
    query = parse_qsl(parts.query, keep_blank_values=True)
    if params:
        query.extend((str(k), str(v)) for k, v in params.items())
    payload = {
        "method": method.upper(),
        "url": f"{parts.scheme}://{parts.netloc}{parts.path}",
        "query": sorted(query),
        "body": json_body,
    }
    return _sha256(_canonical(payload))


def llm_request_key(
    template_id: str,
    template_version: str,
    prompt: str,
    model_name: str,
    temperature: float,
) -> str:
    """Canonical hash of an LLM request, independent of transport details."""
    payload = {
        "template_id": template_id,
        "template_version": template_version,
        "prompt": prompt,
        "model": model_name,
        "temperature": round(float(temperature), 6),
    }
    return _sha256(_canonical(payload))


def scrub_headers(headers: Mapping[str, str]) -> dict[str, str]:
    """Drop credential-bearing headers before anything hits disk."""
    return {k: v for k, v in headers.items() if k.lower() not in SENSITIVE_HEADERS}


class CassetteStore:
    """Directory of recorded exchanges, one JSON file per request key."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)

    def path_for(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def contains(self, key: str) -> bool:
        return self.path_for(key).is_file()

    def get(self, key: str) -> dict:
        path = self.path_for(key)
        if not path.is_file():
            raise CassetteMiss(key)
        with path.open("r", encoding="utf-8") as fh:
            return json.load(fh)

    def put(self, key: str, request: dict, response: dict) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        doc = {"key": key, "request": request, "response": response}
        path = self.path_for(key)
        path.write_text(
            json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
        return path
