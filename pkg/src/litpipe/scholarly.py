"""Clients for the Semantic Scholar and OpenAlex search APIs.

Semantic Scholar (S2):
    GET  https://api.semanticscholar.org/graph/v1/paper/search
    GET  https://api.semanticscholar.org/graph/v1/paper/URL:{url}
    POST https://api.semanticscholar.org/recommendations/v1/papers/
OpenAlex:
    GET  https://api.openalex.org/works

Both clients normalize upstream payloads into SourceRecord batches and
run against any transport (live, recording, or cassette replay).
Records that violate basic invariants (empty title, duplicated id,
negative citation count) are dropped and counted, never patched up.
"""

from __future__ import annotations

import logging
import re
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Sequence
from urllib.parse import urlsplit

from .errors import DecodeError, EmptyQuery, InvalidSeed, NotFound, RateLimited, UpstreamError
from .transport import (
    LiveTransport,
    RateLimiter,
    RetryPolicy,
    Transport,
    TransportResponse,
    send_with_retry,
)

logger = logging.getLogger(__name__)

S2_BASE_URL = "https://api.semanticscholar.org"
OPENALEX_BASE_URL = "https://api.openalex.org"

DEFAULT_FIELDS = ("title", "abstract", "year", "citationCount", "externalIds", "url", "authors")

ARXIV_ID_RE = re.compile(r"^\d{4}\.\d{4,5}(v\d+)?$")
S2_PAPER_ID_RE = re.compile(r"^[0-9a-f]{40}$")


class Source(str, Enum):
    S2 = "S2"
    OPENALEX = "OpenAlex"


@dataclass(frozen=True)
class SourceRecord:
    """One paper as reported by a single source, before any merging."""

    source: Source
    source_id: str
    title: str
    source_position: int
    abstract: str | None = None
    year: int | None = None
    citation_count: int | None = None
    external_ids: dict[str, str] = field(default_factory=dict)
    url: str | None = None
    authors: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "source": self.source.value,
            "source_id": self.source_id,
            "title": self.title,
            "source_position": self.source_position,
            "abstract": self.abstract,
            "year": self.year,
            "citation_count": self.citation_count,
            "external_ids": dict(self.external_ids),
            "url": self.url,
            "authors": list(self.authors),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SourceRecord":
        return cls(
            source=Source(data["source"]),
            source_id=data["source_id"],
            title=data["title"],
            source_position=data["source_position"],
            abstract=data.get("abstract"),
            year=data.get("year"),
            citation_count=data.get("citation_count"),
            external_ids=dict(data.get("external_ids") or {}),
            url=data.get("url"),
            authors=tuple(data.get("authors") or ()),
        )


@dataclass
class ApiCredentials:
    user_agent: str = "litpipe/0.1"
    s2_api_key: str | None = None
    contact_email: str | None = None  # OpenAlex politeness

    def __post_init__(self):
        if not self.user_agent.strip():
            raise ValueError("user_agent must be non-empty")


@dataclass
class SearchBatch:
    """Records from one response plus the upstream total-hit count."""

    records: list[SourceRecord]
    total: int | None = None
    dropped: int = 0


def invert_abstract(index: dict[str, list[int]] | None) -> str | None:
    """Rebuild plain text from OpenAlex's inverted-index abstracts."""
    if not index:
        return None
    positions: list[tuple[int, str]] = []
    for word, locations in index.items():
        for loc in locations:
            positions.append((loc, word))
    positions.sort()
    return " ".join(word for _, word in positions)


def _opt_nonneg_int(value: Any) -> tuple[int | None, bool]:
    """Returns (parsed value, ok). Negative or non-integer values fail."""
    if value is None:
        return None, True
    if isinstance(value, bool) or not isinstance(value, int):
        return None, False
    if value < 0:
        return None, False
    return value, True


class _BaseClient:
    def __init__(
        self,
        credentials: ApiCredentials | None = None,
        transport: Transport | None = None,
        base_url: str | None = None,
        retry_policy: RetryPolicy | None = None,
        rate_limiter: RateLimiter | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.credentials = credentials or ApiCredentials()
        self.transport = transport if transport is not None else LiveTransport()
        self.base_url = (base_url or self.DEFAULT_BASE_URL).rstrip("/")
        self.retry_policy = retry_policy or RetryPolicy()
        self.rate_limiter = rate_limiter or RateLimiter()
        self._sleep = sleep

    DEFAULT_BASE_URL = ""

    def _headers(self) -> dict[str, str]:
        return {"User-Agent": self.credentials.user_agent}

    def _request(
        self,
        method: str,
        path: str,
        params: dict | None = None,
        json_body: Any = None,
        missing_is_not_found: bool = False,
    ) -> TransportResponse:
        self.rate_limiter.acquire()
        rsp = send_with_retry(
            self.transport,
            method,
            f"{self.base_url}{path}",
            params=params,
            json_body=json_body,
            headers=self._headers(),
            policy=self.retry_policy,
            sleep=self._sleep,
        )
        if rsp.status == 429:
            retry_after = None
            raw = rsp.header("Retry-After")
            if raw is not None:
                try:
                    retry_after = float(raw)
                except ValueError:
                    pass
            raise RateLimited(f"{method} {path} rate limited", retry_after=retry_after)
        if rsp.status == 404 and missing_is_not_found:
            raise NotFound(f"{method} {path} answered 404")
        if not 200 <= rsp.status < 300:
            raise UpstreamError(f"{method} {path} answered {rsp.status}", status=rsp.status)
        return rsp

    @staticmethod
    def _expect_object(rsp: TransportResponse, context: str) -> dict:
        if not isinstance(rsp.body, dict):
            raise DecodeError(f"{context}: expected a JSON object, got {type(rsp.body).__name__}")
        return rsp.body


def _validate_search_args(query: str, limit: int) -> str:
    if not query.strip():
        raise EmptyQuery("search query is empty")
    if not 1 <= limit <= 100:
        raise ValueError(f"limit must be in 1..100, got {limit}")
    return query


class SemanticScholarClient(_BaseClient):
    """Semantic Scholar Graph + Recommendations API client."""

    DEFAULT_BASE_URL = S2_BASE_URL

    SEARCH_PATH = "/graph/v1/paper/search"
    PAPER_BY_URL_PATH = "/graph/v1/paper/URL:{url}"
    RECOMMENDATIONS_PATH = "/recommendations/v1/papers/"

    def _headers(self) -> dict[str, str]:
        headers = super()._headers()
        if self.credentials.s2_api_key:
            headers["X-API-KEY"] = self.credentials.s2_api_key
        return headers

    def search(
        self, query: str, limit: int, fields: Sequence[str] = DEFAULT_FIELDS
    ) -> SearchBatch:
        _validate_search_args(query, limit)
        rsp = self._request(
            "GET",
            self.SEARCH_PATH,
            params={"query": query, "limit": limit, "fields": ",".join(fields)},
        )
        body = self._expect_object(rsp, "paper search")
        items = body.get("data")
        if not isinstance(items, list):
            raise DecodeError("paper search: response has no 'data' array")
        records, dropped = self._parse_batch(items)
        return SearchBatch(records=records[:limit], total=body.get("total"), dropped=dropped)

    def recommend_from_seed(
        self, seed: str, limit: int, fields: Sequence[str] = DEFAULT_FIELDS
    ) -> SearchBatch:
        if not 1 <= limit <= 100:
            raise ValueError(f"limit must be in 1..100, got {limit}")
        seed_id = self._format_seed(seed)
        rsp = self._request(
            "POST",
            self.RECOMMENDATIONS_PATH,
            params={"fields": ",".join(fields), "limit": limit},
            json_body={"positivePaperIds": [seed_id]},
        )
        body = self._expect_object(rsp, "recommendations")
        items = body.get("recommendedPapers")
        if not isinstance(items, list):
            raise DecodeError("recommendations: response has no 'recommendedPapers' array")
        items = [item for item in items if not self._is_seed_echo(item, seed, seed_id)]
        records, dropped = self._parse_batch(items)
        return SearchBatch(records=records[:limit], total=None, dropped=dropped)

    def fetch_paper_by_url(
        self, paper_url: str, fields: Sequence[str] = DEFAULT_FIELDS
    ) -> SourceRecord:
        parts = urlsplit(paper_url)
        if not (parts.scheme and parts.netloc):
            raise ValueError(f"paper_url must be an absolute URL, got {paper_url!r}")
        rsp = self._request(
            "GET",
            self.PAPER_BY_URL_PATH.format(url=paper_url),
            params={"fields": ",".join(fields)},
            missing_is_not_found=True,
        )
        body = self._expect_object(rsp, "paper lookup")
        record = self._parse_record(body, position=0)
        if record is None:
            raise DecodeError(f"paper lookup for {paper_url}: record is unusable")
        return record

    @staticmethod
    def _format_seed(seed: str) -> str:
        seed = seed.strip()
        if ARXIV_ID_RE.match(seed):
            return f"ArXiv:{seed}"
        if S2_PAPER_ID_RE.match(seed):
            return seed
        raise InvalidSeed(f"seed {seed!r} is neither an arXiv id nor a paper id")

    @staticmethod
    def _is_seed_echo(item: Any, seed: str, seed_id: str) -> bool:
        if not isinstance(item, dict):
            return False
        if item.get("paperId") == seed:
            return True
        ext = item.get("externalIds") or {}
        return seed_id.startswith("ArXiv:") and ext.get("ArXiv") == seed

    def _parse_batch(self, items: list) -> tuple[list[SourceRecord], int]:
        records: list[SourceRecord] = []
        seen_ids: set[str] = set()
        dropped = 0
        for item in items:
            record = self._parse_record(item, position=len(records))
            if record is None or record.source_id in seen_ids:
                dropped += 1
                continue
            seen_ids.add(record.source_id)
            records.append(record)
        if dropped:
            logger.warning("dropped %d malformed or duplicated S2 records", dropped)
        return records, dropped

    @staticmethod
    def _parse_record(item: Any, position: int) -> SourceRecord | None:
        if not isinstance(item, dict):
            return None
        title = (item.get("title") or "").strip()
        if not title:
            return None
        citation_count, ok = _opt_nonneg_int(item.get("citationCount"))
        if not ok:
            return None
        ext = item.get("externalIds") or {}
        external_ids = {}
        if ext.get("DOI"):
            external_ids["doi"] = str(ext["DOI"])
        if ext.get("ArXiv"):
            external_ids["arxiv"] = str(ext["ArXiv"])
        year = item.get("year")
        if not isinstance(year, int) or isinstance(year, bool):
            year = None
        authors = tuple(
            a["name"] for a in item.get("authors") or [] if isinstance(a, dict) and a.get("name")
        )
        return SourceRecord(
            source=Source.S2,
            source_id=str(item.get("paperId") or f"s2-pos-{position}"),
            title=title,
            source_position=position,
            abstract=item.get("abstract") or None,
            year=year,
            citation_count=citation_count,
            external_ids=external_ids,
            url=item.get("url") or None,
            authors=authors,
        )


class OpenAlexClient(_BaseClient):
    """OpenAlex /works search client."""

    DEFAULT_BASE_URL = OPENALEX_BASE_URL

    WORKS_PATH = "/works"

    def search(self, query: str, limit: int) -> SearchBatch:
        _validate_search_args(query, limit)
        params: dict[str, Any] = {"search": query, "per-page": limit}
        if self.credentials.contact_email:
            params["mailto"] = self.credentials.contact_email
        rsp = self._request("GET", self.WORKS_PATH, params=params)
        body = self._expect_object(rsp, "works search")
        items = body.get("results")
        if not isinstance(items, list):
            raise DecodeError("works search: response has no 'results' array")
        records: list[SourceRecord] = []
        seen_ids: set[str] = set()
        dropped = 0
        for item in items:
            record = self._parse_record(item, position=len(records))
            if record is None or record.source_id in seen_ids:
                dropped += 1
                continue
            seen_ids.add(record.source_id)
            records.append(record)
        if dropped:
            logger.warning("dropped %d malformed or duplicated OpenAlex records", dropped)
        total = (body.get("meta") or {}).get("count")
        return SearchBatch(records=records[:limit], total=total, dropped=dropped)

    @staticmethod
    def _parse_record(item: Any, position: int) -> SourceRecord | None:
        if not isinstance(item, dict):
            return None
        title = (item.get("display_name") or item.get("title") or "").strip()
        if not title:
            return None
        citation_count, ok = _opt_nonneg_int(item.get("cited_by_count"))
        if not ok:
            return None
        work_id = str(item.get("id") or f"openalex-pos-{position}")
        if work_id.startswith("https://openalex.org/"):
            work_id = work_id.rsplit("/", 1)[-1]
        external_ids = {}
        doi = item.get("doi")
        if doi:
            external_ids["doi"] = str(doi).replace("https://doi.org/", "")
        ids = item.get("ids") or {}
        if ids.get("arxiv"):
            external_ids["arxiv"] = str(ids["arxiv"])
        year = item.get("publication_year")
        if not isinstance(year, int) or isinstance(year, bool):
            year = None
        authors = tuple(
            a["author"]["display_name"]
            for a in item.get("authorships") or []
            if isinstance(a, dict)
            and isinstance(a.get("author"), dict)
            and a["author"].get("display_name")
        )
        url = (item.get("primary_location") or {}).get("landing_page_url") or item.get("id")
        return SourceRecord(
            source=Source.OPENALEX,
            source_id=work_id,
            title=title,
            source_position=position,
            abstract=invert_abstract(item.get("abstract_inverted_index")),
            year=year,
            citation_count=citation_count,
            external_ids=external_ids,
            url=url,
            authors=authors,
        )
