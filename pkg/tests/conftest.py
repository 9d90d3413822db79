from __future__ import annotations

import json
import random
from pathlib import Path

import pytest

from litpipe.cassette import CassetteStore, http_request_key
from litpipe.corpus import PaperRecord
from litpipe.llm import LlmGateway, ScriptedBackend
from litpipe.scholarly import Source, SourceRecord

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES_DIR = REPO_ROOT / "fixtures" / "demo"


@pytest.fixture
def demo_fixtures() -> Path:
    assert FIXTURES_DIR.is_dir(), "run scripts/build_demo_fixtures.py first"
    return FIXTURES_DIR


@pytest.fixture
def demo_expected(demo_fixtures) -> dict:
    return json.loads((demo_fixtures / "expected.json").read_text(encoding="utf-8"))


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0xC0FFEE)


def scripted_gateway(*responses: str, **kwargs) -> LlmGateway:
    return LlmGateway(ScriptedBackend(list(responses)), **kwargs)


def write_http_cassette(
    directory: Path,
    method: str,
    url: str,
    params: dict | None = None,
    json_body=None,
    status: int = 200,
    response_body=None,
    response_headers: dict | None = None,
) -> str:
    store = CassetteStore(directory)
    key = http_request_key(method, url, params, json_body)
    store.put(
        key,
        request={"method": method.upper(), "url": url, "body": json_body},
        response={
            "status": status,
            "headers": response_headers or {},
            "body": response_body,
        },
    )
    return key


def make_source_record(
    position: int,
    title: str = "Some Paper",
    source: Source = Source.S2,
    doi: str | None = None,
    arxiv: str | None = None,
    **kwargs,
) -> SourceRecord:
    external_ids = {}
    if doi:
        external_ids["doi"] = doi
    if arxiv:
        external_ids["arxiv"] = arxiv
    return SourceRecord(
        source=source,
        source_id=kwargs.pop("source_id", f"{source.value}-{position}-{title[:8]}"),
        title=title,
        source_position=position,
        external_ids=external_ids,
        **kwargs,
    )


def make_paper(
    index: int,
    title: str | None = None,
    citation_count: int | None = None,
    year: int | None = None,
    abstract: str | None = "An abstract about the topic.",
    sources: frozenset = frozenset({Source.S2}),
) -> PaperRecord:
    return PaperRecord(
        canonical_id=f"paper-{index}",
        title=title or f"Paper {index}",
        best_source_position=index,
        sources=sources,
        abstract=abstract,
        year=year,
        citation_count=citation_count,
    )
