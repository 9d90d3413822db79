from __future__ import annotations

import json

import pytest

from litpipe.errors import (
    DecodeError,
    EmptyQuery,
    InvalidSeed,
    NotFound,
    RateLimited,
    UpstreamError,
)
from litpipe.scholarly import (
    DEFAULT_FIELDS,
    ApiCredentials,
    OpenAlexClient,
    SemanticScholarClient,
    Source,
    invert_abstract,
)
from litpipe.transport import RateLimiter, ReplayTransport, RetryPolicy

from .conftest import write_http_cassette
from .stub_server import StubServer

NO_SLEEP = lambda seconds: None

S2_SEARCH_URL = "https://api.semanticscholar.org/graph/v1/paper/search"


def s2_paper(i: int, **over) -> dict:
    paper = {
        "paperId": f"id-{i}",
        "title": f"Paper number {i}",
        "abstract": f"Abstract {i}.",
        "year": 2020 + i,
        "citationCount": i * 10,
        "externalIds": {"DOI": f"10.1/{i}"},
        "url": f"https://example.test/{i}",
        "authors": [{"authorId": f"a{i}", "name": f"Author {i}"}],
    }
    paper.update(over)
    return paper


def replay_client(tmp_path, **kwargs) -> SemanticScholarClient:
    return SemanticScholarClient(
        transport=ReplayTransport(tmp_path), sleep=NO_SLEEP, **kwargs
    )


class TestS2Search:
    def search_cassette(self, tmp_path, data, total=None, query="multimodal", limit=4):
        write_http_cassette(
            tmp_path,
            "GET",
            S2_SEARCH_URL,
            params={"query": query, "limit": limit, "fields": ",".join(DEFAULT_FIELDS)},
            response_body={"total": total if total is not None else len(data), "data": data},
        )

    def test_parses_records_with_positions(self, tmp_path):
        self.search_cassette(tmp_path, [s2_paper(i) for i in range(4)], total=321)
        batch = replay_client(tmp_path).search("multimodal", 4)
        assert [r.source_position for r in batch.records] == [0, 1, 2, 3]
        assert batch.total == 321
        assert batch.records[0].source is Source.S2
        assert batch.records[0].external_ids == {"doi": "10.1/0"}
        assert batch.records[0].authors == ("Author 0",)

    def test_empty_query_rejected(self, tmp_path):
        with pytest.raises(EmptyQuery):
            replay_client(tmp_path).search("   ", 10)

    def test_limit_bounds(self, tmp_path):
        with pytest.raises(ValueError):
            replay_client(tmp_path).search("q", 0)
        with pytest.raises(ValueError):
            replay_client(tmp_path).search("q", 101)

    def test_rate_limited_propagates_retry_after(self, tmp_path):
        write_http_cassette(
            tmp_path,
            "GET",
            S2_SEARCH_URL,
            params={"query": "q", "limit": 4, "fields": ",".join(DEFAULT_FIELDS)},
            status=429,
            response_body={"message": "slow down"},
            response_headers={"Retry-After": "7"},
        )
        with pytest.raises(RateLimited) as err:
            replay_client(tmp_path).search("q", 4)
        assert err.value.retry_after == 7.0

    def test_5xx_maps_to_upstream_error(self, tmp_path):
        write_http_cassette(
            tmp_path,
            "GET",
            S2_SEARCH_URL,
            params={"query": "q", "limit": 4, "fields": ",".join(DEFAULT_FIELDS)},
            status=503,
            response_body={},
        )
        with pytest.raises(UpstreamError):
            replay_client(tmp_path).search("q", 4)

    def test_unparseable_body_maps_to_decode_error(self, tmp_path):
        write_http_cassette(
            tmp_path,
            "GET",
            S2_SEARCH_URL,
            params={"query": "q", "limit": 4, "fields": ",".join(DEFAULT_FIELDS)},
            response_body="<html>not json</html>",
        )
        with pytest.raises(DecodeError):
            replay_client(tmp_path).search("q", 4)

    def test_malformed_records_dropped_and_counted(self, tmp_path):
        data = [
            s2_paper(0),
            s2_paper(1, title="   "),  # empty title
            s2_paper(2, citationCount=-3),  # invariant violation
            s2_paper(3, paperId="id-0"),  # duplicate source id
            s2_paper(4),
        ]
        self.search_cassette(tmp_path, data, query="messy", limit=5)
        batch = replay_client(tmp_path).search("messy", 5)
        assert [r.source_id for r in batch.records] == ["id-0", "id-4"]
        assert batch.dropped == 3
        # positions are dense over the kept records
        assert [r.source_position for r in batch.records] == [0, 1]

    def test_replay_is_deterministic(self, tmp_path):
        self.search_cassette(tmp_path, [s2_paper(i) for i in range(3)], query="stable", limit=3)
        runs = []
        for _ in range(2):
            batch = replay_client(tmp_path).search("stable", 3)
            runs.append(json.dumps([r.to_dict() for r in batch.records], sort_keys=True))
        assert runs[0] == runs[1]


class TestS2Recommendations:
    REC_URL = "https://api.semanticscholar.org/recommendations/v1/papers/"

    def rec_cassette(self, tmp_path, papers, seed_id="ArXiv:1234.56789", limit=3):
        write_http_cassette(
            tmp_path,
            "POST",
            self.REC_URL,
            params={"fields": ",".join(DEFAULT_FIELDS), "limit": limit},
            json_body={"positivePaperIds": [seed_id]},
            response_body={"recommendedPapers": papers},
        )

    def test_maps_recommended_papers(self, tmp_path):
        self.rec_cassette(tmp_path, [s2_paper(i) for i in range(3)])
        batch = replay_client(tmp_path).recommend_from_seed("1234.56789", 3)
        assert len(batch.records) == 3

    def test_invalid_seed(self, tmp_path):
        with pytest.raises(InvalidSeed):
            replay_client(tmp_path).recommend_from_seed("not an id", 3)

    def test_seed_echo_excluded(self, tmp_path):
        echoed = s2_paper(9, externalIds={"ArXiv": "1234.56789"})
        self.rec_cassette(tmp_path, [echoed, s2_paper(1)])
        batch = replay_client(tmp_path).recommend_from_seed("1234.56789", 3)
        assert [r.source_id for r in batch.records] == ["id-1"]

    def test_forty_hex_paper_id_is_valid_seed(self, tmp_path):
        seed = "a" * 40
        self.rec_cassette(tmp_path, [s2_paper(1)], seed_id=seed)
        batch = replay_client(tmp_path).recommend_from_seed(seed, 3)
        assert len(batch.records) == 1


class TestFetchPaperByUrl:
    LOOKUP = "https://api.semanticscholar.org/graph/v1/paper/URL:{url}"

    def test_fetches_single_record(self, tmp_path):
        paper_url = "https://arxiv.org/abs/2106.15928"
        write_http_cassette(
            tmp_path,
            "GET",
            self.LOOKUP.format(url=paper_url),
            params={"fields": ",".join(DEFAULT_FIELDS)},
            response_body=s2_paper(0, title="The Exact Paper"),
        )
        record = replay_client(tmp_path).fetch_paper_by_url(paper_url)
        assert record.title == "The Exact Paper"

    def test_unknown_url_maps_to_not_found(self, tmp_path):
        paper_url = "https://example.test/missing"
        write_http_cassette(
            tmp_path,
            "GET",
            self.LOOKUP.format(url=paper_url),
            params={"fields": ",".join(DEFAULT_FIELDS)},
            status=404,
            response_body={"error": "unknown"},
        )
        with pytest.raises(NotFound):
            replay_client(tmp_path).fetch_paper_by_url(paper_url)

    def test_relative_url_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            replay_client(tmp_path).fetch_paper_by_url("foo/bar")


class TestOpenAlex:
    WORKS_URL = "https://api.openalex.org/works"

    def work(self, i: int, **over) -> dict:
        item = {
            "id": f"https://openalex.org/W{i}",
            "display_name": f"Open paper {i}",
            "publication_year": 2019 + i,
            "cited_by_count": i * 5,
            "doi": f"https://doi.org/10.2/{i}",
            "abstract_inverted_index": {"deep": [0], "learning": [1]},
            "authorships": [{"author": {"display_name": f"Person {i}"}}],
            "primary_location": {"landing_page_url": f"https://example.test/w{i}"},
        }
        item.update(over)
        return item

    def replay_openalex(self, tmp_path, **kwargs) -> OpenAlexClient:
        return OpenAlexClient(transport=ReplayTransport(tmp_path), sleep=NO_SLEEP, **kwargs)

    def test_parses_five_records(self, tmp_path):
        write_http_cassette(
            tmp_path,
            "GET",
            self.WORKS_URL,
            params={"search": "q", "per-page": 5},
            response_body={"meta": {"count": 55}, "results": [self.work(i) for i in range(5)]},
        )
        batch = self.replay_openalex(tmp_path).search("q", 5)
        assert len(batch.records) == 5
        assert all(r.source is Source.OPENALEX for r in batch.records)
        assert batch.total == 55
        assert batch.records[0].source_id == "W0"
        assert batch.records[1].external_ids["doi"] == "10.2/1"

    def test_abstract_reconstructed_from_inverted_index(self, tmp_path):
        assert invert_abstract({"deep": [0], "learning": [1]}) == "deep learning"
        assert invert_abstract({"b": [1, 3], "a": [0, 2]}) == "a b a b"
        assert invert_abstract(None) is None

    def test_missing_cited_by_count_keeps_record(self, tmp_path):
        write_http_cassette(
            tmp_path,
            "GET",
            self.WORKS_URL,
            params={"search": "q", "per-page": 1},
            response_body={"results": [self.work(0, cited_by_count=None)]},
        )
        batch = self.replay_openalex(tmp_path).search("q", 1)
        assert batch.records[0].citation_count is None
        assert batch.records[0].title == "Open paper 0"

    def test_mailto_param_sent_when_configured(self):
        def responder(record):
            return 200, {}, {"results": []}

        with StubServer(responder) as stub:
            client = OpenAlexClient(
                ApiCredentials(contact_email="ops@example.test"),
                base_url=stub.base_url,
                sleep=NO_SLEEP,
            )
            client.search("q", 2)
            assert stub.requests[0]["query"]["mailto"] == "ops@example.test"


class TestRequestShapeContract:
    """Wire-format assertions against a local stub server: exact paths,
    parameter names, body keys, and the API-key header."""

    def test_search_request_shape(self):
        def responder(record):
            return 200, {}, {"total": 0, "data": []}

        with StubServer(responder) as stub:
            client = SemanticScholarClient(
                ApiCredentials(s2_api_key="sk-test"), base_url=stub.base_url, sleep=NO_SLEEP
            )
            client.search("graph neural networks", 7, fields=("title", "abstract"))
            sent = stub.requests[0]
            assert sent["method"] == "GET"
            assert sent["path"] == "/graph/v1/paper/search"
            assert sent["query"] == {
                "query": "graph neural networks",
                "limit": "7",
                "fields": "title,abstract",
            }
            assert sent["headers"]["X-API-KEY"] == "sk-test"

    def test_recommendations_request_shape(self):
        def responder(record):
            return 200, {}, {"recommendedPapers": []}

        with StubServer(responder) as stub:
            client = SemanticScholarClient(
                ApiCredentials(s2_api_key="sk-test"), base_url=stub.base_url, sleep=NO_SLEEP
            )
            client.recommend_from_seed("1234.56789", 5)
            sent = stub.requests[0]
            assert sent["method"] == "POST"
            assert sent["path"] == "/recommendations/v1/papers/"
            assert sent["body"] == {"positivePaperIds": ["ArXiv:1234.56789"]}
            assert sent["query"]["limit"] == "5"
            assert sent["query"]["fields"] == ",".join(DEFAULT_FIELDS)
            assert sent["headers"]["X-API-KEY"] == "sk-test"

    def test_paper_by_url_path_embeds_raw_url(self):
        def responder(record):
            return 200, {}, s2_paper(0)

        with StubServer(responder) as stub:
            client = SemanticScholarClient(base_url=stub.base_url, sleep=NO_SLEEP)
            client.fetch_paper_by_url("https://arxiv.org/abs/2106.15928")
            sent = stub.requests[0]
            assert sent["path"] == "/graph/v1/paper/URL:https://arxiv.org/abs/2106.15928"
            assert "X-API-KEY" not in sent["headers"]  # no key configured

    def test_no_api_key_header_without_credentials(self):
        with StubServer(lambda r: (200, {}, {"total": 0, "data": []})) as stub:
            client = SemanticScholarClient(base_url=stub.base_url, sleep=NO_SLEEP)
            client.search("q", 1)
            assert "X-API-KEY" not in stub.requests[0]["headers"]


class TestRetryPolicy:
    def test_retries_429_then_succeeds(self):
        state = {"count": 0}

        def responder(record):
            state["count"] += 1
            if state["count"] < 3:
                return 429, {"Retry-After": "0"}, {}
            return 200, {}, {"total": 0, "data": []}

        sleeps: list[float] = []
        with StubServer(responder) as stub:
            client = SemanticScholarClient(
                base_url=stub.base_url,
                sleep=sleeps.append,
                retry_policy=RetryPolicy(backoff_base=0.01, max_jitter=0.001),
            )
            batch = client.search("q", 1)
            assert batch.records == []
        assert state["count"] == 3
        assert len(sleeps) == 2

    def test_gives_up_after_max_retries(self):
        state = {"count": 0}

        def responder(record):
            state["count"] += 1
            return 429, {"Retry-After": "0"}, {}

        with StubServer(responder) as stub:
            client = SemanticScholarClient(
                base_url=stub.base_url,
                sleep=NO_SLEEP,
                retry_policy=RetryPolicy(max_retries=3, backoff_base=0.0, max_jitter=0.0),
            )
            with pytest.raises(RateLimited):
                client.search("q", 1)
        assert state["count"] == 4  # initial attempt + 3 retries

    def test_backoff_delays_monotone_and_honor_retry_after(self):
        state = {"count": 0}

        def responder(record):
            state["count"] += 1
            return 503, {"Retry-After": "0.05"}, {}

        sleeps: list[float] = []
        with StubServer(responder) as stub:
            client = SemanticScholarClient(
                base_url=stub.base_url,
                sleep=sleeps.append,
                retry_policy=RetryPolicy(backoff_base=0.01, backoff_factor=2.0, max_jitter=0.002),
            )
            with pytest.raises(UpstreamError):
                client.search("q", 1)
        assert sleeps == sorted(sleeps)
        assert all(delay >= 0.05 for delay in sleeps)  # Retry-After floor


class TestRateLimiter:
    def test_spacing_enforced_with_fake_clock(self):
        now = {"t": 0.0}
        waits: list[float] = []

        def clock():
            return now["t"]

        def sleep(duration):
            waits.append(duration)
            now["t"] += duration

        limiter = RateLimiter(min_interval=1.0, clock=clock, sleep=sleep)
        limiter.acquire()  # first call free
        limiter.acquire()
        limiter.acquire()
        assert waits == [1.0, 1.0]

    def test_zero_interval_never_waits(self):
        limiter = RateLimiter(min_interval=0.0, sleep=lambda s: (_ for _ in ()).throw(AssertionError))
        limiter.acquire()


class TestCredentials:
    def test_empty_user_agent_rejected(self):
        with pytest.raises(ValueError):
            ApiCredentials(user_agent="   ")
