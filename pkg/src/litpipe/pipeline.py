"""End-to-end orchestration: retrieve, dedup, sort, rerank, generate.

A run produces a PipelineSession: the candidate set, the LLM ranking,
every generated draft, and the full audit of LLM exchanges. Sessions
are persisted as single self-describing JSON documents with a checksum,
one file per session.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
import time
import uuid
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

from .corpus import PaperRecord, SortKey, merge_and_dedup, sort_papers, truncate_candidates
from .errors import (
    CorruptSession,
    LitPipeError,
    NoCandidatesFound,
    NotFound,
    PlanContextMismatch,
    StageError,
)
from .generate import GenerationContext, ReviewDraft, generate_with_plan, generate_zero_shot
from .llm import LlmExchange, LlmGateway
from .plan import SentencePlan
from .query import QuerySpec, merge_user_keywords, summarize_abstract_to_query
from .rerank import RankedList, RankMethod, rerank_by_debate, rerank_by_permutation, source_order
from .scholarly import OpenAlexClient, SearchBatch, SemanticScholarClient, Source

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


@dataclass
class PipelineConfig:
    sources: tuple[Source, ...] = (Source.S2, Source.OPENALEX)
    per_source_limit: int = 20
    top_k: int = 10
    rerank_method: RankMethod = RankMethod.PERMUTATION
    sort_key: SortKey = SortKey.RELEVANCE
    abstract_char_cap: int = 1200
    max_query_words: int = 12
    max_rerank: int = 10
    strict_plan_mode: bool = False
    generation_uses_ranked: bool = True
    query_model: str = "gpt-4"
    rerank_model: str = "gpt-4"
    generate_model: str = "gpt-4"
    query_temperature: float = 0.0
    rerank_temperature: float = 0.0
    generate_temperature: float = 0.7
    query_max_tokens: int = 64
    rerank_max_tokens: int = 256
    generate_max_tokens: int = 1024
    debate_max_in_flight: int = 4
    cache_ttl_seconds: float = 86_400.0

    def validate(self) -> None:
        if not self.sources:
            raise ValueError("configure at least one source")
        if self.top_k > self.per_source_limit * len(self.sources):
            raise ValueError("top_k cannot exceed what the sources can return")
        for name in ("per_source_limit", "top_k", "abstract_char_cap", "max_query_words", "max_rerank"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")

    def with_overrides(self, overrides: dict[str, Any]) -> "PipelineConfig":
        known = {f for f in self.__dataclass_fields__}
        unknown = set(overrides) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        parsed = dict(overrides)
        if "sources" in parsed:
            parsed["sources"] = tuple(Source(s) for s in parsed["sources"])
        if "rerank_method" in parsed:
            parsed["rerank_method"] = RankMethod(parsed["rerank_method"])
        if "sort_key" in parsed:
            parsed["sort_key"] = SortKey(parsed["sort_key"])
        config = replace(self, **parsed)
        config.validate()
        return config

    def to_dict(self) -> dict:
        data = {f: getattr(self, f) for f in self.__dataclass_fields__}
        data["sources"] = [s.value for s in self.sources]
        data["rerank_method"] = self.rerank_method.value
        data["sort_key"] = self.sort_key.value
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        return cls().with_overrides(dict(data))


@dataclass
class PipelineSession:
    session_id: str
    created_at: str
    query_spec: QuerySpec
    config: PipelineConfig
    search_query: str | None = None
    candidates: list[PaperRecord] = field(default_factory=list)
    ranked: RankedList | None = None
    view_order: list[int] = field(default_factory=list)
    view_sort: str = SortKey.RELEVANCE.value
    drafts: list[ReviewDraft] = field(default_factory=list)
    audit: list[LlmExchange] = field(default_factory=list)
    stage_errors: list[dict] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    _KNOWN_KEYS = (
        "session_id",
        "created_at",
        "query_spec",
        "config",
        "search_query",
        "candidates",
        "ranked",
        "view_order",
        "view_sort",
        "drafts",
        "audit",
        "stage_errors",
        "warnings",
    )

    def ranked_papers(self) -> list[PaperRecord]:
        if self.ranked is None:
            return list(self.candidates)
        return [self.candidates[i - 1] for i in self.ranked.order]

    def to_dict(self) -> dict:
        data = {
            "session_id": self.session_id,
            "created_at": self.created_at,
            "query_spec": self.query_spec.to_dict(),
            "config": self.config.to_dict(),
            "search_query": self.search_query,
            "candidates": [p.to_dict() for p in self.candidates],
            "ranked": self.ranked.to_dict() if self.ranked else None,
            "view_order": list(self.view_order),
            "view_sort": self.view_sort,
            "drafts": [d.to_dict() for d in self.drafts],
            "audit": [x.to_dict() for x in self.audit],
            "stage_errors": list(self.stage_errors),
            "warnings": list(self.warnings),
        }
        # Unknown fields from newer writers ride along untouched.
        for key, value in self.extra.items():
            data.setdefault(key, value)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineSession":
        extra = {k: v for k, v in data.items() if k not in cls._KNOWN_KEYS}
        return cls(
            session_id=data["session_id"],
            created_at=data["created_at"],
            query_spec=QuerySpec.from_dict(data["query_spec"]),
            config=PipelineConfig.from_dict(data["config"]),
            search_query=data.get("search_query"),
            candidates=[PaperRecord.from_dict(p) for p in data.get("candidates") or []],
            ranked=RankedList.from_dict(data["ranked"]) if data.get("ranked") else None,
            view_order=list(data.get("view_order") or []),
            view_sort=data.get("view_sort", SortKey.RELEVANCE.value),
            drafts=[ReviewDraft.from_dict(d) for d in data.get("drafts") or []],
            audit=[LlmExchange.from_dict(x) for x in data.get("audit") or []],
            stage_errors=list(data.get("stage_errors") or []),
            warnings=list(data.get("warnings") or []),
            extra=extra,
        )


def _checksum(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def session_document(session: PipelineSession) -> dict:
    payload = session.to_dict()
    return {
        "schema_version": SCHEMA_VERSION,
        "checksum": _checksum(payload),
        "session": payload,
    }


def session_from_document(doc: dict) -> PipelineSession:
    if not isinstance(doc, dict) or "session" not in doc or "checksum" not in doc:
        raise CorruptSession("session document is missing its envelope")
    payload = doc["session"]
    if _checksum(payload) != doc["checksum"]:
        raise CorruptSession("session checksum mismatch")
    return PipelineSession.from_dict(payload)


class SessionStore:
    """One JSON document per session inside a directory."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)

    def path_for(self, session_id: str) -> Path:
        return self.directory / f"{session_id}.json"

    def save(self, session: PipelineSession) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.path_for(session.session_id)
        write_session_file(session, path)
        return path

    def load(self, session_id: str) -> PipelineSession:
        path = self.path_for(session_id)
        if not path.is_file():
            raise NotFound(f"no session {session_id!r} in {self.directory}")
        return read_session_file(path)


def write_session_file(session: PipelineSession, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(session_document(session), indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def read_session_file(path: str | Path) -> PipelineSession:
    path = Path(path)
    if not path.is_file():
        raise NotFound(f"no session file at {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise CorruptSession(f"cannot decode session file {path}: {exc}") from exc
    return session_from_document(doc)


class Pipeline:
    """Wires the clients, gateway, and session store together."""

    def __init__(
        self,
        gateway: LlmGateway,
        s2_client: SemanticScholarClient,
        openalex_client: OpenAlexClient,
        session_store: SessionStore,
        config: PipelineConfig | None = None,
        clock=time.time,
    ):
        self.gateway = gateway
        self.s2 = s2_client
        self.openalex = openalex_client
        self.store = session_store
        self.config = config or PipelineConfig()
        self._clock = clock
        self._cache: dict[tuple, tuple[float, SearchBatch]] = {}
        self._cache_lock = threading.Lock()
        self._run_lock = threading.Lock()

    # -- retrieval ---------------------------------------------------------

    def _search_cached(self, source: Source, query: str, limit: int, ttl: float) -> SearchBatch:
        key = (source, query, limit)
        with self._cache_lock:
            hit = self._cache.get(key)
            if hit is not None and self._clock() - hit[0] < ttl:
                return hit[1]
        if source is Source.S2:
            batch = self.s2.search(query, limit)
        else:
            batch = self.openalex.search(query, limit)
        with self._cache_lock:
            self._cache[key] = (self._clock(), batch)
        return batch

    def _retrieve(
        self, spec: QuerySpec, query: str | None, config: PipelineConfig
    ) -> tuple[list[list], list[dict]]:
        batches: list[list] = []
        stage_errors: list[dict] = []
        failures: list[LitPipeError] = []
        attempts = 0
        if query:
            for src in config.sources:
                attempts += 1
                try:
                    batch = self._search_cached(src, query, config.per_source_limit, config.cache_ttl_seconds)
                    batches.append(batch.records)
                except LitPipeError as exc:
                    failures.append(exc)
                    logger.warning("search via %s failed: %s", src.value, exc)
                    stage_errors.append(
                        {"stage": f"search:{src.value}", "code": type(exc).__name__, "message": str(exc)}
                    )
        for seed in spec.seed_ids:
            attempts += 1
            try:
                batch = self.s2.recommend_from_seed(seed, config.per_source_limit)
                batches.append(batch.records)
            except LitPipeError as exc:
                failures.append(exc)
                logger.warning("seed recommendations for %s failed: %s", seed, exc)
                stage_errors.append(
                    {"stage": "recommend", "code": type(exc).__name__, "message": str(exc)}
                )
        if attempts and len(failures) == attempts:
            raise StageError("retrieval", failures[0])
        return batches, stage_errors

    # -- ranking and generation --------------------------------------------

    def _rank(self, abstract: str, candidates: list[PaperRecord], config: PipelineConfig) -> RankedList:
        n = len(candidates)
        if not abstract.strip() or config.rerank_method is RankMethod.SOURCE_ORDER or n == 1:
            return source_order(n)
        if config.rerank_method is RankMethod.DEBATE:
            ranked, _ = rerank_by_debate(
                self.gateway,
                abstract,
                candidates,
                model_name=config.rerank_model,
                temperature=config.rerank_temperature,
                max_output_tokens=config.rerank_max_tokens,
                abstract_char_cap=config.abstract_char_cap,
                max_in_flight=config.debate_max_in_flight,
            )
            return ranked
        return rerank_by_permutation(
            self.gateway,
            abstract,
            candidates,
            model_name=config.rerank_model,
            temperature=config.rerank_temperature,
            max_output_tokens=config.rerank_max_tokens,
            max_rerank=config.max_rerank,
            abstract_char_cap=config.abstract_char_cap,
        )

    def _generate(
        self, session: PipelineSession, plan: SentencePlan | None, config: PipelineConfig
    ) -> ReviewDraft:
        papers = session.ranked_papers() if config.generation_uses_ranked else list(session.candidates)
        ctx = GenerationContext(abstract_text=session.query_spec.abstract_text, papers=papers)
        if plan is not None:
            return generate_with_plan(
                self.gateway,
                ctx,
                plan,
                model_name=config.generate_model,
                temperature=config.generate_temperature,
                max_output_tokens=config.generate_max_tokens,
                abstract_char_cap=config.abstract_char_cap,
                strict=config.strict_plan_mode,
            )
        return generate_zero_shot(
            self.gateway,
            ctx,
            model_name=config.generate_model,
            temperature=config.generate_temperature,
            max_output_tokens=config.generate_max_tokens,
            abstract_char_cap=config.abstract_char_cap,
        )

    # -- public operations ---------------------------------------------------

    def run(
        self,
        spec: QuerySpec,
        config: PipelineConfig | None = None,
        plan: SentencePlan | None = None,
    ) -> PipelineSession:
        config = config or self.config
        config.validate()
        spec.validate()
        spec = QuerySpec.from_dict(spec.to_dict())  # never mutate the caller's spec
        with self._run_lock:
            mark = self.gateway.audit_mark()

            query: str | None = None
            if spec.abstract_text.strip():
                try:
                    synthesized = summarize_abstract_to_query(
                        self.gateway,
                        spec.abstract_text,
                        model_name=config.query_model,
                        max_words=config.max_query_words,
                        temperature=config.query_temperature,
                        max_output_tokens=config.query_max_tokens,
                    )
                except LitPipeError as exc:
                    raise StageError("query_synthesis", exc) from exc
                spec.synthesized_query = synthesized or None
                query = merge_user_keywords(synthesized, spec.user_keywords)
            elif spec.user_keywords:
                query = merge_user_keywords("", spec.user_keywords)

            batches, stage_errors = self._retrieve(spec, query, config)
            papers = merge_and_dedup(batches)
            if not papers:
                raise NoCandidatesFound("every source returned zero records")
            papers = sort_papers(papers, SortKey.RELEVANCE)
            candidates = truncate_candidates(papers, config.top_k)

            try:
                ranked = self._rank(spec.abstract_text, candidates, config)
            except LitPipeError as exc:
                raise StageError("rerank", exc) from exc

            session = PipelineSession(
                session_id=uuid.uuid4().hex[:12],
                created_at=datetime.now(timezone.utc).isoformat(),
                query_spec=spec,
                config=config,
                search_query=query,
                candidates=candidates,
                ranked=ranked,
                view_order=list(range(1, len(candidates) + 1)),
                stage_errors=stage_errors,
            )
            try:
                draft = self._generate(session, plan, config)
            except PlanContextMismatch:
                raise
            except LitPipeError as exc:
                raise StageError("generation", exc) from exc
            session.drafts.append(draft)
            session.audit = self.gateway.audit_since(mark)
            self.store.save(session)
        return session

    def regenerate_session(
        self,
        session: PipelineSession,
        plan: SentencePlan | None = None,
        sort: SortKey | None = None,
    ) -> PipelineSession:
        """Append a draft and/or re-sort the candidate view, in place.

        A sort-only call updates the stored view without touching the
        LLM; the ranked order used for generation never changes.
        """
        config = session.config
        mark = self.gateway.audit_mark()
        if sort is not None:
            position = {p.canonical_id: i for i, p in enumerate(session.candidates, start=1)}
            view = sort_papers(session.candidates, sort)
            session.view_order = [position[p.canonical_id] for p in view]
            session.view_sort = sort.value
        if plan is not None or sort is None:
            try:
                draft = self._generate(session, plan, config)
            except (StageError, PlanContextMismatch):
                raise
            except LitPipeError as exc:
                raise StageError("generation", exc) from exc
            session.drafts.append(draft)
        session.audit.extend(self.gateway.audit_since(mark))
        return session

    def regenerate(
        self,
        session_id: str,
        plan: SentencePlan | None = None,
        sort: SortKey | None = None,
    ) -> PipelineSession:
        session = self.store.load(session_id)
        with self._run_lock:
            session = self.regenerate_session(session, plan=plan, sort=sort)
            self.store.save(session)
        return session
