"""litpipe: retrieve, re-rank, and draft related-work sections.

The pipeline summarizes a user abstract into a search query, retrieves
candidates from Semantic Scholar and OpenAlex, deduplicates and
re-ranks them with an LLM, and generates a citable related-work draft,
optionally steered by a sentence plan. Every external exchange can be
recorded to and replayed from cassettes for deterministic offline runs.
"""

__version__ = "0.1.0"

from .corpus import PaperRecord, SortKey, merge_and_dedup, normalize_title, sort_papers
from .generate import GenerationContext, ReviewDraft, generate_with_plan, generate_zero_shot
from .llm import LlmExchange, LlmGateway, LlmRequest
from .pipeline import Pipeline, PipelineConfig, PipelineSession, SessionStore
from .plan import SentencePlan, parse_plan, render_plan, split_sentences, validate_compliance
from .query import QuerySpec, merge_user_keywords, summarize_abstract_to_query
from .rerank import RankedList, RankMethod, aggregate_debate, parse_permutation
from .scholarly import (
    ApiCredentials,
    OpenAlexClient,
    SemanticScholarClient,
    Source,
    SourceRecord,
)

__all__ = [
    "ApiCredentials",
    "GenerationContext",
    "LlmExchange",
    "LlmGateway",
    "LlmRequest",
    "OpenAlexClient",
    "PaperRecord",
    "Pipeline",
    "PipelineConfig",
    "PipelineSession",
    "QuerySpec",
    "RankMethod",
    "RankedList",
    "ReviewDraft",
    "SemanticScholarClient",
    "SentencePlan",
    "SessionStore",
    "SortKey",
    "Source",
    "SourceRecord",
    "aggregate_debate",
    "generate_with_plan",
    "generate_zero_shot",
    "merge_and_dedup",
    "merge_user_keywords",
    "normalize_title",
    "parse_permutation",
    "parse_plan",
    "render_plan",
    "sort_papers",
    "split_sentences",
    "summarize_abstract_to_query",
    "validate_compliance",
]
