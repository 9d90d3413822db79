"""Query synthesis: turn an abstract into a search-engine keyword query."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

from .errors import EmptyAbstract
from .llm import LlmGateway, LlmRequest
from .templates import SUMMARIZE_V1, render_prompt

DEFAULT_MAX_QUERY_WORDS = 12

_PREFIX_RE = re.compile(r"^(query|keywords)\s*[:\-]\s*", re.IGNORECASE)


@dataclass
class QuerySpec:
    """What the user gave us to search with."""

    abstract_text: str = ""
    user_keywords: list[str] = field(default_factory=list)
    seed_ids: list[str] = field(default_factory=list)
    synthesized_query: str | None = None

    def validate(self) -> None:
        if not (self.abstract_text.strip() or any(k.strip() for k in self.user_keywords) or self.seed_ids):
            raise ValueError("provide an abstract, keywords, or a seed paper id")

    def to_dict(self) -> dict:
        return {
            "abstract_text": self.abstract_text,
            "user_keywords": list(self.user_keywords),
            "seed_ids": list(self.seed_ids),
            "synthesized_query": self.synthesized_query,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "QuerySpec":
        return cls(
            abstract_text=data.get("abstract_text", ""),
            user_keywords=list(data.get("user_keywords") or []),
            seed_ids=list(data.get("seed_ids") or []),
            synthesized_query=data.get("synthesized_query"),
        )


def clean_llm_query(raw: str, max_words: int = DEFAULT_MAX_QUERY_WORDS) -> str:
    """Normalize free-form LLM output into an API-safe one-line query.

    Strips literal "Query:"/"Keywords:" prefixes and surrounding quotes,
    collapses the text onto one line, and caps the word count.
    """
    text = " ".join(raw.split())
    text = _PREFIX_RE.sub("", text).strip()
    while len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        text = text[1:-1].strip()
    text = text.strip("\"'").strip()
    words = text.split()
    return " ".join(words[:max_words])


def summarize_abstract_to_query(
    gateway: LlmGateway,
    abstract: str,
    *,
    model_name: str,
    max_words: int = DEFAULT_MAX_QUERY_WORDS,
    temperature: float = 0.0,
    max_output_tokens: int = 64,
) -> str:
    """Ask the LLM to compress the abstract into a keyword query."""
    if not abstract.strip():
        raise EmptyAbstract("cannot summarize an empty abstract")
    prompt = render_prompt(SUMMARIZE_V1, {"abstract": abstract, "max_words": str(max_words)})
    request = LlmRequest(
        model_name=model_name,
        user_text=prompt,
        temperature=temperature,
        max_output_tokens=max_output_tokens,
        template_id=SUMMARIZE_V1.template_id,
        template_version=SUMMARIZE_V1.version,
    )
    exchange = gateway.complete(request)
    return clean_llm_query(exchange.response_text, max_words)


def merge_user_keywords(query: str, keywords: Sequence[str]) -> str:
    """Append keywords the query does not already contain (case-insensitive)."""
    merged = query.strip()
    for keyword in keywords:
        keyword = keyword.strip()
        if not keyword:
            continue
        if keyword.lower() in merged.lower():
            continue
        merged = f"{merged} {keyword}" if merged else keyword
    return merged
