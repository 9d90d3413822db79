"""Listwise re-ranking of retrieved candidates.

Two methods: a single-call permutation generation over the whole list,
and a per-candidate debate that argues for and against inclusion and
ends with an inclusion probability. Malformed permutation output is
repaired deterministically instead of re-prompting:

    drop_out_of_range  - markers outside 1..n are ignored
    drop_duplicates    - repeat markers keep only their first occurrence
    append_missing     - absent indices are appended in original order
"""

from __future__ import annotations

import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .corpus import PaperRecord
from .errors import (
    EmptyAbstract,
    IncompleteVerdictSet,
    TooManyCandidates,
    Unparseable,
)
from .llm import LlmGateway, LlmRequest
from .templates import DEBATE_V1, RERANK_PERMUTATION_V1, render_prompt

logger = logging.getLogger(__name__)

DEFAULT_MAX_RERANK = 10
DEFAULT_ABSTRACT_CHAR_CAP = 1200

REPAIR_DROP_OUT_OF_RANGE = "drop_out_of_range"
REPAIR_DROP_DUPLICATES = "drop_duplicates"
REPAIR_APPEND_MISSING = "append_missing"
REPAIR_FALLBACK_SOURCE_ORDER = "fallback_source_order"
REPAIR_CLAMPED_PROBABILITY = "clamped_probability"

MARKER_RE = re.compile(r"\[(\d+)\]")
_PROBABILITY_RE = re.compile(r"PROBABILITY\s*:\s*([0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?)", re.IGNORECASE)


class RankMethod(str, Enum):
    PERMUTATION = "permutation"
    DEBATE = "debate"
    SOURCE_ORDER = "source_order"


@dataclass
class RankedList:
    """A permutation over 1..n plus how it was produced."""

    order: list[int]
    n: int
    method: RankMethod
    repairs_applied: list[str] = field(default_factory=list)

    def __post_init__(self):
        if sorted(self.order) != list(range(1, self.n + 1)):
            raise ValueError(f"order {self.order} is not a permutation of 1..{self.n}")

    def to_dict(self) -> dict:
        return {
            "order": list(self.order),
            "n": self.n,
            "method": self.method.value,
            "repairs_applied": list(self.repairs_applied),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RankedList":
        return cls(
            order=list(data["order"]),
            n=data["n"],
            method=RankMethod(data["method"]),
            repairs_applied=list(data.get("repairs_applied") or []),
        )


def source_order(n: int, repairs: Sequence[str] = ()) -> RankedList:
    return RankedList(list(range(1, n + 1)), n, RankMethod.SOURCE_ORDER, list(repairs))


@dataclass
class DebateVerdict:
    candidate_index: int
    arguments_for: list[str]
    arguments_against: list[str]
    include_probability: float
    repairs_applied: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not 0.0 <= self.include_probability <= 1.0:
            raise ValueError("include_probability must be in [0, 1]")
        if self.candidate_index < 1:
            raise ValueError("candidate_index is 1-based")


def build_permutation_prompt(
    abstract: str,
    candidates: Sequence[PaperRecord],
    *,
    max_rerank: int = DEFAULT_MAX_RERANK,
    abstract_char_cap: int = DEFAULT_ABSTRACT_CHAR_CAP,
) -> str:
    """Enumerate candidates as "[i] title - abstract" and ask for a ranking."""
    if not abstract.strip():
        raise EmptyAbstract("reranking needs the user abstract")
    if not candidates:
        raise ValueError("no candidates to rank")
    if len(candidates) > max_rerank:
        raise TooManyCandidates(f"{len(candidates)} candidates exceed the cap of {max_rerank}")
    lines = []
    for i, paper in enumerate(candidates, start=1):
        entry = f"[{i}] {paper.title}"
        snippet = (paper.abstract or "").strip()[:abstract_char_cap]
        if snippet:
            entry += f" - {snippet}"
        lines.append(entry)
    return render_prompt(
        RERANK_PERMUTATION_V1, {"candidates": "\n".join(lines), "abstract": abstract}
    )


def parse_permutation(text: str, n: int) -> RankedList:
    """Extract "[k]" markers in order of appearance and repair the result
    into a valid permutation of 1..n. Raises Unparseable when no marker
    within range exists anywhere in the text."""
    if n < 1:
        raise ValueError("n must be >= 1")
    markers = [int(m) for m in MARKER_RE.findall(text)]
    in_range = [k for k in markers if 1 <= k <= n]
    if not in_range:
        raise Unparseable(f"no usable ranking marker in {text[:120]!r}")
    repairs = []
    if len(in_range) != len(markers):
        repairs.append(REPAIR_DROP_OUT_OF_RANGE)
    order: list[int] = []
    seen: set[int] = set()
    had_duplicates = False
    for k in in_range:
        if k in seen:
            had_duplicates = True
            continue
        seen.add(k)
        order.append(k)
    if had_duplicates:
        repairs.append(REPAIR_DROP_DUPLICATES)
    if len(order) < n:
        repairs.append(REPAIR_APPEND_MISSING)
        order.extend(k for k in range(1, n + 1) if k not in seen)
    return RankedList(order, n, RankMethod.PERMUTATION, repairs)


def rerank_by_permutation(
    gateway: LlmGateway,
    abstract: str,
    candidates: Sequence[PaperRecord],
    *,
    model_name: str,
    temperature: float = 0.0,
    max_output_tokens: int = 256,
    max_rerank: int = DEFAULT_MAX_RERANK,
    abstract_char_cap: int = DEFAULT_ABSTRACT_CHAR_CAP,
    retry_unparseable: bool = False,
) -> RankedList:
    """Build the prompt, ask once, parse; unusable output falls back to
    source order (optionally after a single retry)."""
    prompt = build_permutation_prompt(
        abstract, candidates, max_rerank=max_rerank, abstract_char_cap=abstract_char_cap
    )
    request = LlmRequest(
        model_name=model_name,
        user_text=prompt,
        temperature=temperature,
        max_output_tokens=max_output_tokens,
        template_id=RERANK_PERMUTATION_V1.template_id,
        template_version=RERANK_PERMUTATION_V1.version,
    )
    attempts = 2 if retry_unparseable else 1
    for attempt in range(attempts):
        exchange = gateway.complete(request)
        try:
            return parse_permutation(exchange.response_text, len(candidates))
        except Unparseable:
            logger.warning(
                "unparseable ranking output (attempt %d/%d)", attempt + 1, attempts
            )
    return source_order(len(candidates), repairs=[REPAIR_FALLBACK_SOURCE_ORDER])


def _candidate_blurb(paper: PaperRecord, abstract_char_cap: int) -> str:
    snippet = (paper.abstract or "").strip()[:abstract_char_cap]
    return f"{paper.title}. {snippet}" if snippet else paper.title


def _collect_labeled_arguments(text: str) -> tuple[list[str], list[str]]:
    section = None
    arguments_for: list[str] = []
    arguments_against: list[str] = []
    for line in text.splitlines():
        stripped = line.strip()
        upper = stripped.upper()
        if upper.startswith("FOR:"):
            section = arguments_for
            stripped = stripped[4:].strip()
        elif upper.startswith("AGAINST:"):
            section = arguments_against
            stripped = stripped[8:].strip()
        elif upper.startswith("PROBABILITY"):
            section = None
            continue
        if section is not None and stripped:
            section.append(stripped.lstrip("-* ").strip())
    return arguments_for, arguments_against


def debate_candidate(
    gateway: LlmGateway,
    abstract: str,
    candidate: PaperRecord,
    candidate_index: int,
    *,
    model_name: str,
    temperature: float = 0.0,
    max_output_tokens: int = 512,
    abstract_char_cap: int = DEFAULT_ABSTRACT_CHAR_CAP,
) -> DebateVerdict:
    """One pro/con argument round for a single candidate."""
    if not abstract.strip():
        raise EmptyAbstract("debate ranking needs the user abstract")
    if not (candidate.abstract or "").strip():
        raise EmptyAbstract(f"candidate [{candidate_index}] has no abstract to argue over")
    prompt = render_prompt(
        DEBATE_V1,
        {"abstract": abstract, "candidate": _candidate_blurb(candidate, abstract_char_cap)},
    )
    request = LlmRequest(
        model_name=model_name,
        user_text=prompt,
        temperature=temperature,
        max_output_tokens=max_output_tokens,
        template_id=DEBATE_V1.template_id,
        template_version=DEBATE_V1.version,
    )
    exchange = gateway.complete(request)
    text = exchange.response_text
    matches = _PROBABILITY_RE.findall(text)
    if not matches:
        raise Unparseable("debate output has no PROBABILITY line")
    probability = float(matches[-1])
    repairs = []
    if not 0.0 <= probability <= 1.0:
        probability = min(1.0, max(0.0, probability))
        repairs.append(REPAIR_CLAMPED_PROBABILITY)
    arguments_for, arguments_against = _collect_labeled_arguments(text)
    return DebateVerdict(
        candidate_index=candidate_index,
        arguments_for=arguments_for,
        arguments_against=arguments_against,
        include_probability=probability,
        repairs_applied=repairs,
    )


def aggregate_debate(verdicts: Sequence[DebateVerdict]) -> RankedList:
    """Order candidates by inclusion probability, descending; ties keep
    the original retrieval order."""
    n = len(verdicts)
    if sorted(v.candidate_index for v in verdicts) != list(range(1, n + 1)):
        raise IncompleteVerdictSet("verdicts must cover indices 1..n exactly once")
    ranked = sorted(verdicts, key=lambda v: (-v.include_probability, v.candidate_index))
    return RankedList([v.candidate_index for v in ranked], n, RankMethod.DEBATE)


def rerank_by_debate(
    gateway: LlmGateway,
    abstract: str,
    candidates: Sequence[PaperRecord],
    *,
    model_name: str,
    temperature: float = 0.0,
    max_output_tokens: int = 512,
    abstract_char_cap: int = DEFAULT_ABSTRACT_CHAR_CAP,
    max_in_flight: int = 4,
) -> tuple[RankedList, list[DebateVerdict]]:
    """Debate every candidate (bounded concurrency) and aggregate.

    Candidates that cannot be debated (no abstract, unusable output)
    get probability zero so the pipeline keeps moving.
    """
    if not candidates:
        raise ValueError("no candidates to rank")

    def _verdict(args: tuple[int, PaperRecord]) -> DebateVerdict:
        index, paper = args
        try:
            return debate_candidate(
                gateway,
                abstract,
                paper,
                index,
                model_name=model_name,
                temperature=temperature,
                max_output_tokens=max_output_tokens,
                abstract_char_cap=abstract_char_cap,
            )
        except (EmptyAbstract, Unparseable) as exc:
            logger.warning("debate for candidate [%d] failed: %s", index, exc)
            return DebateVerdict(index, [], [str(exc)], 0.0, ["defaulted_zero"])

    workers = max(1, min(max_in_flight, len(candidates)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        verdicts = list(pool.map(_verdict, enumerate(candidates, start=1)))
    return aggregate_debate(verdicts), verdicts
