"""Related-work draft generation over re-ranked candidates.

Two modes: zero-shot (context + abstract) and plan-based (context +
abstract + a rendered sentence plan). Model output is stored verbatim;
citation extraction and compliance checking live in derived fields.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

from .corpus import PaperRecord
from .errors import BudgetExceeded, PlanContextMismatch
from .llm import LlmGateway, LlmRequest, estimate_tokens
from .plan import (
    ComplianceReport,
    SentencePlan,
    extract_citation_markers,
    render_plan,
    validate_compliance,
)
from .templates import RAG_PLAN_V1, RAG_ZERO_SHOT_V1, PromptTemplate, render_prompt

logger = logging.getLogger(__name__)

DEFAULT_ABSTRACT_CHAR_CAP = 1200
MIN_CONTEXT_PAPERS = 3

CONTEXT_INSTRUCTION = (
    "Cite these papers only by their bracketed numbers exactly as listed above. "
    "Do not cite anything that is not in the list."
)


@dataclass
class GenerationContext:
    """Abstract plus the ranked papers; citation [i] means papers[i-1]."""

    abstract_text: str
    papers: list[PaperRecord]

    def __post_init__(self):
        if not self.papers:
            raise ValueError("generation needs at least one paper")


@dataclass
class ContextBlock:
    text: str
    included: int
    dropped: int


@dataclass
class ReviewDraft:
    text: str
    citations_used: set[int]
    hallucinated_citations: list[int]
    exchange_ref: str
    plan_used: SentencePlan | None = None
    compliance: ComplianceReport | None = None
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "citations_used": sorted(self.citations_used),
            "hallucinated_citations": list(self.hallucinated_citations),
            "exchange_ref": self.exchange_ref,
            "plan_used": self.plan_used.to_dict() if self.plan_used else None,
            "compliance": self.compliance.to_dict() if self.compliance else None,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ReviewDraft":
        return cls(
            text=data["text"],
            citations_used=set(data.get("citations_used") or ()),
            hallucinated_citations=list(data.get("hallucinated_citations") or ()),
            exchange_ref=data["exchange_ref"],
            plan_used=SentencePlan.from_dict(data["plan_used"]) if data.get("plan_used") else None,
            compliance=(
                ComplianceReport.from_dict(data["compliance"]) if data.get("compliance") else None
            ),
            warnings=list(data.get("warnings") or ()),
        )


def _paper_entry(index: int, paper: PaperRecord, abstract_char_cap: int) -> str:
    year = str(paper.year) if paper.year is not None else "n.d."
    snippet = (paper.abstract or "").strip()[:abstract_char_cap]
    if not snippet:
        snippet = "(no abstract available)"
    return f"[{index}] {paper.title} ({year}). Abstract: {snippet}"


def build_context_block(
    ctx: GenerationContext,
    *,
    abstract_char_cap: int = DEFAULT_ABSTRACT_CHAR_CAP,
    token_budget: int | None = None,
    token_estimator=estimate_tokens,
    overhead_text: str = "",
) -> ContextBlock:
    """Enumerate the ranked papers as a citable context list.

    When a token budget is given, trailing papers are dropped (down to
    a floor of three) until block plus overhead fit; if they still do
    not, the block is unbuildable and BudgetExceeded is raised.
    """
    papers = list(ctx.papers)
    dropped = 0
    while True:
        entries = [
            _paper_entry(i, paper, abstract_char_cap) for i, paper in enumerate(papers, start=1)
        ]
        text = "Papers to cite:\n" + "\n".join(entries) + "\n" + CONTEXT_INSTRUCTION
        if token_budget is None:
            break
        used = token_estimator(text) + token_estimator(overhead_text)
        if used <= token_budget:
            break
        if len(papers) <= min(MIN_CONTEXT_PAPERS, len(ctx.papers)):
            raise BudgetExceeded(
                f"context block needs ~{used} tokens even with {len(papers)} papers; "
                f"budget is {token_budget}"
            )
        papers.pop()
        dropped += 1
    if dropped:
        logger.warning("dropped %d trailing papers to fit the context budget", dropped)
    return ContextBlock(text=text, included=len(papers), dropped=dropped)


def _prompted_block(
    gateway: LlmGateway,
    ctx: GenerationContext,
    template: PromptTemplate,
    extra_vars: dict[str, str],
    *,
    model_name: str,
    max_output_tokens: int,
    abstract_char_cap: int,
) -> tuple[str, ContextBlock]:
    overhead = render_prompt(template, {**extra_vars, "context_block": ""})
    budget = gateway.context_limit(model_name) - max_output_tokens
    block = build_context_block(
        ctx,
        abstract_char_cap=abstract_char_cap,
        token_budget=budget,
        token_estimator=gateway.token_estimator,
        overhead_text=overhead,
    )
    prompt = render_prompt(template, {**extra_vars, "context_block": block.text})
    return prompt, block


def _draft_from_exchange(exchange, n_context: int, block: ContextBlock) -> ReviewDraft:
    text = exchange.response_text
    used = set(extract_citation_markers(text))
    hallucinated = sorted(m for m in used if m < 1 or m > n_context)
    warnings = []
    if block.dropped:
        warnings.append(f"dropped {block.dropped} trailing papers to fit the context budget")
    if not used:
        warnings.append("draft contains no citation markers")
    if hallucinated:
        warnings.append(f"draft cites unknown papers: {hallucinated}")
    return ReviewDraft(
        text=text,
        citations_used=used,
        hallucinated_citations=hallucinated,
        exchange_ref=exchange.exchange_id,
        warnings=warnings,
    )


def generate_zero_shot(
    gateway: LlmGateway,
    ctx: GenerationContext,
    *,
    model_name: str,
    temperature: float = 0.7,
    max_output_tokens: int = 1024,
    abstract_char_cap: int = DEFAULT_ABSTRACT_CHAR_CAP,
) -> ReviewDraft:
    """Retrieval-augmented draft with no structural constraints."""
    prompt, block = _prompted_block(
        gateway,
        ctx,
        RAG_ZERO_SHOT_V1,
        {"abstract": ctx.abstract_text},
        model_name=model_name,
        max_output_tokens=max_output_tokens,
        abstract_char_cap=abstract_char_cap,
    )
    exchange = gateway.complete(
        LlmRequest(
            model_name=model_name,
            user_text=prompt,
            temperature=temperature,
            max_output_tokens=max_output_tokens,
            template_id=RAG_ZERO_SHOT_V1.template_id,
            template_version=RAG_ZERO_SHOT_V1.version,
        )
    )
    return _draft_from_exchange(exchange, block.included, block)


def generate_with_plan(
    gateway: LlmGateway,
    ctx: GenerationContext,
    plan: SentencePlan,
    *,
    model_name: str,
    temperature: float = 0.7,
    max_output_tokens: int = 1024,
    abstract_char_cap: int = DEFAULT_ABSTRACT_CHAR_CAP,
    strict: bool = False,
) -> ReviewDraft:
    """Plan-guided draft with an attached compliance report.

    Non-compliant drafts are returned with their report; when strict is
    on, one retry is attempted and the compliant draft (if any) wins.
    """
    plan.validate()
    if plan.max_cite() > len(ctx.papers):
        raise PlanContextMismatch(
            f"plan cites [{plan.max_cite()}] but only {len(ctx.papers)} papers are in context"
        )
    plan_text = render_plan(plan)
    prompt, block = _prompted_block(
        gateway,
        ctx,
        RAG_PLAN_V1,
        {"abstract": ctx.abstract_text, "plan": plan_text},
        model_name=model_name,
        max_output_tokens=max_output_tokens,
        abstract_char_cap=abstract_char_cap,
    )
    if plan.max_cite() > block.included:
        raise PlanContextMismatch(
            f"plan cites [{plan.max_cite()}] but the context budget kept only "
            f"{block.included} papers"
        )
    request = LlmRequest(
        model_name=model_name,
        user_text=prompt,
        temperature=temperature,
        max_output_tokens=max_output_tokens,
        template_id=RAG_PLAN_V1.template_id,
        template_version=RAG_PLAN_V1.version,
    )
    attempts = 2 if strict else 1
    draft = None
    for attempt in range(attempts):
        exchange = gateway.complete(request)
        candidate = _draft_from_exchange(exchange, block.included, block)
        candidate.plan_used = plan
        candidate.compliance = validate_compliance(candidate.text, plan, block.included)
        if attempt > 0:
            candidate.warnings.append("strict mode retried a non-compliant draft")
        if draft is None:
            draft = candidate
        if candidate.compliance.fully_compliant:
            return candidate
    return draft
