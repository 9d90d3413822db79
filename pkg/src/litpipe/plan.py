"""The sentence-plan mini-language and draft compliance checking.

Grammar (case-insensitive, whitespace-flexible):

    plan      = header directive*
    header    = "Please generate" INT "sentences" ["in" INT "words"] "."
    directive = "Cite" citation ("," citation)* ("at"|"on") "line" INT "."
    citation  = "[" INT "]"

Rendering always emits the canonical "at line" form, so rendering a
parsed plan and parsing it again is the identity.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

from .errors import DuplicateDirective, PlanLineOutOfRange, PlanSyntaxError

CITATION_MARKER_RE = re.compile(r"\[(\d+)\]")

_HEADER_RE = re.compile(
    r"please\s+generate\s+(\d+)\s+sentences(?:\s+in\s+(\d+)\s+words)?\s*\.",
    re.IGNORECASE,
)
_DIRECTIVE_RE = re.compile(
    r"cite\s+(\[\s*\d+\s*\](?:\s*,\s*\[\s*\d+\s*\])*)\s+(at|on)\s+line\s+(\d+)\s*\.",
    re.IGNORECASE,
)
_CITE_LIST_RE = re.compile(r"\[\s*(\d+)\s*\]")


@dataclass(frozen=True)
class CiteDirective:
    line: int
    cites: tuple[int, ...]


@dataclass(frozen=True)
class SentencePlan:
    num_sentences: int
    num_words: int | None = None
    cite_directives: tuple[CiteDirective, ...] = ()

    def max_cite(self) -> int:
        return max((max(d.cites) for d in self.cite_directives), default=0)

    def validate(self) -> None:
        if self.num_sentences < 1:
            raise PlanSyntaxError(0, "sentence count must be positive")
        if self.num_words is not None and self.num_words < 1:
            raise PlanSyntaxError(0, "word count must be positive")
        seen: set[tuple[int, int]] = set()
        for directive in self.cite_directives:
            if not 1 <= directive.line <= self.num_sentences:
                raise PlanLineOutOfRange(directive.line)
            if not directive.cites:
                raise PlanSyntaxError(0, "a directive needs at least one citation")
            for cite in directive.cites:
                if cite < 1:
                    raise PlanSyntaxError(0, "citation indices are 1-based")
                if (directive.line, cite) in seen:
                    raise DuplicateDirective(
                        f"citation [{cite}] is planned twice for line {directive.line}"
                    )
                seen.add((directive.line, cite))

    def to_dict(self) -> dict:
        return {
            "num_sentences": self.num_sentences,
            "num_words": self.num_words,
            "cite_directives": [
                {"line": d.line, "cites": list(d.cites)} for d in self.cite_directives
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SentencePlan":
        return cls(
            num_sentences=data["num_sentences"],
            num_words=data.get("num_words"),
            cite_directives=tuple(
                CiteDirective(d["line"], tuple(d["cites"]))
                for d in data.get("cite_directives") or []
            ),
        )


def _skip_whitespace(text: str, pos: int) -> int:
    while pos < len(text) and text[pos].isspace():
        pos += 1
    return pos


def parse_plan(text: str) -> SentencePlan:
    """Parse plan text; raises PlanSyntaxError with the failing offset."""
    pos = _skip_whitespace(text, 0)
    if pos >= len(text):
        raise PlanSyntaxError(pos, "plan is empty")
    header = _HEADER_RE.match(text, pos)
    if header is None:
        raise PlanSyntaxError(pos, "expected 'Please generate <n> sentences [in <m> words].'")
    num_sentences = int(header.group(1))
    if num_sentences < 1:
        raise PlanSyntaxError(header.start(1), "sentence count must be positive")
    num_words = int(header.group(2)) if header.group(2) is not None else None
    if num_words is not None and num_words < 1:
        raise PlanSyntaxError(header.start(2), "word count must be positive")
    pos = header.end()

    directives: list[CiteDirective] = []
    seen_pairs: set[tuple[int, int]] = set()
    while True:
        pos = _skip_whitespace(text, pos)
        if pos >= len(text):
            break
        directive = _DIRECTIVE_RE.match(text, pos)
        if directive is None:
            raise PlanSyntaxError(pos, "expected 'Cite [i] at line <n>.'")
        cites = tuple(int(c) for c in _CITE_LIST_RE.findall(directive.group(1)))
        line = int(directive.group(3))
        if not 1 <= line <= num_sentences:
            raise PlanLineOutOfRange(line)
        for cite in cites:
            if cite < 1:
                raise PlanSyntaxError(directive.start(1), "citation indices are 1-based")
            if (line, cite) in seen_pairs:
                raise DuplicateDirective(
                    f"citation [{cite}] is planned twice for line {line}"
                )
            seen_pairs.add((line, cite))
        directives.append(CiteDirective(line=line, cites=cites))
        pos = directive.end()

    return SentencePlan(
        num_sentences=num_sentences, num_words=num_words, cite_directives=tuple(directives)
    )


def render_plan(plan: SentencePlan) -> str:
    """Emit the canonical surface form ("at line"); inverse of parse_plan."""
    plan.validate()
    head = f"Please generate {plan.num_sentences} sentences"
    if plan.num_words is not None:
        head += f" in {plan.num_words} words"
    parts = [head + "."]
    for directive in plan.cite_directives:
        cites = ", ".join(f"[{c}]" for c in directive.cites)
        parts.append(f"Cite {cites} at line {directive.line}.")
    return " ".join(parts)


# Trailing tokens whose period never ends a sentence.
_ABBREVIATIONS = (
    "et al.",
    "e.g.",
    "i.e.",
    "etc.",
    "cf.",
    "vs.",
    "fig.",
    "figs.",
    "eq.",
    "eqs.",
    "sec.",
    "resp.",
    "approx.",
    "no.",
    "dr.",
    "prof.",
)


def _ends_with_abbreviation(text: str, dot_index: int) -> bool:
    for abbreviation in _ABBREVIATIONS:
        start = dot_index + 1 - len(abbreviation)
        if start < 0:
            continue
        if text[start : dot_index + 1].lower() != abbreviation:
            continue
        if start == 0 or not text[start - 1].isalpha():
            return True
    return False


def split_sentences(text: str) -> list[str]:
    """Deterministic sentence segmentation.

    A sentence ends at '.', '!' or '?' followed by whitespace and an
    uppercase letter, or at the end of the text. Periods belonging to a
    fixed list of abbreviations never split; bracketed citation markers
    contain no terminators, so they never split either.
    """
    sentences: list[str] = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        if text[i] not in ".!?":
            i += 1
            continue
        run_end = i
        while run_end + 1 < n and text[run_end + 1] in ".!?":
            run_end += 1
        follow = run_end + 1
        while follow < n and text[follow].isspace():
            follow += 1
        is_boundary = (
            follow < n
            and follow > run_end + 1
            and text[follow].isupper()
            and not (text[i] == "." and run_end == i and _ends_with_abbreviation(text, i))
        )
        if is_boundary:
            chunk = text[start : run_end + 1].strip()
            if chunk:
                sentences.append(chunk)
            start = follow
            i = follow
        else:
            i = run_end + 1
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def extract_citation_markers(text: str) -> list[int]:
    """All bracketed citation indices in order of appearance."""
    return [int(m) for m in CITATION_MARKER_RE.findall(text)]


@dataclass(frozen=True)
class DirectiveCheck:
    line: int
    cites: tuple[int, ...]
    satisfied: bool

    def to_dict(self) -> dict:
        return {"line": self.line, "cites": list(self.cites), "satisfied": self.satisfied}


@dataclass(frozen=True)
class ComplianceReport:
    sentence_count_observed: int
    sentence_count_ok: bool
    word_count_observed: int
    word_count_within: bool
    per_directive: tuple[DirectiveCheck, ...]
    unknown_citations: tuple[int, ...]
    fully_compliant: bool

    def to_dict(self) -> dict:
        return {
            "sentence_count_observed": self.sentence_count_observed,
            "sentence_count_ok": self.sentence_count_ok,
            "word_count_observed": self.word_count_observed,
            "word_count_within": self.word_count_within,
            "per_directive": [d.to_dict() for d in self.per_directive],
            "unknown_citations": list(self.unknown_citations),
            "fully_compliant": self.fully_compliant,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ComplianceReport":
        return cls(
            sentence_count_observed=data["sentence_count_observed"],
            sentence_count_ok=data["sentence_count_ok"],
            word_count_observed=data["word_count_observed"],
            word_count_within=data["word_count_within"],
            per_directive=tuple(
                DirectiveCheck(d["line"], tuple(d["cites"]), d["satisfied"])
                for d in data.get("per_directive") or []
            ),
            unknown_citations=tuple(data.get("unknown_citations") or ()),
            fully_compliant=data["fully_compliant"],
        )


WORD_COUNT_TOLERANCE = 0.2


def validate_compliance(
    draft_text: str, plan: SentencePlan, n_context: int
) -> ComplianceReport:
    """Check a draft against its plan; reports, never raises.

    Sentence count and citation placement are strict; the word count is
    advisory with a +-20% tolerance. Citation markers outside
    1..n_context are reported as unknown (hallucinated) regardless of
    the plan.
    """
    if n_context < 1:
        raise ValueError("n_context must be >= 1")
    sentences = split_sentences(draft_text)
    observed = len(sentences)
    sentence_count_ok = observed == plan.num_sentences

    word_count = len(draft_text.split())
    if plan.num_words is None:
        word_count_within = True
    else:
        word_count_within = abs(word_count - plan.num_words) <= WORD_COUNT_TOLERANCE * plan.num_words

    checks = []
    for directive in plan.cite_directives:
        if directive.line <= observed:
            present = set(extract_citation_markers(sentences[directive.line - 1]))
            satisfied = all(cite in present for cite in directive.cites)
        else:
            satisfied = False
        checks.append(DirectiveCheck(directive.line, directive.cites, satisfied))

    unknown = tuple(
        sorted({m for m in extract_citation_markers(draft_text) if m < 1 or m > n_context})
    )
    fully = sentence_count_ok and all(c.satisfied for c in checks) and not unknown
    return ComplianceReport(
        sentence_count_observed=observed,
        sentence_count_ok=sentence_count_ok,
        word_count_observed=word_count,
        word_count_within=word_count_within,
        per_directive=tuple(checks),
        unknown_citations=unknown,
        fully_compliant=fully,
    )
