"""Versioned prompt templates and the placeholder renderer.

Placeholders are `{name}` tokens. Rendering is a single-pass exact
substitution: values are inserted verbatim (no escaping, no trimming)
and are never re-scanned for placeholders.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

from .errors import MissingVariable, UnknownPlaceholder

PLACEHOLDER_RE = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")


@dataclass(frozen=True)
class PromptTemplate:
    template_id: str
    version: str
    body: str

    @property
    def name(self) -> str:
        return f"{self.template_id}_{self.version}"

    def placeholders(self) -> set[str]:
        return set(PLACEHOLDER_RE.findall(self.body))


def render_prompt(template: PromptTemplate, variables: Mapping[str, str]) -> str:
    declared = template.placeholders()
    for name in sorted(declared):
        if name not in variables:
            raise MissingVariable(name)
    for name in sorted(variables):
        if name not in declared:
            raise UnknownPlaceholder(name)
    return PLACEHOLDER_RE.sub(lambda m: variables[m.group(1)], template.body)


SUMMARIZE_V1 = PromptTemplate(
    "summarize",
    "v1",
    (
        "You are helping a researcher search an academic engine.\n"
        "Summarize the research abstract below into a short keyword query of at most "
        "{max_words} words. Answer with the query only, on a single line.\n"
        "\n"
        "Abstract:\n"
        "{abstract}"
    ),
)

RERANK_PERMUTATION_V1 = PromptTemplate(
    "rerank_permutation",
    "v1",
    (
        "You are an expert judge of scientific relevance. Below is a numbered list of "
        "candidate papers followed by the abstract of the current work.\n"
        "\n"
        "Candidate papers:\n"
        "{candidates}\n"
        "\n"
        "Abstract of the current work:\n"
        "{abstract}\n"
        "\n"
        "Rank ALL candidates in descending order of relevance to the abstract. Answer "
        "with the ranking only, as a permutation of the bracketed identifiers in exactly "
        "the form \"[a] > [b] > [c]\", using every identifier exactly once."
    ),
)

DEBATE_V1 = PromptTemplate(
    "debate",
    "v1",
    (
        "Decide whether the candidate paper below should be cited in the related-work "
        "section of the current work.\n"
        "\n"
        "Abstract of the current work:\n"
        "{abstract}\n"
        "\n"
        "Candidate paper:\n"
        "{candidate}\n"
        "\n"
        "First write a line reading \"FOR:\" followed by one argument per line for "
        "including the candidate. Then a line reading \"AGAINST:\" followed by one "
        "argument per line against. Close with a single line \"PROBABILITY: p\" where p "
        "is your probability in [0, 1] that the candidate should be included, based on "
        "the arguments."
    ),
)

RAG_ZERO_SHOT_V1 = PromptTemplate(
    "rag_zero_shot",
    "v1",
    (
        "You are a research assistant writing the related-work section of a scientific "
        "paper.\n"
        "\n"
        "{context_block}\n"
        "\n"
        "Abstract of the current work:\n"
        "{abstract}\n"
        "\n"
        "Write the related-work section for the current work, grounding every claim in "
        "the papers listed above and contrasting them with the current work."
    ),
)

RAG_PLAN_V1 = PromptTemplate(
    "rag_plan",
    "v1",
    (
        "You are a research assistant writing the related-work section of a scientific "
        "paper.\n"
        "\n"
        "{context_block}\n"
        "\n"
        "Abstract of the current work:\n"
        "{abstract}\n"
        "\n"
        "Write the related-work section for the current work, grounding every claim in "
        "the papers listed above. Follow this sentence plan exactly: {plan}"
    ),
)

TEMPLATES = {
    t.name: t
    for t in (SUMMARIZE_V1, RERANK_PERMUTATION_V1, DEBATE_V1, RAG_ZERO_SHOT_V1, RAG_PLAN_V1)
}
