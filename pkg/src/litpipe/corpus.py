"""Candidate-set construction: merge, dedup, sort, truncate.

Records from both sources are folded into one canonical candidate list.
Two records describe the same paper when they share a DOI, failing that
an arXiv id, failing that an identical normalized title. Merged field
values prefer Semantic Scholar over OpenAlex, filling gaps from the
other source.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence, Union

from .scholarly import Source, SourceRecord


class SortKey(str, Enum):
    RELEVANCE = "relevance"
    CITATION_COUNT = "citations"
    YEAR = "year"


@dataclass(frozen=True)
class PaperRecord:
    """One deduplicated paper, possibly backed by several sources."""

    canonical_id: str
    title: str
    best_source_position: int
    sources: frozenset[Source]
    abstract: str | None = None
    year: int | None = None
    citation_count: int | None = None
    external_ids: dict[str, str] = field(default_factory=dict)
    url: str | None = None
    authors: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.sources:
            raise ValueError("a PaperRecord needs at least one source")

    def to_dict(self) -> dict:
        return {
            "canonical_id": self.canonical_id,
            "title": self.title,
            "best_source_position": self.best_source_position,
            "sources": sorted(s.value for s in self.sources),
            "abstract": self.abstract,
            "year": self.year,
            "citation_count": self.citation_count,
            "external_ids": dict(self.external_ids),
            "url": self.url,
            "authors": list(self.authors),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PaperRecord":
        return cls(
            canonical_id=data["canonical_id"],
            title=data["title"],
            best_source_position=data["best_source_position"],
            sources=frozenset(Source(s) for s in data["sources"]),
            abstract=data.get("abstract"),
            year=data.get("year"),
            citation_count=data.get("citation_count"),
            external_ids=dict(data.get("external_ids") or {}),
            url=data.get("url"),
            authors=tuple(data.get("authors") or ()),
        )


AnyRecord = Union[SourceRecord, PaperRecord]


def normalize_title(title: str) -> str:
    """Lowercase, drop punctuation, collapse whitespace runs, trim."""
    lowered = title.lower()
    kept = "".join(ch for ch in lowered if ch.isalnum() or ch.isspace())
    return " ".join(kept.split())


def _sources_of(record: AnyRecord) -> frozenset[Source]:
    if isinstance(record, PaperRecord):
        return record.sources
    return frozenset({record.source})


def _position_of(record: AnyRecord) -> int:
    if isinstance(record, PaperRecord):
        return record.best_source_position
    return record.source_position


def _precedence(record: AnyRecord) -> int:
    # S2 fields win over OpenAlex-only records when merging.
    return 0 if Source.S2 in _sources_of(record) else 1


def _dedup_keys(record: AnyRecord) -> list[str]:
    keys = []
    doi = record.external_ids.get("doi")
    if doi:
        keys.append(f"doi:{doi.strip().lower()}")
    arxiv = record.external_ids.get("arxiv")
    if arxiv:
        keys.append(f"arxiv:{arxiv.strip().lower()}")
    # Space-stripped on top of normalization, so hyphenated and spaced
    # spellings of the same title ("image-text" vs "image text") match.
    norm = normalize_title(record.title).replace(" ", "")
    if norm:
        keys.append(f"title:{norm}")
    return keys


def records_match(a: AnyRecord, b: AnyRecord) -> bool:
    """True when two records describe the same paper (shared DOI, arXiv
    id, or matching normalized title). This is the pairwise rule the
    clustering below must agree with."""
    return bool(set(_dedup_keys(a)) & set(_dedup_keys(b)))


def _canonical_id(records: Sequence[AnyRecord]) -> str:
    for prefix in ("doi:", "arxiv:"):
        for record in records:
            for key in _dedup_keys(record):
                if key.startswith(prefix):
                    return key
    norm = normalize_title(records[0].title)
    if norm:
        digest = hashlib.sha1(norm.encode("utf-8")).hexdigest()[:12]
        return f"title:{digest}"
    # All-punctuation titles never cluster by key, so disambiguate by position.
    digest = hashlib.sha1(records[0].title.encode("utf-8")).hexdigest()[:12]
    return f"title:{digest}:p{_position_of(records[0])}"


def _first_value(records: Sequence[AnyRecord], getter) -> object:
    for record in records:
        value = getter(record)
        if value is not None and value != () and value != "":
            return value
    return getter(records[0])


def _merge_cluster(records: list[AnyRecord]) -> PaperRecord:
    # Stable sort: S2-backed records first, original order otherwise.
    ordered = sorted(records, key=_precedence)
    external_ids: dict[str, str] = {}
    for record in ordered:
        for key, value in record.external_ids.items():
            external_ids.setdefault(key, value)
    sources: set[Source] = set()
    for record in records:
        sources |= _sources_of(record)
    return PaperRecord(
        canonical_id=_canonical_id(ordered),
        title=ordered[0].title,
        best_source_position=min(_position_of(r) for r in records),
        sources=frozenset(sources),
        abstract=_first_value(ordered, lambda r: r.abstract),
        year=_first_value(ordered, lambda r: r.year),
        citation_count=_first_value(ordered, lambda r: r.citation_count),
        external_ids=external_ids,
        url=_first_value(ordered, lambda r: r.url),
        authors=_first_value(ordered, lambda r: r.authors) or (),
    )


class _UnionFind:
    def __init__(self):
        self.parent: list[int] = []

    def add(self) -> int:
        self.parent.append(len(self.parent))
        return len(self.parent) - 1

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        # Keep the earlier cluster as root so first-seen order survives.
        lo, hi = min(ra, rb), max(ra, rb)
        self.parent[hi] = lo
        return lo


def merge_and_dedup(batches: Iterable[Sequence[AnyRecord]]) -> list[PaperRecord]:
    """Fold per-source batches into one deduplicated candidate list.

    Output order: ascending best source position, S2-backed papers
    winning ties, first-seen order breaking what remains. Inputs are
    never mutated; calling this on its own output is a no-op.
    """
    flat: list[AnyRecord] = [record for batch in batches for record in batch]
    uf = _UnionFind()
    key_owner: dict[str, int] = {}
    member_of: list[int] = []
    for record in flat:
        idx = uf.add()
        for key in _dedup_keys(record):
            if key in key_owner:
                uf.union(key_owner[key], idx)
        for key in _dedup_keys(record):
            key_owner[key] = uf.find(idx)
        member_of.append(idx)
    # Re-root key owners after unions so later joins see final roots.
    clusters: dict[int, list[AnyRecord]] = {}
    for record, idx in zip(flat, member_of):
        clusters.setdefault(uf.find(idx), []).append(record)
    merged = [_merge_cluster(records) for _, records in sorted(clusters.items())]
    merged.sort(key=lambda p: (p.best_source_position, 0 if Source.S2 in p.sources else 1))
    return merged


def sort_papers(papers: Sequence[PaperRecord], key: SortKey) -> list[PaperRecord]:
    """Stable sort into a new list; absent values order last."""
    if key is SortKey.RELEVANCE:
        return sorted(papers, key=lambda p: p.best_source_position)
    if key is SortKey.CITATION_COUNT:
        return sorted(papers, key=lambda p: (p.citation_count is None, -(p.citation_count or 0)))
    if key is SortKey.YEAR:
        return sorted(papers, key=lambda p: (p.year is None, -(p.year or 0)))
    raise ValueError(f"unknown sort key: {key!r}")


def truncate_candidates(papers: Sequence[PaperRecord], k: int) -> list[PaperRecord]:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return list(papers[:k])
