"""Ground-truth knowledge graph construction from Wikipedia summaries.

For every node of the propositional graph, search its label, fetch the
article lead, extract relations, and union the per-node graphs. The article
text depends on the option only through the propositional graph's node set;
no option-conditioned article variants exist.
"""

from __future__ import annotations

import hashlib
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .backends import ExtractionBackend
from .errors import KgmcqError, NotFoundError
from .graph import Label, RelationalGraph
from .wiki import WikiClient

logger = logging.getLogger(__name__)

DEFAULT_SUMMARY_CAP = 1200
_SENTENCE_ENDS = (". ", "! ", "? ", ".\n", "!\n", "?\n")


def truncate_summary(text: str, cap: int = DEFAULT_SUMMARY_CAP) -> str:
    """Cap article text at a sentence boundary; extraction backends have
    input-length limits."""
    if len(text) <= cap:
        return text
    head = text[: cap + 1]
    best = max((head.rfind(mark) + len(mark) - 1) for mark in _SENTENCE_ENDS)
    if best > 0:
        return head[:best].rstrip()
    return text[:cap].rstrip()


@dataclass(frozen=True)
class ProvenanceEntry:
    """How one propositional-graph node contributed to the knowledge graph."""

    label: Label
    title: str | None
    article_digest: str | None
    triplet_count: int
    triplets: RelationalGraph
    note: str | None = None

    def to_obj(self) -> dict:
        return {
            "label": self.label.raw,
            "title": self.title,
            "article_digest": self.article_digest,
            "triplet_count": self.triplet_count,
            "note": self.note,
        }


@dataclass(frozen=True)
class KgProvenance:
    entries: tuple[ProvenanceEntry, ...]
    warnings: tuple[str, ...] = ()

    def to_obj(self) -> list[dict]:
        return [e.to_obj() for e in self.entries]


def build_kg(
    pg: RelationalGraph,
    extractor: ExtractionBackend,
    wiki: WikiClient,
    fail_fast: bool = False,
    summary_cap: int = DEFAULT_SUMMARY_CAP,
    max_workers: int = 4,
) -> tuple[RelationalGraph, KgProvenance]:
    """Union of per-node article extractions, with full provenance.

    Nodes without a page contribute nothing (recorded). With fail_fast=False
    a per-node transport or extraction failure is recorded as a warning and
    the node skipped; one missing page must not abort a four-option run.
    """
    if len(pg) == 0:
        return RelationalGraph.empty(), KgProvenance(
            entries=(), warnings=("propositional graph is empty; knowledge graph skipped",)
        )

    def fetch(node: Label) -> ProvenanceEntry:
        title = wiki.search_title(node.raw)
        if title is None:
            return ProvenanceEntry(node, None, None, 0, RelationalGraph.empty(), note="no page")
        try:
            article = wiki.get_summary(title)
        except NotFoundError:
            return ProvenanceEntry(node, title, None, 0, RelationalGraph.empty(), note="page vanished")
        text = truncate_summary(article.summary, summary_cap)
        digest = hashlib.sha256(article.summary.encode("utf-8")).hexdigest()[:16]
        contributed = extractor.extract(text) if text.strip() else RelationalGraph.empty()
        return ProvenanceEntry(node, title, digest, len(contributed), contributed)

    nodes = pg.nodes()
    entries: list[ProvenanceEntry] = []
    warnings: list[str] = []
    with ThreadPoolExecutor(max_workers=min(max_workers, len(nodes))) as pool:
        futures = [(node, pool.submit(fetch, node)) for node in nodes]
        for node, fut in futures:
            try:
                entries.append(fut.result())
            except KgmcqError as exc:
                if fail_fast:
                    raise
                warnings.append(f"knowledge graph: node {node.raw!r} skipped: {exc}")
                entries.append(
                    ProvenanceEntry(node, None, None, 0, RelationalGraph.empty(), note=str(exc))
                )

    kg = RelationalGraph.empty()
    for entry in entries:
        kg = kg.union(entry.triplets)
    return kg, KgProvenance(entries=tuple(entries), warnings=tuple(warnings))
