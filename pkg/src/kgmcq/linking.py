"""Entity linking: relabel graph nodes to Wikipedia article titles.

Only node labels are rewritten; relation labels never are. Nodes whose
search finds no page keep their original label. Two nodes resolving to the
same title merge into one (the graph's set semantics deduplicate edges).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .errors import TransportError
from .graph import Label, RelationalGraph, Triplet
from .wiki import WikiClient

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LinkResult:
    original: Label
    linked: str | None
    merged_into: Label | None = None


@dataclass(frozen=True)
class LinkingOutcome:
    graph: RelationalGraph
    results: tuple[LinkResult, ...]
    warnings: tuple[str, ...] = field(default_factory=tuple)


def link_node(label: Label, wiki: WikiClient) -> LinkResult:
    """Resolve one node label through title search; None when no page found."""
    return LinkResult(original=label, linked=wiki.search_title(label.raw))


def link_graph(
    g: RelationalGraph,
    wiki: WikiClient,
    enabled: bool = True,
    fail_fast: bool = False,
) -> LinkingOutcome:
    """Relabel every node to its linked title where one exists.

    With fail_fast=False, a transport failure on one node keeps that node's
    original label and records a warning instead of aborting the pass.
    """
    if not enabled:
        return LinkingOutcome(graph=g, results=())

    warnings: list[str] = []
    linked: dict[str, str | None] = {}
    for node in g.nodes():
        try:
            linked[node.norm] = link_node(node, wiki).linked
        except TransportError as exc:
            if fail_fast:
                raise
            warnings.append(f"entity linking skipped for {node.raw!r}: {exc}")
            linked[node.norm] = None

    # Nodes sharing a resolved title (or landing on an existing node's norm)
    # merge into a single node; record the merge target per source node.
    replacements: dict[str, Label] = {}
    final_norms: dict[str, list[str]] = {}
    for node in g.nodes():
        title = linked[node.norm]
        target = Label(title) if title is not None else node
        replacements[node.norm] = target
        final_norms.setdefault(target.norm, []).append(node.norm)

    results = []
    for node in g.nodes():
        target = replacements[node.norm]
        merged = target if len(final_norms[target.norm]) > 1 and target.norm != node.norm else None
        results.append(
            LinkResult(original=node, linked=linked[node.norm], merged_into=merged)
        )

    def swap(lab: Label) -> Label:
        return replacements.get(lab.norm, lab)

    relabeled = RelationalGraph(
        Triplet(swap(t.subject), t.relation, swap(t.object)) for t in g
    )
    return LinkingOutcome(graph=relabeled, results=tuple(results), warnings=tuple(warnings))


def apply_linking(g: RelationalGraph, wiki: WikiClient) -> RelationalGraph:
    """The linking pass as a plain graph-to-graph function."""
    return link_graph(g, wiki).graph
