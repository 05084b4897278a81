"""Edge score, node score, answer selection, and the per-item pipeline.

The edge score of an option is |projected(PG) ∩ KG| / |PG|: the fraction of
extracted claims verifiable in the knowledge graph under the closed-world
assumption. The node score is the mean alignment similarity over PG nodes
and breaks edge-score ties; remaining ties are resolved by a seeded uniform
draw, consumed exactly once per item.
"""

from __future__ import annotations

import hashlib
import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .alignment import Alignment, align
from .backends import EmbeddingBackend, ExtractionBackend
from .graph import RelationalGraph, Triplet
from .kg_builder import DEFAULT_SUMMARY_CAP, KgProvenance, build_kg
from .linking import link_graph
from .pg_builder import McqItem, PgTemplate, build_template, instantiate
from .wiki import WikiClient

logger = logging.getLogger(__name__)

TIE_TOL = 1e-9

SELECT_BY_EDGE = "edge"
SELECT_BY_NODE = "node-tiebreak"
SELECT_BY_RANDOM = "random-tiebreak"


@dataclass(frozen=True)
class EdgeScore:
    """Edge-score fragment of a verdict: the T value and the edge partition."""

    t: float
    verified: tuple[tuple[Triplet, Triplet], ...]  # (pg triplet, projected image)
    unverified: tuple[Triplet, ...]
    pg_size: int
    kg_size: int
    empty_pg: bool
    projection_collapsed: bool


def edge_score(pg: RelationalGraph, kg: RelationalGraph, phi: Alignment) -> EdgeScore:
    """T = |phi(PG) ∩ KG| / |PG|, plus the verified/unverified partition.

    The numerator counts the projected set, so when projection collapses
    distinct PG triplets onto one image, T stays below 1 even if every
    image is verified; collapses are flagged for the report.
    """
    if len(pg) == 0:
        return EdgeScore(0.0, (), (), 0, len(kg), empty_pg=True, projection_collapsed=False)
    projected = pg.project(phi)
    t = projected.intersect_count(kg) / len(pg)
    node_map = phi.node_map
    verified = []
    unverified = []
    for trip in pg:
        image = Triplet(node_map[trip.subject.norm], trip.relation, node_map[trip.object.norm])
        if image in kg:
            verified.append((trip, image))
        else:
            unverified.append(trip)
    return EdgeScore(
        t=t,
        verified=tuple(verified),
        unverified=tuple(unverified),
        pg_size=len(pg),
        kg_size=len(kg),
        empty_pg=False,
        projection_collapsed=len(projected) < len(pg),
    )


def node_score(phi: Alignment) -> float:
    """Mean alignment similarity over all PG nodes; 0 for an empty node set."""
    if not phi.entries:
        return 0.0
    return phi.total_similarity / len(phi.entries)


@dataclass(frozen=True)
class OptionVerdict:
    option_index: int
    option: str
    edge: EdgeScore
    node: float
    alignment: Alignment
    provenance: KgProvenance
    warnings: tuple[str, ...] = ()

    @property
    def t(self) -> float:
        return self.edge.t

    def to_obj(self) -> dict:
        return {
            "option_index": self.option_index,
            "option": self.option,
            "edge_score": self.edge.t,
            "node_score": self.node,
            "pg_size": self.edge.pg_size,
            "kg_size": self.edge.kg_size,
            "empty_pg": self.edge.empty_pg,
            "projection_collapsed": self.edge.projection_collapsed,
            "verified": [
                {
                    "pg": [t.subject.raw, t.relation.raw, t.object.raw],
                    "projected": [p.subject.raw, p.relation.raw, p.object.raw],
                }
                for t, p in self.edge.verified
            ],
            "unverified": [[t.subject.raw, t.relation.raw, t.object.raw] for t in self.edge.unverified],
            "alignment": self.alignment.to_obj(),
            "provenance": self.provenance.to_obj(),
            "warnings": list(self.warnings),
        }


def select_answer(
    verdicts: tuple[OptionVerdict, OptionVerdict, OptionVerdict, OptionVerdict],
    seed: int,
) -> tuple[int, str, tuple[int, ...]]:
    """Argmax by edge score, then node score, then a seeded uniform draw.

    Returns (chosen index, selection kind, final tie set). Float comparisons
    use an absolute tolerance of 1e-9 so ratio arithmetic noise does not
    split genuine ties. The seeded generator is consumed only when the node
    score leaves more than one candidate.
    """
    if len(verdicts) != 4:
        raise ValueError("select_answer requires exactly 4 verdicts")
    t_max = max(v.t for v in verdicts)
    t_tie = [v.option_index for v in verdicts if t_max - v.t <= TIE_TOL]
    if len(t_tie) == 1:
        return t_tie[0], SELECT_BY_EDGE, tuple(t_tie)
    n_max = max(verdicts[i].node for i in t_tie)
    n_tie = [i for i in t_tie if n_max - verdicts[i].node <= TIE_TOL]
    if len(n_tie) == 1:
        return n_tie[0], SELECT_BY_NODE, tuple(n_tie)
    rng = random.Random(seed)
    return rng.choice(n_tie), SELECT_BY_RANDOM, tuple(n_tie)


@dataclass(frozen=True)
class VerificationReport:
    item_id: str
    category: str
    verdicts: tuple[OptionVerdict, OptionVerdict, OptionVerdict, OptionVerdict]
    chosen_index: int
    selection_kind: str
    tie_set: tuple[int, ...]
    rng_seed: int
    el_enabled: bool
    answer_index: int
    warnings: tuple[str, ...] = ()

    @property
    def correct(self) -> bool:
        return self.chosen_index == self.answer_index

    def to_obj(self) -> dict:
        return {
            "schema_version": 1,
            "item_id": self.item_id,
            "category": self.category,
            "el_enabled": self.el_enabled,
            "chosen_index": self.chosen_index,
            "selection_kind": self.selection_kind,
            "tie_set": list(self.tie_set),
            "rng_seed": self.rng_seed,
            "answer_index": self.answer_index,
            "correct": self.correct,
            "warnings": list(self.warnings),
            "options": [v.to_obj() for v in self.verdicts],
        }


@dataclass(frozen=True)
class PipelineConfig:
    extractor: ExtractionBackend
    embedder: EmbeddingBackend
    wiki: WikiClient
    el_enabled: bool = True
    fail_fast: bool = False
    summary_cap: int = DEFAULT_SUMMARY_CAP
    tau: float | None = 0.0
    option_workers: int = 4


def item_seed(run_seed: int, item_id: str) -> int:
    """Stable per-item seed, independent of item order and parallelism."""
    digest = hashlib.sha256(f"{run_seed}:{item_id}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _evaluate_option(
    item: McqItem, tmpl: PgTemplate, index: int, cfg: PipelineConfig
) -> OptionVerdict:
    option = item.options[index]
    warnings: list[str] = []

    pg_raw = instantiate(tmpl, option)
    linked = link_graph(pg_raw, cfg.wiki, enabled=cfg.el_enabled, fail_fast=cfg.fail_fast)
    warnings.extend(linked.warnings)
    pg = linked.graph

    # Article search runs on post-linking labels (titles self-resolve), so
    # the linking pass and the article lookup share one cache entry.
    kg_raw, provenance = build_kg(
        pg, cfg.extractor, cfg.wiki, fail_fast=cfg.fail_fast, summary_cap=cfg.summary_cap
    )
    warnings.extend(provenance.warnings)
    kg_linked = link_graph(kg_raw, cfg.wiki, enabled=cfg.el_enabled, fail_fast=cfg.fail_fast)
    warnings.extend(kg_linked.warnings)
    kg = kg_linked.graph

    phi = align(pg.nodes(), kg.nodes(), cfg.embedder, tau=cfg.tau)
    edge = edge_score(pg, kg, phi)
    if edge.empty_pg:
        warnings.append("empty propositional graph: edge score forced to 0")
    node = node_score(phi)
    if not phi.entries:
        warnings.append("empty node set: node score forced to 0")
    return OptionVerdict(
        option_index=index,
        option=option,
        edge=edge,
        node=node,
        alignment=phi,
        provenance=provenance,
        warnings=tuple(warnings),
    )


def answer_item(item: McqItem, cfg: PipelineConfig, run_seed: int = 0) -> VerificationReport:
    """Run the full verification pipeline for one question."""
    tmpl = build_template(item, cfg.extractor)
    template_warnings = tuple(
        f"option {opt!r}: {msg}" for opt, msg in tmpl.per_option_warnings
    )

    with ThreadPoolExecutor(max_workers=min(cfg.option_workers, 4)) as pool:
        futures = [pool.submit(_evaluate_option, item, tmpl, i, cfg) for i in range(4)]
        verdicts = tuple(f.result() for f in futures)

    seed = item_seed(run_seed, item.id)
    chosen, kind, tie_set = select_answer(verdicts, seed)
    return VerificationReport(
        item_id=item.id,
        category=item.category,
        verdicts=verdicts,
        chosen_index=chosen,
        selection_kind=kind,
        tie_set=tie_set,
        rng_seed=seed,
        el_enabled=cfg.el_enabled,
        answer_index=item.answer_index,
        warnings=template_warnings,
    )
