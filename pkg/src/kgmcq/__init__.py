"""Knowledge-graph verification of fill-in-the-blank multiple-choice questions."""

from .alignment import Alignment, align, residual_sets, solve_assignment
from .backends import (
    CachedExtractor,
    EmbeddingBackend,
    EmbeddingVector,
    ExtractionBackend,
    FixtureEmbedder,
    FixtureExtractor,
    FixtureManifest,
    HttpConfig,
    HttpEmbedder,
    HttpExtractor,
    cosine,
)
from .graph import (
    Label,
    RelationalGraph,
    Triplet,
    graph_union,
    intersect_count,
    normalize_label,
    project,
    substitute,
    triplet,
)
from .kg_builder import build_kg
from .linking import apply_linking, link_node
from .pg_builder import McqItem, PgTemplate, build_template, instantiate, load_dataset, render_question
from .scoring import (
    OptionVerdict,
    PipelineConfig,
    VerificationReport,
    answer_item,
    edge_score,
    node_score,
    select_answer,
)
from .wiki import ArticleSummary, FixtureWiki, LiveWiki

__version__ = "0.1.0"
