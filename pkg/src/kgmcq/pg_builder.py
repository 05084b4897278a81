"""Question model and propositional-graph template construction.

A question template carries exactly one "{x}" blank and four options. The
propositional-graph template is the union over all four options of the
extraction of the filled-in sentence, with the option node replaced by the
reserved placeholder "#" so every option instantiates an isomorphic graph.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .backends import ExtractionBackend
from .errors import BuildError, DatasetError, KgmcqError
from .graph import PLACEHOLDER, RelationalGraph, _normalize, substitute_with_mode

logger = logging.getLogger(__name__)

BLANK = "{x}"


@dataclass(frozen=True)
class McqItem:
    """One fill-in-the-blank question with four options."""

    id: str
    category: str
    template: str
    options: tuple[str, str, str, str]
    answer_index: int

    def __post_init__(self) -> None:
        if self.template.count(BLANK) != 1:
            raise DatasetError(
                f"item {self.id!r}: template must contain exactly one {BLANK!r} blank"
            )
        if len(self.options) != 4:
            raise DatasetError(f"item {self.id!r}: exactly 4 options required")
        if any(not o or not o.strip() for o in self.options):
            raise DatasetError(f"item {self.id!r}: options must be non-empty")
        norms = {_normalize(o) for o in self.options}
        if len(norms) != 4:
            raise DatasetError(f"item {self.id!r}: options must be distinct")
        if PLACEHOLDER in norms:
            raise DatasetError(f"item {self.id!r}: {PLACEHOLDER!r} is a reserved symbol")
        if not 0 <= self.answer_index <= 3:
            raise DatasetError(f"item {self.id!r}: answer_index must be in [0, 3]")


def load_dataset(path: str | Path) -> list[McqItem]:
    """Load and validate a dataset file (JSON array of question objects).

    Syntax errors carry the parser's line/column; semantic errors name the
    offending item by position and id.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        rows = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}") from exc
    if not isinstance(rows, list) or not rows:
        raise DatasetError(f"{path}: dataset must be a non-empty JSON array")
    items = []
    seen_ids: set[str] = set()
    for i, row in enumerate(rows):
        where = f"{path}: item {i} (id={row.get('id', '?')!r})" if isinstance(row, dict) else f"{path}: item {i}"
        if not isinstance(row, dict):
            raise DatasetError(f"{where}: expected an object")
        missing = {"id", "category", "question", "options", "answer_index"} - row.keys()
        if missing:
            raise DatasetError(f"{where}: missing fields {sorted(missing)}")
        try:
            item = McqItem(
                id=str(row["id"]),
                category=str(row["category"]),
                template=str(row["question"]),
                options=tuple(str(o) for o in row["options"]),
                answer_index=int(row["answer_index"]),
            )
        except (TypeError, ValueError) as exc:
            raise DatasetError(f"{where}: {exc}") from exc
        if item.id in seen_ids:
            raise DatasetError(f"{where}: duplicate id")
        seen_ids.add(item.id)
        items.append(item)
    return items


def render_question(item: McqItem, option_index: int) -> str:
    """The template with the blank filled by the indexed option."""
    return item.template.replace(BLANK, item.options[option_index])


@dataclass(frozen=True)
class PgTemplate:
    """Union of per-option extractions with the option node masked as "#"."""

    graph: RelationalGraph
    per_option_warnings: tuple[tuple[str, str], ...] = ()


def build_template(item: McqItem, extractor: ExtractionBackend) -> PgTemplate:
    """Extract each filled-in sentence, mask the option, union the results.

    Options whose substitution was a no-op (option string absent from the
    extraction) still contribute their graph, with a warning recorded.
    """
    sentences = [render_question(item, i) for i in range(4)]
    with ThreadPoolExecutor(max_workers=4) as pool:
        futures = [pool.submit(extractor.extract, s) for s in sentences]
        graphs: list[RelationalGraph] = []
        for i, fut in enumerate(futures):
            try:
                graphs.append(fut.result())
            except KgmcqError as exc:
                raise BuildError(
                    f"item {item.id!r}: extraction failed for option {item.options[i]!r}: {exc}"
                ) from exc

    warnings: list[tuple[str, str]] = []
    surrounding = _normalize(item.template.replace(BLANK, " "))
    union = RelationalGraph.empty()
    for option, g in zip(item.options, graphs):
        if any(lab.norm == PLACEHOLDER for lab in g.nodes()):
            raise BuildError(
                f"item {item.id!r}: extraction produced the reserved symbol {PLACEHOLDER!r}"
            )
        if _normalize(option) in surrounding:
            # the option also occurs outside the blank; every whole-label
            # match gets masked, which may over-substitute
            warnings.append((option, "option string also occurs outside the blank"))
        if len(g) == 0:
            warnings.append((option, "extraction returned no relations"))
            continue
        masked, mode = substitute_with_mode(g, option, PLACEHOLDER)
        if mode == "none":
            warnings.append((option, "option string absent from extraction; substitution was a no-op"))
        elif mode == "substring":
            warnings.append((option, "option matched only as a substring of a longer span"))
        union = union.union(masked)
    return PgTemplate(graph=union, per_option_warnings=tuple(warnings))


def instantiate(tmpl: PgTemplate, option: str) -> RelationalGraph:
    """Substitute the placeholder back with a concrete option.

    The placeholder only ever occurs as a whole node, so no substring
    fallback applies; a template without "#" instantiates to itself.
    """
    return substitute_with_mode(tmpl.graph, PLACEHOLDER, option, substring_fallback=False)[0]
