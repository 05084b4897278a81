"""Immutable labeled-triplet graph with set algebra, substitution and projection.

Graphs are plain values: every operation returns a new graph, so they can be
shared between threads without locks. Triplet identity is defined on the
normalized form of all three labels; raw spellings are preserved for output.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .errors import IncompleteAlignmentError, InvalidLabelError

_WS = re.compile(r"\s+")

#: Reserved placeholder node used by propositional-graph templates.
PLACEHOLDER = "#"


def _normalize(raw: str) -> str:
    return _WS.sub(" ", raw.strip()).casefold()


@dataclass(frozen=True, eq=False)
class Label:
    """A node or relation label: raw spelling plus canonical form.

    Equality and hashing use only the canonical form, so labels that differ
    in case or whitespace compare equal.
    """

    raw: str
    norm: str = field(init=False)

    def __post_init__(self) -> None:
        norm = _normalize(self.raw)
        if not norm:
            raise InvalidLabelError(f"label is empty or whitespace-only: {self.raw!r}")
        object.__setattr__(self, "norm", norm)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Label):
            return NotImplemented
        return self.norm == other.norm

    def __hash__(self) -> int:
        return hash(self.norm)

    def __repr__(self) -> str:
        return f"Label({self.raw!r})"


def normalize_label(raw: str) -> Label:
    """Build a Label from raw text; idempotent on already-normalized input."""
    return Label(raw)


@dataclass(frozen=True, eq=False)
class Triplet:
    """Directed labeled edge (subject, relation, object)."""

    subject: Label
    relation: Label
    object: Label

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.subject.norm, self.relation.norm, self.object.norm)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Triplet):
            return NotImplemented
        return self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        return f"({self.subject.raw!r}, {self.relation.raw!r}, {self.object.raw!r})"


def triplet(subject: str, relation: str, object: str) -> Triplet:
    """Convenience constructor from raw strings."""
    return Triplet(Label(subject), Label(relation), Label(object))


class RelationalGraph:
    """A finite set of triplets with set semantics under label normalization.

    Duplicate insertion keeps the first occurrence, so which raw spelling
    survives a union is deterministic (left operand wins).
    """

    __slots__ = ("_set", "_sorted")

    def __init__(self, triplets: Iterable[Triplet] = ()) -> None:
        self._set = frozenset(triplets)
        self._sorted = tuple(sorted(self._set, key=lambda t: t.key))

    @classmethod
    def from_raw(cls, rows: Iterable[tuple[str, str, str]]) -> "RelationalGraph":
        return cls(triplet(s, r, o) for s, r, o in rows)

    @classmethod
    def empty(cls) -> "RelationalGraph":
        return cls()

    # -- set algebra ---------------------------------------------------

    def union(self, other: "RelationalGraph") -> "RelationalGraph":
        return RelationalGraph(self._sorted + other._sorted)

    __or__ = union

    def intersect_count(self, other: "RelationalGraph") -> int:
        """|self ∩ other| under normalized, direction-sensitive equality."""
        small, large = sorted((self._set, other._set), key=len)
        return sum(1 for t in small if t in large)

    def __contains__(self, t: Triplet) -> bool:
        return t in self._set

    def __len__(self) -> int:
        return len(self._set)

    def __iter__(self) -> Iterator[Triplet]:
        return iter(self._sorted)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RelationalGraph):
            return NotImplemented
        return self._set == other._set

    def __hash__(self) -> int:
        return hash(self._set)

    def __repr__(self) -> str:
        return f"RelationalGraph({list(self._sorted)!r})"

    @property
    def triplets(self) -> tuple[Triplet, ...]:
        """Triplets sorted by normalized key; stable across processes."""
        return self._sorted

    def nodes(self) -> tuple[Label, ...]:
        """Distinct node labels (subjects and objects), sorted by norm."""
        seen: dict[str, Label] = {}
        for t in self._sorted:
            for lab in (t.subject, t.object):
                seen.setdefault(lab.norm, lab)
        return tuple(seen[k] for k in sorted(seen))

    # -- substitution and projection ------------------------------------

    def substitute(self, frm: Label | str, to: Label | str) -> "RelationalGraph":
        """Replace node labels equal to `frm` with `to`; relations untouched."""
        return substitute_with_mode(self, frm, to)[0]

    def project(self, phi: Mapping[str, Label] | object) -> "RelationalGraph":
        """Rewrite every node through the alignment mapping.

        `phi` is a mapping from node norm to target Label, or any object
        exposing such a mapping as `.node_map` (an Alignment does).
        """
        node_map = getattr(phi, "node_map", phi)
        out = []
        for t in self._sorted:
            try:
                s = node_map[t.subject.norm]
                o = node_map[t.object.norm]
            except KeyError as exc:
                raise IncompleteAlignmentError(
                    f"alignment does not cover node {exc.args[0]!r}"
                ) from None
            out.append(Triplet(s, t.relation, o))
        return RelationalGraph(out)

    # -- serialization ---------------------------------------------------

    def to_obj(self) -> list[dict[str, str]]:
        """Canonical list form, sorted by (subject.norm, relation.norm, object.norm)."""
        return [
            {"subject": t.subject.raw, "relation": t.relation.raw, "object": t.object.raw}
            for t in self._sorted
        ]

    def to_json(self) -> str:
        return json.dumps(self.to_obj(), ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_obj(cls, rows: Iterable[Mapping[str, str]]) -> "RelationalGraph":
        return cls.from_raw((r["subject"], r["relation"], r["object"]) for r in rows)

    @classmethod
    def from_json(cls, text: str) -> "RelationalGraph":
        return cls.from_obj(json.loads(text))


def graph_union(g1: RelationalGraph, g2: RelationalGraph) -> RelationalGraph:
    return g1.union(g2)


def intersect_count(g1: RelationalGraph, g2: RelationalGraph) -> int:
    return g1.intersect_count(g2)


def project(g: RelationalGraph, phi: Mapping[str, Label] | object) -> RelationalGraph:
    return g.project(phi)


def identity_map(g: RelationalGraph) -> dict[str, Label]:
    """Identity alignment over the graph's own nodes."""
    return {lab.norm: lab for lab in g.nodes()}


def substitute(g: RelationalGraph, frm: Label | str, to: Label | str) -> RelationalGraph:
    return substitute_with_mode(g, frm, to)[0]


def substitute_with_mode(
    g: RelationalGraph,
    frm: Label | str,
    to: Label | str,
    substring_fallback: bool = True,
) -> tuple[RelationalGraph, str]:
    """Substitute and report how the match was made.

    Returns (graph, mode) where mode is:
      "exact"     - at least one node label equaled `frm`
      "substring" - no exact node match; `frm` replaced as a whole-word
                    substring inside node labels
      "none"      - `frm` absent entirely; graph returned unchanged

    Only node labels are rewritten; relation labels never are.
    """
    frm_l = frm if isinstance(frm, Label) else Label(frm)
    to_l = to if isinstance(to, Label) else Label(to)

    def exact(lab: Label) -> Label:
        return to_l if lab.norm == frm_l.norm else lab

    if any(lab.norm == frm_l.norm for lab in g.nodes()):
        return (
            RelationalGraph(
                Triplet(exact(t.subject), t.relation, exact(t.object)) for t in g
            ),
            "exact",
        )

    if not substring_fallback:
        return g, "none"

    # Fallback: the option may be embedded in a longer extracted span.
    pattern = re.compile(
        r"(?<!\w)" + r"\s+".join(re.escape(tok) for tok in frm_l.norm.split()) + r"(?!\w)",
        re.IGNORECASE,
    )

    def inner(lab: Label) -> Label:
        new_raw, n = pattern.subn(to_l.raw, _WS.sub(" ", lab.raw.strip()))
        return Label(new_raw) if n else lab

    hit = any(pattern.search(_WS.sub(" ", lab.raw.strip())) for lab in g.nodes())
    if not hit:
        return g, "none"
    return (
        RelationalGraph(Triplet(inner(t.subject), t.relation, inner(t.object)) for t in g),
        "substring",
    )
