"""Node correspondence between propositional and knowledge graphs.

Nodes with identical (normalized) labels map to themselves. The residual
node sets are matched by maximum-weight bipartite assignment over pairwise
label similarities; leftover propositional nodes self-map with similarity
contribution zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .backends import EmbeddingBackend
from .graph import Label

_TIE_TOL = 1e-9


@dataclass(frozen=True)
class AlignedNode:
    source: Label
    target: Label
    similarity: float  # contribution: exact 1.0, matched cosine, unmatched 0.0
    kind: str  # exact | matched | unmatched

    def to_obj(self) -> dict:
        return {
            "source": self.source.raw,
            "target": self.target.raw,
            "similarity": self.similarity,
            "kind": self.kind,
        }


@dataclass(frozen=True)
class Alignment:
    entries: tuple[AlignedNode, ...]

    @property
    def node_map(self) -> dict[str, Label]:
        return {e.source.norm: e.target for e in self.entries}

    @property
    def total_similarity(self) -> float:
        return sum(e.similarity for e in self.entries)

    def to_obj(self) -> list[dict]:
        return [e.to_obj() for e in self.entries]

    @classmethod
    def identity(cls, nodes: Iterable[Label]) -> "Alignment":
        return cls(tuple(AlignedNode(n, n, 1.0, "exact") for n in nodes))


def residual_sets(
    pg_nodes: Iterable[Label], kg_nodes: Iterable[Label]
) -> tuple[tuple[Label, ...], tuple[Label, ...]]:
    """Nodes of each side without a perfectly matching label on the other."""
    pg_by_norm = {n.norm: n for n in pg_nodes}
    kg_by_norm = {n.norm: n for n in kg_nodes}
    vp = tuple(pg_by_norm[k] for k in sorted(pg_by_norm) if k not in kg_by_norm)
    vk = tuple(kg_by_norm[k] for k in sorted(kg_by_norm) if k not in pg_by_norm)
    return vp, vk


@dataclass(frozen=True)
class WeightMatrix:
    rows: tuple[Label, ...]
    cols: tuple[Label, ...]
    weights: tuple[tuple[float, ...], ...]


def _assign_min_cost(cost: list[list[float]]) -> list[int]:
    """Exact assignment minimizing total cost; requires rows <= cols.

    Potentials-based augmenting-path method, O(rows^2 * cols), correct for
    arbitrary real costs. Returns col index per row.
    """
    n, m = len(cost), len(cost[0])
    inf = float("inf")
    u = [0.0] * (n + 1)
    v = [0.0] * (m + 1)
    match_col = [0] * (m + 1)  # 1-based row matched to each col, 0 = free
    way = [0] * (m + 1)
    for i in range(1, n + 1):
        match_col[0] = i
        j0 = 0
        minv = [inf] * (m + 1)
        used = [False] * (m + 1)
        while True:
            used[j0] = True
            i0 = match_col[j0]
            delta = inf
            j1 = 0
            for j in range(1, m + 1):
                if used[j]:
                    continue
                cur = cost[i0 - 1][j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(m + 1):
                if used[j]:
                    u[match_col[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if match_col[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            match_col[j0] = match_col[j1]
            j0 = j1
    result = [-1] * n
    for j in range(1, m + 1):
        if match_col[j]:
            result[match_col[j] - 1] = j - 1
    return result


def _optimal_total(w: Sequence[Sequence[float]], rows: list[int], cols: list[int]) -> float:
    """Maximum total weight of a matching of size min(|rows|, |cols|)."""
    if not rows or not cols:
        return 0.0
    if len(rows) <= len(cols):
        cost = [[-w[r][c] for c in cols] for r in rows]
    else:
        cost = [[-w[r][c] for r in rows] for c in cols]
    assign = _assign_min_cost(cost)
    return -sum(cost[i][j] for i, j in enumerate(assign))


def solve_assignment(w: Sequence[Sequence[float]]) -> list[tuple[int, int]]:
    """Maximum-weight matching of size min(rows, cols).

    Among equal-weight optima the lexicographically smallest matching by
    (row index, col index) is returned: each row in order is pinned to the
    lowest column that still allows an optimal completion. Ties compare
    within an absolute tolerance of 1e-9.
    """
    n_rows = len(w)
    n_cols = len(w[0]) if n_rows else 0
    if n_rows == 0 or n_cols == 0:
        return []

    best = _optimal_total(w, list(range(n_rows)), list(range(n_cols)))
    pairs: list[tuple[int, int]] = []
    fixed = 0.0
    cols_left = list(range(n_cols))
    for r in range(n_rows):
        rows_after = list(range(r + 1, n_rows))
        placed = False
        for c in cols_left:
            rest = [x for x in cols_left if x != c]
            # matching must stay full-size on the smaller side
            if len(pairs) + 1 + min(len(rows_after), len(rest)) < min(n_rows, n_cols):
                continue
            total = fixed + w[r][c] + _optimal_total(w, rows_after, rest)
            if total >= best - _TIE_TOL:
                pairs.append((r, c))
                fixed += w[r][c]
                cols_left.remove(c)
                placed = True
                break
        if not placed:
            # row stays unmatched; legal only when rows outnumber columns
            continue
        if len(pairs) == min(n_rows, n_cols):
            break
    return pairs


def matching_weight(w: Sequence[Sequence[float]], pairs: Iterable[tuple[int, int]]) -> float:
    return sum(w[r][c] for r, c in sorted(pairs))


def align(
    pg_nodes: Iterable[Label],
    kg_nodes: Iterable[Label],
    embedder: EmbeddingBackend,
    tau: float | None = 0.0,
) -> Alignment:
    """Full correspondence: exact identities plus residual assignment.

    Matched pairs with similarity below `tau` are demoted to unmatched
    (self-target, zero contribution); tau=None disables the threshold.
    Embeddings for all residual labels go through one batched call.
    """
    pg_by_norm = {n.norm: n for n in pg_nodes}
    kg_norms = {n.norm for n in kg_nodes}
    entries: list[AlignedNode] = []

    for k in sorted(pg_by_norm):
        if k in kg_norms:
            n = pg_by_norm[k]
            entries.append(AlignedNode(n, n, 1.0, "exact"))

    vp, vk = residual_sets(pg_by_norm.values(), kg_nodes)
    matched_rows: dict[int, tuple[int, float]] = {}
    if vp and vk:
        weights = embedder.similarity_matrix([n.raw for n in vp], [n.raw for n in vk])
        for r, c in solve_assignment(weights):
            sim = weights[r][c]
            if tau is None or sim >= tau:
                matched_rows[r] = (c, sim)

    for r, node in enumerate(vp):
        if r in matched_rows:
            c, sim = matched_rows[r]
            entries.append(AlignedNode(node, vk[c], sim, "matched"))
        else:
            entries.append(AlignedNode(node, node, 0.0, "unmatched"))

    entries.sort(key=lambda e: e.source.norm)
    return Alignment(entries=tuple(entries))
