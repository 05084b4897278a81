"""Traceability exports: per-option DOT graphs and a verification sidecar.

Verified edges render solid, unverified edges dashed, so the difference
between the chosen option and the rejected ones is visible at a glance.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

from .graph import PLACEHOLDER
from .scoring import VerificationReport

#: The placeholder confuses DOT tooling and shell quoting; exports mask it.
MASK = "⟨MASK⟩"

_ID_SAFE = re.compile(r"[^A-Za-z0-9._-]+")


def display_label(raw: str) -> str:
    return MASK if raw.strip() == PLACEHOLDER else raw


def _quote(raw: str) -> str:
    return '"' + display_label(raw).replace("\\", "\\\\").replace('"', '\\"') + '"'


def safe_name(raw: str) -> str:
    return _ID_SAFE.sub("_", raw).strip("_") or "item"


def option_dot(report: VerificationReport, index: int) -> str:
    """DOT source for one option's propositional graph."""
    verdict = report.verdicts[index]
    lines = [
        f"digraph {json.dumps(f'option_{index}')} {{",
        "  rankdir=LR;",
        f"  label={_quote(f'{report.item_id} / option {index}: {verdict.option} (T={verdict.edge.t:.4f}, N={verdict.node:.4f})')};",
        "  node [shape=box, style=rounded];",
    ]
    if verdict.edge.pg_size == 0:
        lines.append(
            f"  {_quote('(empty propositional graph)')} [shape=plaintext, fontcolor=gray];"
        )
    else:
        for pg_t, _ in verdict.edge.verified:
            lines.append(
                f"  {_quote(pg_t.subject.raw)} -> {_quote(pg_t.object.raw)}"
                f" [label={_quote(pg_t.relation.raw)}, style=solid];"
            )
        for pg_t in verdict.edge.unverified:
            lines.append(
                f"  {_quote(pg_t.subject.raw)} -> {_quote(pg_t.object.raw)}"
                f" [label={_quote(pg_t.relation.raw)}, style=dashed];"
            )
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_trace(report: VerificationReport, out_dir: str | Path) -> list[Path]:
    """Write one DOT file per option plus the verification sidecar JSON.

    The sidecar lists, per option, the knowledge-graph triplets that
    verified propositional edges, and the node alignment used.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = safe_name(report.item_id)
    written: list[Path] = []
    for i in range(4):
        path = out / f"{stem}_option{i}.dot"
        path.write_text(option_dot(report, i), encoding="utf-8")
        written.append(path)

    sidecar = {
        "item_id": report.item_id,
        "chosen_index": report.chosen_index,
        "selection_kind": report.selection_kind,
        "options": [
            {
                "option_index": v.option_index,
                "option": v.option,
                "edge_score": v.edge.t,
                "node_score": v.node,
                "kg_triplets_used": [
                    [display_label(p.subject.raw), p.relation.raw, display_label(p.object.raw)]
                    for _, p in v.edge.verified
                ],
                "alignment": v.alignment.to_obj(),
            }
            for v in report.verdicts
        ],
    }
    sidecar_path = out / f"{stem}_verification.json"
    sidecar_path.write_text(
        json.dumps(sidecar, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    written.append(sidecar_path)
    return written
