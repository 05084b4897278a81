"""Command-line front end: run datasets, export traces, check summaries.

Outputs are post-hoc artifacts: a run summary, one verification report per
item, and optional DOT exports. Re-running with identical flags, seed, and
warm caches reproduces every output byte for byte (no timestamps inside).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .backends import (
    CachedExtractor,
    FixtureEmbedder,
    FixtureExtractor,
    FixtureManifest,
    HttpConfig,
    HttpEmbedder,
    HttpExtractor,
)
from .errors import DatasetError, KgmcqError, TransportError
from .fixtures import fixture_path
from .pg_builder import load_dataset
from .scoring import SELECT_BY_RANDOM, PipelineConfig, VerificationReport, answer_item
from .trace import export_trace, safe_name
from .wiki import FixtureWiki, LiveWiki

logger = logging.getLogger(__name__)


def _dump(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def classify(report: VerificationReport) -> str:
    """Deterministic outcome class: correct / incorrect / unselectable.

    An item is unselectable when edge and node scores cannot single out an
    option; its random resolution still counts toward stochastic accuracy.
    """
    if report.selection_kind == SELECT_BY_RANDOM:
        return "unselectable"
    return "correct" if report.correct else "incorrect"


def summarize(reports: list[VerificationReport], config_echo: dict, dataset_digest: str) -> dict:
    per_category: dict[str, dict[str, int]] = {}
    stochastic_correct = 0
    for rep in reports:
        bucket = per_category.setdefault(
            rep.category,
            {"correct": 0, "incorrect": 0, "unselectable": 0, "stochastic_correct": 0, "total": 0},
        )
        bucket[classify(rep)] += 1
        bucket["total"] += 1
        if rep.correct:
            bucket["stochastic_correct"] += 1
            stochastic_correct += 1
    return {
        "schema_version": 1,
        "dataset_digest": dataset_digest,
        "config": config_echo,
        "total": len(reports),
        "stochastic_correct": stochastic_correct,
        "overall_accuracy": (stochastic_correct / len(reports)) if reports else 0.0,
        "deterministic": {
            "correct": sum(b["correct"] for b in per_category.values()),
            "incorrect": sum(b["incorrect"] for b in per_category.values()),
            "unselectable": sum(b["unselectable"] for b in per_category.values()),
        },
        "per_category": {k: per_category[k] for k in sorted(per_category)},
    }


def build_pipeline(args: argparse.Namespace) -> tuple[PipelineConfig, dict]:
    """Construct backends and wiki client from CLI flags and env overrides."""
    cache_dir = Path(
        args.cache_dir or os.environ.get("KGMCQ_CACHE_DIR") or Path.home() / ".cache" / "kgmcq"
    )
    fixtures = Path(args.fixtures) if args.fixtures else fixture_path()

    if args.backend == "fixture":
        manifest = FixtureManifest.load(fixtures / "manifest.json")
        extractor = FixtureExtractor(manifest)
        embedder = FixtureEmbedder(manifest)
    else:
        endpoint = args.endpoint or os.environ.get("KGMCQ_ENDPOINT")
        if not endpoint:
            raise KgmcqError("--endpoint (or KGMCQ_ENDPOINT) is required with --backend http")
        http_cfg = HttpConfig(endpoint=endpoint)
        extractor = HttpExtractor(http_cfg)
        health = extractor.health()  # surfaces unavailability before any work
        logger.info("inference service: %s", health)
        embedder = HttpEmbedder(http_cfg, dim=int(health.get("dim", 384)))

    extractor = CachedExtractor(extractor, cache_dir)

    wiki_mode = args.wiki
    if wiki_mode == "auto":
        wiki_mode = "fixture" if args.backend == "fixture" else "live"
    if wiki_mode == "fixture":
        # Strict lookups only in all-fixture runs; when a real extraction
        # backend produces open-ended labels the snapshot answers "no page".
        wiki = FixtureWiki.load(fixtures / "wiki.json", strict=(args.backend == "fixture"))
    else:
        wiki = LiveWiki(cache_dir=cache_dir)

    cfg = PipelineConfig(
        extractor=extractor,
        embedder=embedder,
        wiki=wiki,
        el_enabled=not args.no_el,
        fail_fast=args.strict,
        summary_cap=args.summary_cap,
        tau=args.tau,
    )
    echo = {
        "backend": args.backend,
        "wiki": wiki_mode,
        "el_enabled": not args.no_el,
        "seed": args.seed,
        "strict": args.strict,
        "summary_cap": args.summary_cap,
        "tau": args.tau,
    }
    if args.backend == "http":
        echo["endpoint"] = args.endpoint or os.environ.get("KGMCQ_ENDPOINT")
    return cfg, echo


def cmd_run(args: argparse.Namespace) -> int:
    try:
        items = load_dataset(args.dataset)
    except DatasetError as exc:
        print(f"dataset error: {exc}", file=sys.stderr)
        return 2
    try:
        cfg, echo = build_pipeline(args)
    except (TransportError, KgmcqError, OSError) as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return 3

    out = Path(args.out)
    (out / "reports").mkdir(parents=True, exist_ok=True)

    def run_one(item) -> VerificationReport:
        return answer_item(item, cfg, run_seed=args.seed)

    try:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(run_one, items))
    except KgmcqError as exc:
        print(f"evaluation error: {exc}", file=sys.stderr)
        return 3

    for rep in reports:
        _write_atomic(out / "reports" / f"{safe_name(rep.item_id)}.json", _dump(rep.to_obj()))
        if args.export_dot:
            export_trace(rep, out / "dot")

    digest = "sha256:" + hashlib.sha256(Path(args.dataset).read_bytes()).hexdigest()
    summary = summarize(reports, echo, digest)
    _write_atomic(out / "summary.json", _dump(summary))

    det = summary["deterministic"]
    print(f"{'category':<18} {'correct':>8} {'incorrect':>10} {'unselectable':>13} {'accuracy':>9}")
    for cat, b in summary["per_category"].items():
        acc = b["stochastic_correct"] / b["total"]
        print(f"{cat:<18} {b['correct']:>8} {b['incorrect']:>10} {b['unselectable']:>13} {acc:>8.1%}")
    print(
        f"overall: {summary['stochastic_correct']}/{summary['total']}"
        f" = {summary['overall_accuracy']:.1%}"
        f" (deterministic: {det['correct']} correct, {det['incorrect']} incorrect,"
        f" {det['unselectable']} unselectable)"
    )
    print(f"outputs written to {out}")
    return 0


def cmd_check(args: argparse.Namespace) -> int:
    """Recompute the summary from per-item reports and compare."""
    out = Path(args.out)
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    recomputed: dict[str, dict[str, int]] = {}
    stochastic = 0
    total = 0
    for path in sorted((out / "reports").glob("*.json")):
        rep = json.loads(path.read_text(encoding="utf-8"))
        cat = recomputed.setdefault(
            rep["category"],
            {"correct": 0, "incorrect": 0, "unselectable": 0, "stochastic_correct": 0, "total": 0},
        )
        if rep["selection_kind"] == SELECT_BY_RANDOM:
            cat["unselectable"] += 1
        elif rep["correct"]:
            cat["correct"] += 1
        else:
            cat["incorrect"] += 1
        if rep["correct"]:
            cat["stochastic_correct"] += 1
            stochastic += 1
        cat["total"] += 1
        total += 1

    problems = []
    if total != summary["total"]:
        problems.append(f"total: reports {total} vs summary {summary['total']}")
    if stochastic != summary["stochastic_correct"]:
        problems.append(
            f"stochastic_correct: reports {stochastic} vs summary {summary['stochastic_correct']}"
        )
    if recomputed != summary["per_category"]:
        problems.append("per-category breakdown differs")
    if problems:
        for p in problems:
            print(f"MISMATCH {p}", file=sys.stderr)
        return 1
    print(f"summary consistent with {total} reports")
    return 0


def cmd_trace(args: argparse.Namespace) -> int:
    raw = json.loads(Path(args.report).read_text(encoding="utf-8"))
    written = _trace_from_obj(raw, Path(args.out))
    print(f"wrote {len(written)} files to {args.out}")
    return 0


def _trace_from_obj(raw: dict, out: Path) -> list[Path]:
    """Rebuild DOT exports from a stored report JSON."""
    from .alignment import AlignedNode, Alignment
    from .graph import Label, triplet
    from .kg_builder import KgProvenance
    from .scoring import EdgeScore, OptionVerdict

    def to_trip(row):
        return triplet(row[0], row[1], row[2])

    verdicts = []
    for v in raw["options"]:
        verified = tuple((to_trip(e["pg"]), to_trip(e["projected"])) for e in v["verified"])
        unverified = tuple(to_trip(row) for row in v["unverified"])
        edge = EdgeScore(
            t=v["edge_score"],
            verified=verified,
            unverified=unverified,
            pg_size=v["pg_size"],
            kg_size=v["kg_size"],
            empty_pg=v["empty_pg"],
            projection_collapsed=v["projection_collapsed"],
        )
        alignment = Alignment(
            entries=tuple(
                AlignedNode(Label(a["source"]), Label(a["target"]), a["similarity"], a["kind"])
                for a in v["alignment"]
            )
        )
        verdicts.append(
            OptionVerdict(
                option_index=v["option_index"],
                option=v["option"],
                edge=edge,
                node=v["node_score"],
                alignment=alignment,
                provenance=KgProvenance(entries=()),
                warnings=tuple(v.get("warnings", ())),
            )
        )
    report = VerificationReport(
        item_id=raw["item_id"],
        category=raw["category"],
        verdicts=tuple(verdicts),
        chosen_index=raw["chosen_index"],
        selection_kind=raw["selection_kind"],
        tie_set=tuple(raw["tie_set"]),
        rng_seed=raw["rng_seed"],
        el_enabled=raw["el_enabled"],
        answer_index=raw["answer_index"],
        warnings=tuple(raw.get("warnings", ())),
    )
    return export_trace(report, out)


def cmd_paths(args: argparse.Namespace) -> int:
    print(fixture_path())
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kgmcq",
        description="Verify fill-in-the-blank options against a Wikipedia-derived knowledge graph",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evaluate a dataset and write summary + reports")
    run.add_argument("--dataset", required=True, help="dataset JSON file")
    run.add_argument("--backend", choices=["fixture", "http"], default="fixture")
    run.add_argument("--endpoint", default=None, help="inference service URL (http backend)")
    run.add_argument("--cache-dir", default=None, help="cache directory (env KGMCQ_CACHE_DIR)")
    run.add_argument("--seed", type=int, default=0, help="run seed for random tie-breaks")
    run.add_argument("--no-el", action="store_true", help="disable the entity-linking pass")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--export-dot", action="store_true", help="write DOT traces per item")
    run.add_argument("--strict", action="store_true", help="fail fast on per-node errors")
    run.add_argument("--wiki", choices=["auto", "fixture", "live"], default="auto")
    run.add_argument("--fixtures", default=None, help="fixture directory override")
    run.add_argument("--jobs", type=int, default=os.cpu_count() or 2)
    run.add_argument("--tau", type=float, default=0.0, help="minimum similarity for a match")
    run.add_argument("--summary-cap", type=int, default=1200)
    run.set_defaults(func=cmd_run)

    check = sub.add_parser("check", help="verify a summary against its per-item reports")
    check.add_argument("--out", required=True, help="output directory of a previous run")
    check.set_defaults(func=cmd_check)

    trace = sub.add_parser("trace", help="export DOT traces from a stored report")
    trace.add_argument("--report", required=True, help="verification report JSON")
    trace.add_argument("--out", required=True, help="output directory")
    trace.set_defaults(func=cmd_trace)

    paths = sub.add_parser("paths", help="print the bundled fixture directory")
    paths.set_defaults(func=cmd_paths)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("KGMCQ_LOG", "WARNING"))
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
