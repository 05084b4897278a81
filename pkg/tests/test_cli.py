import json
from pathlib import Path

import pytest

from kgmcq.cli import main


def run_cli(*argv):
    return main([str(a) for a in argv])


@pytest.fixture()
def fixture_dataset(fixtures_dir):
    return fixtures_dir / "dataset.json"


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


class TestRun:
    def test_fixture_run_summary(self, fixture_dataset, tmp_path):
        out = tmp_path / "out"
        code = run_cli(
            "run", "--dataset", fixture_dataset, "--backend", "fixture",
            "--seed", "7", "--out", out, "--cache-dir", tmp_path / "cache",
        )
        assert code == 0
        summary = read_json(out / "summary.json")
        assert summary["total"] == 5
        assert summary["stochastic_correct"] == 4
        assert summary["overall_accuracy"] == pytest.approx(0.8)
        assert summary["deterministic"] == {"correct": 4, "incorrect": 0, "unselectable": 1}
        assert summary["per_category"]["Mathematics"]["unselectable"] == 1
        assert summary["per_category"]["Art & Music"]["correct"] == 1
        assert summary["config"]["seed"] == 7
        assert summary["dataset_digest"].startswith("sha256:")
        reports = sorted((out / "reports").glob("*.json"))
        assert len(reports) == 5

    def test_reports_self_describing(self, fixture_dataset, tmp_path):
        out = tmp_path / "out"
        run_cli("run", "--dataset", fixture_dataset, "--seed", "7", "--out", out,
                "--cache-dir", tmp_path / "cache")
        rep = read_json(out / "reports" / "art-starry-night.json")
        assert rep["chosen_index"] == 0
        assert rep["selection_kind"] == "edge"
        assert len(rep["options"]) == 4
        assert rep["options"][0]["edge_score"] == 1.0
        assert rep["options"][0]["provenance"]

    def test_category_counts_sum_to_total(self, fixture_dataset, tmp_path):
        out = tmp_path / "out"
        run_cli("run", "--dataset", fixture_dataset, "--seed", "3", "--out", out,
                "--cache-dir", tmp_path / "cache")
        summary = read_json(out / "summary.json")
        assert sum(b["total"] for b in summary["per_category"].values()) == summary["total"]

    def test_invalid_dataset_exit_code(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("[]")
        assert run_cli("run", "--dataset", bad, "--out", tmp_path / "out") == 2

    def test_unreachable_http_backend_exit_code(self, fixture_dataset, tmp_path):
        code = run_cli(
            "run", "--dataset", fixture_dataset, "--backend", "http",
            "--endpoint", "http://127.0.0.1:9", "--out", tmp_path / "out",
            "--cache-dir", tmp_path / "cache",
        )
        assert code == 3

    def test_no_el_recorded_and_equivalent_here(self, fixture_dataset, tmp_path):
        out_el = tmp_path / "el"
        out_no = tmp_path / "noel"
        run_cli("run", "--dataset", fixture_dataset, "--seed", "7", "--out", out_el,
                "--cache-dir", tmp_path / "c1")
        run_cli("run", "--dataset", fixture_dataset, "--seed", "7", "--no-el", "--out", out_no,
                "--cache-dir", tmp_path / "c2")
        s_el, s_no = read_json(out_el / "summary.json"), read_json(out_no / "summary.json")
        assert s_el["config"]["el_enabled"] is True
        assert s_no["config"]["el_enabled"] is False
        # this corpus still resolves every item without linking
        assert s_el["per_category"] == s_no["per_category"]


class TestDeterminism:
    def test_two_runs_byte_identical(self, fixture_dataset, tmp_path):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            run_cli("run", "--dataset", fixture_dataset, "--seed", "7", "--out", out,
                    "--export-dot", "--cache-dir", tmp_path / "shared-cache")
            outs.append(out)
        a, b = outs
        files_a = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
        files_b = sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
        assert files_a == files_b
        for rel in files_a:
            assert (a / rel).read_bytes() == (b / rel).read_bytes(), rel


class TestCheck:
    def test_consistent_run_passes(self, fixture_dataset, tmp_path):
        out = tmp_path / "out"
        run_cli("run", "--dataset", fixture_dataset, "--seed", "7", "--out", out,
                "--cache-dir", tmp_path / "cache")
        assert run_cli("check", "--out", out) == 0

    def test_tampered_report_detected(self, fixture_dataset, tmp_path):
        out = tmp_path / "out"
        run_cli("run", "--dataset", fixture_dataset, "--seed", "7", "--out", out,
                "--cache-dir", tmp_path / "cache")
        victim = out / "reports" / "literature-moby-dick.json"
        rep = read_json(victim)
        rep["correct"] = not rep["correct"]
        victim.write_text(json.dumps(rep), encoding="utf-8")
        assert run_cli("check", "--out", out) == 1


class TestDotExport:
    def test_solid_dashed_split(self, fixture_dataset, tmp_path):
        out = tmp_path / "out"
        run_cli("run", "--dataset", fixture_dataset, "--seed", "7", "--out", out,
                "--export-dot", "--cache-dir", tmp_path / "cache")
        winner = (out / "dot" / "art-starry-night_option0.dot").read_text()
        loser = (out / "dot" / "art-starry-night_option3.dot").read_text()
        assert winner.count("style=solid") == 3 and winner.count("style=dashed") == 0
        assert loser.count("style=solid") == 1 and loser.count("style=dashed") == 2

    def test_empty_pg_placeholder_node(self, fixture_dataset, tmp_path):
        out = tmp_path / "out"
        run_cli("run", "--dataset", fixture_dataset, "--seed", "7", "--out", out,
                "--export-dot", "--cache-dir", tmp_path / "cache")
        empty = (out / "dot" / "math-square-of-three_option0.dot").read_text()
        assert "empty propositional graph" in empty
        assert "->" not in empty

    def test_sidecar_lists_kg_triplets_used(self, fixture_dataset, tmp_path):
        out = tmp_path / "out"
        run_cli("run", "--dataset", fixture_dataset, "--seed", "7", "--out", out,
                "--export-dot", "--cache-dir", tmp_path / "cache")
        sidecar = read_json(out / "dot" / "art-starry-night_verification.json")
        used = sidecar["options"][0]["kg_triplets_used"]
        assert ["The Starry Night", "creator", "Vincent van Gogh"] in used


class TestTraceSubcommand:
    def test_trace_from_stored_report_matches_run_export(self, fixture_dataset, tmp_path):
        out = tmp_path / "out"
        run_cli("run", "--dataset", fixture_dataset, "--seed", "7", "--out", out,
                "--export-dot", "--cache-dir", tmp_path / "cache")
        redone = tmp_path / "redone"
        assert run_cli("trace", "--report", out / "reports" / "art-starry-night.json",
                       "--out", redone) == 0
        for i in range(4):
            name = f"art-starry-night_option{i}.dot"
            assert (redone / name).read_bytes() == (out / "dot" / name).read_bytes()


class TestPaths:
    def test_paths_prints_fixture_dir(self, capsys):
        assert run_cli("paths") == 0
        printed = capsys.readouterr().out.strip()
        assert (Path(printed) / "dataset.json").exists()
