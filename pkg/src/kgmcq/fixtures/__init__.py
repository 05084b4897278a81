"""Bundled deterministic fixtures: extraction manifest, wiki snapshot, dataset."""

from pathlib import Path


def fixture_path() -> Path:
    """Directory holding the bundled fixture JSON files."""
    return Path(__file__).resolve().parent
