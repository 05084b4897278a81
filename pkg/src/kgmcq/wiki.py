"""MediaWiki API client: title search and lead-section summaries.

Two modes share one interface: a live client with a persistent on-disk cache
(negative results included) and an offline fixture client reading a recorded
snapshot. The fixture client performs zero network operations.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

import requests

from .errors import MissingFixtureError, NotFoundError, TransportError
from .graph import _normalize

logger = logging.getLogger(__name__)

DEFAULT_ENDPOINT = "https://en.wikipedia.org/w/api.php"
DEFAULT_USER_AGENT = "kgmcq/0.1 (knowledge-graph MCQ verification)"
SEARCH_PROFILE = "mediawiki-default-search"


@dataclass(frozen=True)
class ArticleSummary:
    """Lead-section plain text of one article (no named sections)."""

    title: str
    summary: str
    fetched_at: str | None
    source: str  # live | cache | fixture


class WikiClient(ABC):
    @abstractmethod
    def search_title(self, query: str) -> str | None:
        """Most relevant page title for the query, or None if no page found."""

    @abstractmethod
    def get_summary(self, title: str) -> ArticleSummary:
        """Lead-section text; raises NotFoundError for missing pages."""


class FixtureWiki(WikiClient):
    """Snapshot-backed client for offline runs.

    strict=True (default) raises on queries outside the snapshot, keeping
    fixture runs total. strict=False treats unknown queries as "no page",
    which lets the snapshot stand in for live Wikipedia.
    """

    def __init__(self, obj: dict, strict: bool = True) -> None:
        self._titles = {_normalize(k): v for k, v in obj.get("titles", {}).items()}
        self._summaries = dict(obj.get("summaries", {}))
        self.strict = strict
        self.calls = 0  # diagnostic counter, handy in tests

    @classmethod
    def load(cls, path: str | Path, strict: bool = True) -> "FixtureWiki":
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh), strict=strict)

    def search_title(self, query: str) -> str | None:
        if not query or not query.strip():
            raise ValueError("search query must be non-empty")
        self.calls += 1
        key = _normalize(query)
        if key not in self._titles:
            if self.strict:
                raise MissingFixtureError(f"no fixture title entry for query {query!r}")
            return None
        return self._titles[key]

    def get_summary(self, title: str) -> ArticleSummary:
        self.calls += 1
        if title not in self._summaries:
            raise NotFoundError(f"no fixture article for title {title!r}")
        return ArticleSummary(title=title, summary=self._summaries[title], fetched_at=None, source="fixture")


Transport = Callable[[dict], dict]


def _requests_transport(endpoint: str, user_agent: str, timeout: float) -> Transport:
    session = requests.Session()

    def call(params: dict) -> dict:
        try:
            resp = session.get(
                endpoint,
                params={**params, "format": "json", "formatversion": "2"},
                headers={"User-Agent": user_agent},
                timeout=timeout,
            )
            if resp.status_code != 200:
                raise TransportError(f"wikipedia API returned HTTP {resp.status_code}")
            return resp.json()
        except requests.RequestException as exc:
            raise TransportError(f"wikipedia API unreachable: {exc}") from exc

    return call


def failing_transport(params: dict) -> dict:
    """Transport that refuses to be used; asserts zero-network invariants."""
    raise AssertionError(f"unexpected network call with params {params!r}")


class LiveWiki(WikiClient):
    """Action API client with a one-file-per-key JSON cache.

    Cache keys are (endpoint kind, normalized query); negative search results
    are cached too, since the four options repeatedly miss the same labels.
    Duplicate in-flight fetches for one key are coalesced via per-key locks.
    """

    def __init__(
        self,
        cache_dir: str | Path,
        endpoint: str | None = None,
        user_agent: str = DEFAULT_USER_AGENT,
        timeout: float = 15.0,
        transport: Transport | None = None,
    ) -> None:
        self.endpoint = endpoint or os.environ.get("KGMCQ_WIKI_ENDPOINT", DEFAULT_ENDPOINT)
        self._transport = transport or _requests_transport(self.endpoint, user_agent, timeout)
        self._root = Path(cache_dir) / "wiki"
        (self._root / "search").mkdir(parents=True, exist_ok=True)
        (self._root / "summary").mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._key_locks: dict[str, threading.Lock] = {}

    def _key_lock(self, name: str) -> threading.Lock:
        with self._lock:
            return self._key_locks.setdefault(name, threading.Lock())

    def _cache_path(self, kind: str, key: str) -> Path:
        digest = hashlib.sha256(key.encode("utf-8")).hexdigest()[:24]
        return self._root / kind / f"{digest}.json"

    @staticmethod
    def _read(path: Path) -> dict | None:
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    @staticmethod
    def _write(path: Path, obj: dict) -> None:
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(obj, ensure_ascii=False, sort_keys=True), encoding="utf-8")
        os.replace(tmp, path)

    @staticmethod
    def _now() -> str:
        return datetime.now(timezone.utc).isoformat(timespec="seconds")

    def search_title(self, query: str) -> str | None:
        if not query or not query.strip():
            raise ValueError("search query must be non-empty")
        key = _normalize(query)
        path = self._cache_path("search", key)
        with self._key_lock(str(path)):
            cached = self._read(path)
            if cached is not None:
                return cached["title"]
            body = self._transport(
                {"action": "query", "list": "search", "srsearch": query, "srlimit": "1"}
            )
            hits = body.get("query", {}).get("search", [])
            title = hits[0]["title"] if hits else None
            self._write(
                path,
                {
                    "query": query,
                    "query_norm": key,
                    "title": title,
                    "profile": SEARCH_PROFILE,
                    "fetched_at": self._now(),
                },
            )
            return title

    def get_summary(self, title: str) -> ArticleSummary:
        key = _normalize(title)
        path = self._cache_path("summary", key)
        with self._key_lock(str(path)):
            cached = self._read(path)
            if cached is not None:
                if not cached.get("found", False):
                    raise NotFoundError(f"page {title!r} does not exist (cached)")
                return ArticleSummary(
                    title=cached["title"],
                    summary=cached["summary"],
                    fetched_at=cached.get("fetched_at"),
                    source="cache",
                )
            # exintro limits the extract to the lead, before any section heading
            body = self._transport(
                {
                    "action": "query",
                    "prop": "extracts",
                    "explaintext": "1",
                    "exintro": "1",
                    "redirects": "1",
                    "titles": title,
                }
            )
            pages = body.get("query", {}).get("pages", [])
            page = pages[0] if pages else {}
            fetched = self._now()
            if not page or page.get("missing") or "extract" not in page:
                self._write(path, {"title": title, "found": False, "fetched_at": fetched})
                raise NotFoundError(f"page {title!r} does not exist")
            summary = page["extract"].strip()
            self._write(
                path,
                {
                    "title": page.get("title", title),
                    "summary": summary,
                    "found": True,
                    "fetched_at": fetched,
                },
            )
            return ArticleSummary(
                title=page.get("title", title), summary=summary, fetched_at=fetched, source="live"
            )
