"""Relation-extraction and sentence-embedding backends.

Two implementations of each interface: a deterministic fixture backend driven
by a JSON manifest (for tests and desk-scale runs) and an HTTP client speaking
the shared backend protocol (for real model inference).
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import random
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import requests

from .errors import (
    MissingFixtureError,
    ProtocolError,
    TransportError,
    UndefinedSimilarityError,
)
from .graph import RelationalGraph, _normalize

logger = logging.getLogger(__name__)

DEFAULT_DIM = 384


@dataclass(frozen=True)
class EmbeddingVector:
    """Fixed-length vector of finite reals."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in self.values):
            raise ProtocolError("embedding vector contains non-finite entries")

    @property
    def dim(self) -> int:
        return len(self.values)


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Cosine similarity; raises UndefinedSimilarityError on a zero vector."""
    if a.dim != b.dim:
        raise ProtocolError(f"dimension mismatch: {a.dim} vs {b.dim}")
    dot = math.fsum(x * y for x, y in zip(a.values, b.values))
    na = math.sqrt(math.fsum(x * x for x in a.values))
    nb = math.sqrt(math.fsum(y * y for y in b.values))
    if na == 0.0 or nb == 0.0:
        raise UndefinedSimilarityError("cosine similarity of a zero vector is undefined")
    return dot / (na * nb)


class ExtractionBackend(ABC):
    """Transforms natural-language text into a relational graph."""

    #: backend name plus relation-type inventory size, for reports
    name: str = "abstract"
    relation_types: int | None = None

    @abstractmethod
    def extract(self, text: str) -> RelationalGraph:
        """Extract semantic triplets; may be empty, never None."""

    def _check_input(self, text: str) -> str:
        if not text or not text.strip():
            raise ValueError("extraction input must be non-empty text")
        return text


class EmbeddingBackend(ABC):
    """Maps sentences to fixed-dimension embedding vectors."""

    name: str = "abstract"
    dim: int = DEFAULT_DIM

    @abstractmethod
    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        """One vector per input, order-preserving."""

    def _check_inputs(self, texts: Sequence[str]) -> None:
        if not texts:
            raise ValueError("embed requires a non-empty list of texts")
        if any(not t or not t.strip() for t in texts):
            raise ValueError("embed inputs must all be non-empty")

    def similarity_matrix(self, rows: Sequence[str], cols: Sequence[str]) -> list[list[float]]:
        """Pairwise cosine similarities, batched into a single embed call."""
        if not rows or not cols:
            return [[] for _ in rows]
        vecs = self.embed(list(rows) + list(cols))
        rv, cv = vecs[: len(rows)], vecs[len(rows) :]
        return [[cosine(r, c) for c in cv] for r in rv]


# ---------------------------------------------------------------------------
# Fixture backends


class FixtureManifest:
    """Deterministic extraction/embedding corpus loaded from a JSON file.

    Layout:
      {"extractions": {"<text>": [[s, r, o], ...], ...},
       "embedding": {"dim": 384, "seed": "...",
                     "similarity_overrides": [[a, b, value], ...]}}

    Keys are normalized at load, so fixture files stay human-readable.
    Lookups are total over the corpus: a miss raises, never returns empty.
    """

    def __init__(self, obj: dict) -> None:
        self.extractions: dict[str, list[list[str]]] = {
            _normalize(k): v for k, v in obj.get("extractions", {}).items()
        }
        emb = obj.get("embedding", {})
        self.dim: int = int(emb.get("dim", DEFAULT_DIM))
        self.seed: str = str(emb.get("seed", "fixture-embedding-v1"))
        self.overrides: dict[tuple[str, str], float] = {}
        for a, b, v in emb.get("similarity_overrides", []):
            ka, kb = _normalize(a), _normalize(b)
            self.overrides[(ka, kb)] = float(v)
            self.overrides[(kb, ka)] = float(v)

    @classmethod
    def load(cls, path: str | Path) -> "FixtureManifest":
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh))

    def lookup_extraction(self, text: str) -> list[list[str]]:
        key = _normalize(text)
        try:
            return self.extractions[key]
        except KeyError:
            raise MissingFixtureError(
                f"no fixture extraction for text: {text[:80]!r}"
            ) from None


class FixtureExtractor(ExtractionBackend):
    """Extraction backed by the manifest; same text always gives the same graph."""

    name = "fixture-extractor"
    relation_types = None

    def __init__(self, manifest: FixtureManifest) -> None:
        self.manifest = manifest

    def extract(self, text: str) -> RelationalGraph:
        self._check_input(text)
        rows = self.manifest.lookup_extraction(text)
        return RelationalGraph.from_raw((s, r, o) for s, r, o in rows)


class FixtureEmbedder(EmbeddingBackend):
    """Seeded hash-to-vector embedding plus a scripted similarity table.

    Vectors are derived from sha256(seed, normalized text), so identical
    inputs embed identically and the corpus is reproducible everywhere.
    The override table supplies exact similarities for scripted scenarios;
    pairs outside it fall back to the hash vectors' cosine.
    """

    name = "fixture-embedder"

    def __init__(self, manifest: FixtureManifest) -> None:
        self.manifest = manifest
        self.dim = manifest.dim

    def _vector(self, text: str) -> EmbeddingVector:
        key = _normalize(text)
        digest = hashlib.sha256(f"{self.manifest.seed}\x00{key}".encode()).digest()
        rng = random.Random(int.from_bytes(digest[:8], "big"))
        raw = [rng.gauss(0.0, 1.0) for _ in range(self.dim)]
        norm = math.sqrt(math.fsum(v * v for v in raw))
        return EmbeddingVector(tuple(v / norm for v in raw))

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        self._check_inputs(texts)
        return [self._vector(t) for t in texts]

    def similarity_matrix(self, rows: Sequence[str], cols: Sequence[str]) -> list[list[float]]:
        out = []
        for r in rows:
            rk = _normalize(r)
            line = []
            for c in cols:
                ck = _normalize(c)
                if (rk, ck) in self.manifest.overrides:
                    line.append(self.manifest.overrides[(rk, ck)])
                elif rk == ck:
                    line.append(1.0)
                else:
                    line.append(cosine(self._vector(r), self._vector(c)))
            out.append(line)
        return out


# ---------------------------------------------------------------------------
# HTTP backends


@dataclass(frozen=True)
class HttpConfig:
    endpoint: str
    timeout: float = 15.0
    retries: int = 2
    max_inflight: int = 4


class _HttpClient:
    def __init__(self, config: HttpConfig) -> None:
        self.config = config
        self._session = requests.Session()
        self._gate = threading.Semaphore(config.max_inflight)

    def post_json(self, path: str, payload: dict) -> dict:
        url = self.config.endpoint.rstrip("/") + path
        last: Exception | None = None
        for attempt in range(self.config.retries + 1):
            try:
                with self._gate:
                    resp = self._session.post(url, json=payload, timeout=self.config.timeout)
                if resp.status_code != 200:
                    raise TransportError(f"{url} returned HTTP {resp.status_code}")
                return resp.json()
            except (requests.RequestException, ValueError, TransportError) as exc:
                last = exc
                logger.warning("request to %s failed (attempt %d): %s", url, attempt + 1, exc)
        raise TransportError(f"backend unreachable at {url}: {last}")

    def get_json(self, path: str) -> dict:
        url = self.config.endpoint.rstrip("/") + path
        try:
            with self._gate:
                resp = self._session.get(url, timeout=self.config.timeout)
            if resp.status_code != 200:
                raise TransportError(f"{url} returned HTTP {resp.status_code}")
            return resp.json()
        except (requests.RequestException, ValueError) as exc:
            raise TransportError(f"backend unreachable at {url}: {exc}") from exc


class HttpExtractor(ExtractionBackend):
    """POST /extract client; deterministic given a pinned model server."""

    def __init__(self, config: HttpConfig) -> None:
        self._client = _HttpClient(config)
        self.name = f"http:{config.endpoint}"

    def health(self) -> dict:
        return self._client.get_json("/health")

    def extract(self, text: str) -> RelationalGraph:
        self._check_input(text)
        body = self._client.post_json("/extract", {"text": text})
        try:
            rows = body["triplets"]
            return RelationalGraph.from_raw(
                (t["subject"], t["relation"], t["object"]) for t in rows
            )
        except (KeyError, TypeError) as exc:
            raise ProtocolError(f"malformed /extract response: {exc}") from exc


class HttpEmbedder(EmbeddingBackend):
    """POST /embed client; validates the configured dimension."""

    def __init__(self, config: HttpConfig, dim: int = DEFAULT_DIM) -> None:
        self._client = _HttpClient(config)
        self.name = f"http:{config.endpoint}"
        self.dim = dim

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        self._check_inputs(texts)
        body = self._client.post_json("/embed", {"texts": list(texts)})
        try:
            vectors = [EmbeddingVector(tuple(float(x) for x in v)) for v in body["vectors"]]
        except (KeyError, TypeError) as exc:
            raise ProtocolError(f"malformed /embed response: {exc}") from exc
        if len(vectors) != len(texts):
            raise ProtocolError(
                f"embed returned {len(vectors)} vectors for {len(texts)} inputs"
            )
        for v in vectors:
            if v.dim != self.dim:
                raise ProtocolError(f"embedding dimension {v.dim}, expected {self.dim}")
        return vectors


# ---------------------------------------------------------------------------
# Extraction cache


class CachedExtractor(ExtractionBackend):
    """Disk cache keyed by (backend name, text digest); atomic writes.

    Makes repeated runs reproducible and cheap: knowledge-graph construction
    extracts once per article per option, and articles repeat across options.
    """

    def __init__(self, inner: ExtractionBackend, cache_dir: str | Path) -> None:
        self.inner = inner
        self.name = inner.name
        self.relation_types = inner.relation_types
        safe = hashlib.sha256(inner.name.encode()).hexdigest()[:12]
        self._dir = Path(cache_dir) / "extract" / safe
        self._dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._key_locks: dict[str, threading.Lock] = {}

    def _path(self, text: str) -> Path:
        digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
        return self._dir / f"{digest}.json"

    def _lock_for(self, key: str) -> threading.Lock:
        with self._lock:
            return self._key_locks.setdefault(key, threading.Lock())

    def extract(self, text: str) -> RelationalGraph:
        self._check_input(text)
        path = self._path(text)
        with self._lock_for(path.name):
            if path.exists():
                return RelationalGraph.from_json(path.read_text(encoding="utf-8"))
            graph = self.inner.extract(text)
            tmp = path.with_suffix(".tmp")
            tmp.write_text(graph.to_json(), encoding="utf-8")
            os.replace(tmp, path)
            return graph
