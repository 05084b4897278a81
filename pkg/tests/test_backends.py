import json
import math
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest

from kgmcq.backends import (
    CachedExtractor,
    EmbeddingVector,
    FixtureEmbedder,
    FixtureExtractor,
    HttpConfig,
    HttpEmbedder,
    HttpExtractor,
    cosine,
)
from kgmcq.errors import MissingFixtureError, ProtocolError, TransportError, UndefinedSimilarityError
from kgmcq.graph import triplet

RE_DEMO = "Barack Obama, who served as the 44th President of the US, was born in Hawaii"


class TestFixtureExtractor:
    def test_demo_sentence_triplets(self, extractor):
        graph = extractor.extract(RE_DEMO)
        assert triplet("Barack Obama", "born in", "Hawaii") in graph
        assert triplet("Barack Obama", "is a", "President of the US") in graph

    def test_empty_text_rejected(self, extractor):
        with pytest.raises(ValueError):
            extractor.extract("")

    def test_unseen_sentence_is_an_error(self, extractor):
        with pytest.raises(MissingFixtureError):
            extractor.extract("a sentence nobody recorded")

    def test_determinism(self, extractor):
        assert extractor.extract(RE_DEMO) == extractor.extract(RE_DEMO)

    def test_lookup_ignores_case_and_spacing(self, extractor):
        variant = RE_DEMO.upper().replace(", ", ",   ")
        assert extractor.extract(variant) == extractor.extract(RE_DEMO)


class TestFixtureEmbedder:
    def test_dimension(self, embedder):
        (vec,) = embedder.embed(["hawaii"])
        assert vec.dim == 384

    def test_identical_inputs_identical_vectors(self, embedder):
        a, b = embedder.embed(["hello world", "hello world"])
        assert a == b

    def test_order_and_length_preserving(self, embedder):
        texts = ["alpha", "beta", "gamma"]
        vecs = embedder.embed(texts)
        assert len(vecs) == 3
        assert vecs[0] == embedder.embed(["alpha"])[0]
        assert vecs[2] == embedder.embed(["gamma"])[0]

    def test_empty_list_rejected(self, embedder):
        with pytest.raises(ValueError):
            embedder.embed([])

    def test_empty_entry_rejected(self, embedder):
        with pytest.raises(ValueError):
            embedder.embed(["ok", " "])

    def test_similarity_override_table(self, embedder):
        [[sim]] = embedder.similarity_matrix(["US president"], ["President of the United States"])
        assert sim == 0.91

    def test_override_is_symmetric(self, embedder):
        [[sim]] = embedder.similarity_matrix(["President of the United States"], ["US president"])
        assert sim == 0.91

    def test_identical_text_similarity_is_one(self, embedder):
        [[sim]] = embedder.similarity_matrix(["Canberra"], ["canberra"])
        assert sim == 1.0

    def test_hash_fallback_bounded(self, embedder):
        [[sim]] = embedder.similarity_matrix(["a novel phrase"], ["another phrase"])
        assert -1.0 <= sim <= 1.0


class TestCosine:
    def test_self_similarity(self):
        v = EmbeddingVector((0.3, -1.2, 2.0))
        assert cosine(v, v) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        assert cosine(EmbeddingVector((1.0, 0.0)), EmbeddingVector((0.0, 1.0))) == 0.0

    def test_closed_form_45_degrees(self):
        sim = cosine(EmbeddingVector((1.0, 1.0)), EmbeddingVector((1.0, 0.0)))
        assert sim == pytest.approx(math.sqrt(2) / 2, abs=1e-9)

    def test_symmetry_and_bound(self, embedder):
        a, b = embedder.embed(["one phrase", "a different phrase"])
        assert cosine(a, b) == cosine(b, a)
        assert abs(cosine(a, b)) <= 1 + 1e-12

    def test_zero_vector_undefined(self):
        with pytest.raises(UndefinedSimilarityError):
            cosine(EmbeddingVector((0.0, 0.0)), EmbeddingVector((1.0, 0.0)))

    def test_dimension_mismatch(self):
        with pytest.raises(ProtocolError):
            cosine(EmbeddingVector((1.0,)), EmbeddingVector((1.0, 2.0)))


class TestCachedExtractor:
    def test_cache_hit_skips_inner_backend(self, extractor, tmp_path):
        cached = CachedExtractor(extractor, tmp_path)
        first = cached.extract(RE_DEMO)

        class Exploding:
            name = extractor.name
            relation_types = None

            def extract(self, text):
                raise AssertionError("cache should have answered")

        cached_again = CachedExtractor(Exploding(), tmp_path)
        assert cached_again.extract(RE_DEMO) == first

    def test_cache_files_created(self, extractor, tmp_path):
        cached = CachedExtractor(extractor, tmp_path)
        cached.extract(RE_DEMO)
        files = list(Path(tmp_path).glob("extract/*/*.json"))
        assert len(files) == 1


# ---------------------------------------------------------------------------
# HTTP backend against an in-process stub speaking the shared protocol


class _StubHandler(BaseHTTPRequestHandler):
    dim = 8
    fail_next = {"count": 0}

    def log_message(self, *args):
        pass

    def _send(self, code, obj):
        body = json.dumps(obj).encode()
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        if self.path == "/health":
            self._send(
                200,
                {"status": "ok", "extractor": "stub", "embedder": "stub", "dim": self.dim},
            )
        else:
            self._send(404, {"error": "no such path"})

    def do_POST(self):
        if self.fail_next["count"] > 0:
            self.fail_next["count"] -= 1
            self._send(500, {"error": "transient"})
            return
        length = int(self.headers["Content-Length"])
        payload = json.loads(self.rfile.read(length))
        if self.path == "/extract":
            text = payload["text"]
            trips = []
            if "Hawaii" in text:
                trips.append({"subject": "Barack Obama", "relation": "born in", "object": "Hawaii"})
            self._send(200, {"triplets": trips})
        elif self.path == "/embed":
            vectors = [[float(len(t) % 7)] * self.dim for t in payload["texts"]]
            self._send(200, {"vectors": vectors})
        else:
            self._send(404, {"error": "no such path"})


@pytest.fixture()
def stub_server():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


class TestHttpBackend:
    def test_health(self, stub_server):
        health = HttpExtractor(HttpConfig(endpoint=stub_server)).health()
        assert health["status"] == "ok"
        assert health["dim"] == 8

    def test_extract_round_trip(self, stub_server):
        backend = HttpExtractor(HttpConfig(endpoint=stub_server))
        graph = backend.extract("He was born in Hawaii")
        assert triplet("Barack Obama", "born in", "Hawaii") in graph

    def test_embed_round_trip(self, stub_server):
        backend = HttpEmbedder(HttpConfig(endpoint=stub_server), dim=8)
        vecs = backend.embed(["abc", "de"])
        assert len(vecs) == 2 and all(v.dim == 8 for v in vecs)

    def test_dimension_mismatch_is_protocol_error(self, stub_server):
        backend = HttpEmbedder(HttpConfig(endpoint=stub_server), dim=384)
        with pytest.raises(ProtocolError):
            backend.embed(["abc"])

    def test_retry_then_success(self, stub_server):
        _StubHandler.fail_next["count"] = 1
        backend = HttpExtractor(HttpConfig(endpoint=stub_server, retries=2))
        graph = backend.extract("born in Hawaii")
        assert len(graph) == 1

    def test_unreachable_endpoint(self):
        backend = HttpExtractor(HttpConfig(endpoint="http://127.0.0.1:9", timeout=0.2, retries=0))
        with pytest.raises(TransportError):
            backend.extract("anything")

    def test_responses_conform_to_shared_schema(self, stub_server):
        import jsonschema
        import requests

        schema = json.loads(
            (Path(__file__).resolve().parents[1] / "schemas" / "backend-protocol.schema.json").read_text()
        )

        def validate(kind, payload):
            jsonschema.validate(
                payload, {"$ref": f"#/$defs/{kind}", "$defs": schema["$defs"]}
            )

        health = requests.get(f"{stub_server}/health", timeout=5).json()
        validate("healthResponse", health)
        ext = requests.post(f"{stub_server}/extract", json={"text": "born in Hawaii"}, timeout=5).json()
        validate("extractResponse", ext)
        emb = requests.post(f"{stub_server}/embed", json={"texts": ["a", "b"]}, timeout=5).json()
        validate("embedResponse", emb)
