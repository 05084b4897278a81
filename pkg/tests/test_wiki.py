import json
import threading

import pytest

from kgmcq.errors import MissingFixtureError, NotFoundError, TransportError
from kgmcq.wiki import FixtureWiki, LiveWiki, failing_transport


class TestFixtureWiki:
    def test_search_exact(self, wiki):
        assert wiki.search_title("Barack Obama") == "Barack Obama"

    def test_search_redirect_style(self, wiki):
        assert wiki.search_title("starry night") == "The Starry Night"

    def test_search_no_result(self, wiki):
        assert wiki.search_title("zqxv-nonexistent-entity-123") is None

    def test_strict_miss_raises(self, wiki):
        with pytest.raises(MissingFixtureError):
            wiki.search_title("never recorded query")

    def test_lenient_miss_is_no_page(self, fixtures_dir):
        lenient = FixtureWiki.load(fixtures_dir / "wiki.json", strict=False)
        assert lenient.search_title("never recorded query") is None

    def test_get_summary(self, wiki):
        article = wiki.get_summary("Hawaii")
        assert article.summary.startswith("Hawaii is an island state")
        assert article.source == "fixture"

    def test_get_summary_unknown_title(self, wiki):
        with pytest.raises(NotFoundError):
            wiki.get_summary("No Such Page Anywhere")

    def test_empty_query_rejected(self, wiki):
        with pytest.raises(ValueError):
            wiki.search_title("  ")


def _scripted_transport(log):
    """Plays a tiny MediaWiki: one searchable page with an extract."""

    def call(params):
        log.append(dict(params))
        if params.get("list") == "search":
            if "kangaroo" in params["srsearch"].lower():
                return {"query": {"search": [{"title": "Kangaroo"}]}}
            return {"query": {"search": []}}
        if params.get("prop") == "extracts":
            if params["titles"] == "Kangaroo":
                return {
                    "query": {
                        "pages": [{"title": "Kangaroo", "extract": "Kangaroos are marsupials.\n"}]
                    }
                }
            return {"query": {"pages": [{"title": params["titles"], "missing": True}]}}
        raise AssertionError(f"unexpected params {params}")

    return call


class TestLiveWikiCache:
    def test_search_cached_after_first_call(self, tmp_path):
        log = []
        client = LiveWiki(cache_dir=tmp_path, transport=_scripted_transport(log))
        assert client.search_title("kangaroo habitat") == "Kangaroo"
        assert client.search_title("kangaroo habitat") == "Kangaroo"
        assert len(log) == 1

    def test_negative_search_cached(self, tmp_path):
        log = []
        client = LiveWiki(cache_dir=tmp_path, transport=_scripted_transport(log))
        assert client.search_title("nothing here") is None
        assert client.search_title("nothing here") is None
        assert len(log) == 1

    def test_summary_cache_round_trip_bytes(self, tmp_path):
        log = []
        client = LiveWiki(cache_dir=tmp_path, transport=_scripted_transport(log))
        first = client.get_summary("Kangaroo")
        second = client.get_summary("Kangaroo")
        assert first.summary.encode() == second.summary.encode()
        assert second.source == "cache"
        assert len(log) == 1

    def test_missing_page_not_found_and_cached(self, tmp_path):
        log = []
        client = LiveWiki(cache_dir=tmp_path, transport=_scripted_transport(log))
        with pytest.raises(NotFoundError):
            client.get_summary("Ghost Page")
        with pytest.raises(NotFoundError):
            client.get_summary("Ghost Page")
        assert len(log) == 1

    def test_warm_cache_needs_no_network(self, tmp_path):
        log = []
        warm = LiveWiki(cache_dir=tmp_path, transport=_scripted_transport(log))
        warm.search_title("kangaroo")
        warm.get_summary("Kangaroo")
        cold = LiveWiki(cache_dir=tmp_path, transport=failing_transport)
        assert cold.search_title("kangaroo") == "Kangaroo"
        assert cold.get_summary("Kangaroo").summary == "Kangaroos are marsupials."

    def test_search_key_normalized(self, tmp_path):
        log = []
        client = LiveWiki(cache_dir=tmp_path, transport=_scripted_transport(log))
        client.search_title("Kangaroo  Habitat")
        client.search_title("kangaroo habitat")
        assert len(log) == 1

    def test_cache_metadata_records_search_profile(self, tmp_path):
        client = LiveWiki(cache_dir=tmp_path, transport=_scripted_transport([]))
        client.search_title("kangaroo")
        (entry,) = (tmp_path / "wiki" / "search").glob("*.json")
        assert json.loads(entry.read_text())["profile"] == "mediawiki-default-search"

    def test_concurrent_fetches_coalesce(self, tmp_path):
        log = []
        lock = threading.Lock()

        def slow_transport(params):
            with lock:
                log.append(params)
            return _scripted_transport([])(params)

        client = LiveWiki(cache_dir=tmp_path, transport=slow_transport)
        threads = [threading.Thread(target=client.search_title, args=("kangaroo",)) for _ in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(log) == 1

    def test_transport_error_propagates(self, tmp_path):
        def broken(params):
            raise TransportError("api down")

        client = LiveWiki(cache_dir=tmp_path, transport=broken)
        with pytest.raises(TransportError):
            client.search_title("anything")


class TestFixtureModeIsOffline:
    def test_zero_network_operations(self, fixtures_dir):
        # the fixture client has no transport at all; exercising it touches
        # nothing but the loaded snapshot
        wiki = FixtureWiki.load(fixtures_dir / "wiki.json")
        wiki.search_title("Canberra")
        wiki.get_summary("Canberra")
