import pytest

from kgmcq.backends import FixtureEmbedder, FixtureExtractor, FixtureManifest
from kgmcq.fixtures import fixture_path
from kgmcq.pg_builder import load_dataset
from kgmcq.scoring import PipelineConfig
from kgmcq.wiki import FixtureWiki


@pytest.fixture(scope="session")
def fixtures_dir():
    return fixture_path()


@pytest.fixture(scope="session")
def manifest(fixtures_dir):
    return FixtureManifest.load(fixtures_dir / "manifest.json")


@pytest.fixture(scope="session")
def extractor(manifest):
    return FixtureExtractor(manifest)


@pytest.fixture(scope="session")
def embedder(manifest):
    return FixtureEmbedder(manifest)


@pytest.fixture()
def wiki(fixtures_dir):
    return FixtureWiki.load(fixtures_dir / "wiki.json", strict=True)


@pytest.fixture(scope="session")
def dataset(fixtures_dir):
    return load_dataset(fixtures_dir / "dataset.json")


@pytest.fixture()
def pipeline(extractor, embedder, wiki):
    return PipelineConfig(extractor=extractor, embedder=embedder, wiki=wiki)


@pytest.fixture()
def items_by_id(dataset):
    return {item.id: item for item in dataset}
