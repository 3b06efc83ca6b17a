import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from convsearch.index import build_index
from convsearch.textpipe import AnalyzerConfig

FIXTURES = Path(__file__).parent / "fixtures"
DESK = FIXTURES / "desk"
MOCK_SIDECAR = Path(__file__).parent / "mock_sidecar.py"


@pytest.fixture(scope="session")
def plain_analyzer():
    """No stopwords, no stemming: terms are lowercased tokens."""
    return AnalyzerConfig(stopwords=frozenset(), stemmer="none")


@pytest.fixture(scope="session")
def shark_corpus():
    return [
        ("d1", "sharks sharks ocean"),
        ("d2", "sharks ocean fish"),
        ("d3", "cats purr"),
    ]


@pytest.fixture(scope="session")
def shark_index(shark_corpus, plain_analyzer):
    return build_index(shark_corpus, plain_analyzer)


@pytest.fixture(scope="session")
def desk_index_dir(tmp_path_factory):
    """The bundled desk corpus, indexed once per session with defaults."""
    from convsearch.index import read_corpus_tsv

    path = tmp_path_factory.mktemp("desk") / "index"
    index = build_index(read_corpus_tsv(DESK / "corpus.tsv"), AnalyzerConfig.default())
    index.save(path)
    return path
