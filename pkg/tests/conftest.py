from pathlib import Path

import pytest
from hypothesis import strategies as st

from translod.rdf import BlankNode, Iri, Literal, Triple

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures():
    return FIXTURES


@pytest.fixture
def sample_csv():
    return (FIXTURES / "passim_sample.csv").read_bytes()


@pytest.fixture
def sample_xml():
    return (FIXTURES / "neptune_sample.xml").read_bytes()


# -- hypothesis strategies for arbitrary valid RDF

_local = st.text(alphabet="abcdefghijklmnopqrstuvwxyz0123456789_-", min_size=1, max_size=8)
_ns = st.sampled_from([
    "http://example.org/",
    "http://data.lirmm.fr/ontologies/passim#",
    "http://data.lirmm.fr/ontologies/neptune#",
    "http://www.w3.org/2001/XMLSchema#",
    "urn:x:",
    "http://example.org/a/b#",
])
iris = st.builds(lambda ns, local: Iri(ns + local), _ns, _local) | st.builds(
    lambda n: Iri(f"http://example.org/path/{n}.x"), st.integers(0, 50))
bnodes = st.builds(BlankNode, st.text(alphabet="abcXYZ019_", min_size=1, max_size=5))
_text = st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=12)
literals = (
    st.builds(Literal, _text)
    | st.builds(lambda s, lang: Literal(s, lang=lang), _text, st.sampled_from(["fr", "en-GB", "EN"]))
    | st.builds(lambda s, dt: Literal(s, datatype=dt), _text, iris)
)
triples = st.builds(Triple, iris | bnodes, iris, iris | bnodes | literals)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
