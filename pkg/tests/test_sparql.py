import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synth import assignment_solutions, nested_loop_select
from translod.rdf import NEPTUNE, PASSIM, RDF_TYPE, XSD, Graph, Iri, Literal, Triple, UnknownPrefix
from translod.sparql import (Filter, ParseError, TriplePattern, UnboundVariable, Variable,
                             eval_bgp, eval_construct, eval_select, format_tsv, parse_query,
                             parse_rules)

TAM_QUERY = """SELECT DISTINCT ?city WHERE {
  ?s passim:serviceName ?o .
  ?s passim:cityThrough ?city .
  FILTER (?o = "TaM")
}"""

STOPS_QUERY = """SELECT DISTINCT ?name WHERE {
  ?stop a neptune:StopPoint .
  ?stop neptune:name ?name .
}"""

EX = "http://example.org/"


def ex(x):
    return Iri(EX + x)


class TestParse:
    def test_tam_query(self):
        q = parse_query(TAM_QUERY)
        assert q.kind == "SELECT" and q.distinct
        assert q.projection == [Variable("city")]
        assert q.where == [
            TriplePattern(Variable("s"), Iri(PASSIM + "serviceName"), Variable("o")),
            TriplePattern(Variable("s"), Iri(PASSIM + "cityThrough"), Variable("city")),
        ]
        assert q.filters == [Filter(Variable("o"), Literal("TaM"))]

    def test_stops_query(self):
        q = parse_query(STOPS_QUERY)
        assert q.distinct and q.projection == [Variable("name")]
        assert q.where == [
            TriplePattern(Variable("stop"), RDF_TYPE, Iri(NEPTUNE + "StopPoint")),
            TriplePattern(Variable("stop"), Iri(NEPTUNE + "name"), Variable("name")),
        ]

    def test_empty_where_unbound(self):
        with pytest.raises(UnboundVariable) as exc:
            parse_query("SELECT ?x WHERE { }")
        assert exc.value.name == "x"

    def test_filter_variable_must_be_bound(self):
        with pytest.raises(UnboundVariable):
            parse_query('SELECT ?s WHERE { ?s ?p ?o FILTER(?z = "a") }')

    def test_construct_template_scope(self):
        with pytest.raises(UnboundVariable):
            parse_query("CONSTRUCT { ?s ?p ?nope } WHERE { ?s ?p ?o }")

    def test_prefix_declarations_and_literals(self):
        q = parse_query('PREFIX ex: <http://example.org/>\n'
                        'select ?s where { ?s ex:p "x"@FR ; ex:q 3, 2.5 ; ex:r "1"^^xsd:integer . }')
        objs = [p.object for p in q.where]
        assert objs == [Literal("x", lang="fr"), Literal("3", datatype=Iri(XSD + "integer")),
                        Literal("2.5", datatype=Iri(XSD + "decimal")),
                        Literal("1", datatype=Iri(XSD + "integer"))]
        assert all(p.subject == Variable("s") for p in q.where)

    def test_unknown_prefix(self):
        with pytest.raises(UnknownPrefix):
            parse_query("SELECT ?s WHERE { ?s foo:bar ?o }")

    @pytest.mark.parametrize("text", [
        "SELECT", "SELECT ?x", "SELECT ?x WHERE { ?x ?p }", "ASK { ?s ?p ?o }",
        "SELECT ?x WHERE { ?x ?p ?o OPTIONAL { ?x ?q ?r } }",
        "SELECT ?x WHERE { ?x ?p ?o } LIMIT 3", 'SELECT ?x WHERE { "lit" ?p ?x }',
    ])
    def test_parse_errors(self, text):
        with pytest.raises(ParseError):
            parse_query(text)

    def test_parse_error_position(self):
        with pytest.raises(ParseError) as exc:
            parse_query("SELECT ?x WHERE { ?x ?p ?o ] }")
        assert exc.value.position == 27


G3 = Graph([Triple(ex("a"), ex("p"), ex("b")), Triple(ex("b"), ex("p"), ex("c")),
            Triple(ex("a"), ex("q"), Literal("x"))])


class TestBgp:
    def test_empty_pattern_list(self):
        assert eval_bgp(G3, []) == [{}]

    def test_concrete_present_and_absent(self):
        assert eval_bgp(G3, [TriplePattern(ex("a"), ex("p"), ex("b"))]) == [{}]
        assert eval_bgp(G3, [TriplePattern(ex("a"), ex("p"), ex("c"))]) == []

    def test_join(self):
        x, y, z = Variable("x"), Variable("y"), Variable("z")
        sols = eval_bgp(G3, [TriplePattern(x, ex("p"), y), TriplePattern(y, ex("p"), z)])
        assert sols == [{"x": ex("a"), "y": ex("b"), "z": ex("c")}]

    def test_repeated_variable(self):
        g = Graph([Triple(ex("a"), ex("p"), ex("a")), Triple(ex("a"), ex("p"), ex("b"))])
        x = Variable("x")
        assert eval_bgp(g, [TriplePattern(x, ex("p"), x)]) == [{"x": ex("a")}]


# small universe so that exhaustive assignment enumeration stays cheap
_nodes = [ex(c) for c in "abcdef"]
_preds = [ex("p"), ex("q"), RDF_TYPE]
_lits = [Literal("x"), Literal("y", lang="fr")]
_triple = st.builds(Triple, st.sampled_from(_nodes), st.sampled_from(_preds),
                    st.sampled_from(_nodes + _lits))
_vars = [Variable(v) for v in "xyz"]
_pattern = st.builds(
    TriplePattern,
    st.sampled_from(_nodes[:3] + _vars),
    st.sampled_from(_preds + _vars[:1]),
    st.sampled_from(_nodes[:3] + _lits + _vars),
)


def _canon(sols):
    return sorted(tuple(sorted((k, v.n3()) for k, v in s.items())) for s in sols)


@settings(max_examples=150, deadline=None)
@given(st.lists(_triple, min_size=1, max_size=40), st.lists(_pattern, min_size=1, max_size=3))
def test_bgp_equals_exhaustive_assignment(ts, patterns):
    g = Graph(ts)
    assert _canon(eval_bgp(g, patterns)) == _canon(assignment_solutions(g, patterns))


@settings(max_examples=60, deadline=None)
@given(st.lists(_triple, max_size=30), st.lists(_triple, max_size=20),
       st.lists(_pattern, min_size=1, max_size=3))
def test_monotonicity(ts, extra, patterns):
    small = _canon(eval_bgp(Graph(ts), patterns))
    big = _canon(eval_bgp(Graph(ts + extra), patterns))
    assert set(small) <= set(big)


def tam_graph():
    g = Graph()
    svc, other = ex("svc/tam"), ex("svc/other")
    g.add(Triple(svc, Iri(PASSIM + "serviceName"), Literal("TaM")))
    for city in ("Montpellier", "Castelnau-le-Lez"):
        g.add(Triple(svc, Iri(PASSIM + "cityThrough"), Literal(city)))
    g.add(Triple(other, Iri(PASSIM + "serviceName"), Literal("Tango")))
    g.add(Triple(other, Iri(PASSIM + "cityThrough"), Literal("Nîmes")))
    # same name as a datatyped literal must not satisfy the plain-literal filter
    g.add(Triple(ex("svc/typed"), Iri(PASSIM + "serviceName"),
                 Literal("TaM", datatype=Iri(XSD + "string"))))
    g.add(Triple(ex("svc/typed"), Iri(PASSIM + "cityThrough"), Literal("Sète")))
    return g


class TestSelect:
    def test_tam_rows(self):
        g = tam_graph()
        q = parse_query(TAM_QUERY)
        rows = eval_select(g, q)
        assert rows == [(Literal("Castelnau-le-Lez"),), (Literal("Montpellier"),)]
        assert rows == nested_loop_select(g, q)

    def test_no_match(self):
        q = parse_query(TAM_QUERY.replace('"TaM"', '"Nope"'))
        assert eval_select(tam_graph(), q) == []

    def test_distinct(self):
        g = Graph([Triple(ex(f"s{i}"), Iri(NEPTUNE + "name"), Literal("Victor Hugo")) for i in range(3)]
                  + [Triple(ex(f"s{i}"), RDF_TYPE, Iri(NEPTUNE + "StopPoint")) for i in range(3)])
        q = parse_query(STOPS_QUERY)
        assert eval_select(g, q) == [(Literal("Victor Hugo"),)]
        q.distinct = False
        assert len(eval_select(g, q)) == 3

    def test_idempotent(self):
        q = parse_query(TAM_QUERY)
        g = tam_graph()
        assert format_tsv(q, eval_select(g, q)) == format_tsv(q, eval_select(g, q))

    def test_tsv(self):
        q = parse_query(TAM_QUERY)
        assert format_tsv(q, eval_select(tam_graph(), q)) == \
            '?city\n"Castelnau-le-Lez"\n"Montpellier"\n'


class TestConstruct:
    def test_identity(self):
        q = parse_query(f"CONSTRUCT {{ ?s <{EX}p> ?o }} WHERE {{ ?s <{EX}p> ?o }}")
        out = eval_construct(G3, q)
        assert out == Graph(G3.match(None, ex("p"), None))

    def test_empty_input(self):
        q = parse_query("CONSTRUCT { ?s ?p ?o } WHERE { ?s ?p ?o }")
        assert len(eval_construct(Graph(), q)) == 0

    def test_invalid_instantiations_skipped(self):
        q = parse_query(f"CONSTRUCT {{ ?o <{EX}r> ?s }} WHERE {{ ?s ?p ?o }}")
        out = eval_construct(G3, q)
        # the literal object cannot become a subject
        assert len(out) == 2

    def test_bind_functions(self):
        q = parse_query(f"""PREFIX fn: <urn:translod:fn#>
            CONSTRUCT {{ ?n <{EX}label> ?l ; <{EX}d> ?d }}
            WHERE {{ ?s <{EX}name> ?v .
              BIND (IRI(CONCAT(STRBEFORE(STR(?s), "x/"), "node/", fn:slug(?v))) AS ?n)
              BIND (LCASE(?v) AS ?l)
              BIND (fn:frDate("31/12/2011") AS ?d) }}""")
        g = Graph([Triple(ex("x/1"), ex("name"), Literal("Côte Bleue"))])
        out = eval_construct(g, q)
        assert Triple(ex("node/cote-bleue"), ex("label"), Literal("côte bleue")) in out
        assert Triple(ex("node/cote-bleue"), ex("d"), Literal("2011-12-31", datatype=Iri(XSD + "date"))) in out

    def test_bind_error_leaves_unbound(self):
        q = parse_query(f"""PREFIX fn: <urn:translod:fn#>
            CONSTRUCT {{ ?s <{EX}d> ?d }} WHERE {{ ?s <{EX}name> ?v . BIND (fn:frDate(?v) AS ?d) }}""")
        g = Graph([Triple(ex("a"), ex("name"), Literal("not a date"))])
        assert len(eval_construct(g, q)) == 0

    def test_split_property_function(self):
        q = parse_query(f"""PREFIX fn: <urn:translod:fn#>
            SELECT ?m WHERE {{ ?s <{EX}modes> ?cell . ?cell fn:split ?m }}""")
        g = Graph([Triple(ex("a"), ex("modes"), Literal("Bus, , Tram "))])
        assert eval_select(g, q) == [(Literal("Bus"),), (Literal("Tram"),)]

    def test_rule_file_rejects_select(self):
        with pytest.raises(ValueError):
            parse_rules("SELECT ?s WHERE { ?s ?p ?o }")

    @settings(max_examples=60, deadline=None)
    @given(st.lists(_triple, max_size=30), st.lists(_pattern, min_size=1, max_size=3))
    def test_output_always_valid(self, ts, patterns):
        names = sorted({v for p in patterns for v in p.variables()})
        if not names:
            return
        text = "CONSTRUCT { " + " . ".join(
            f"{_fmt(p.object)} {_fmt(p.predicate)} {_fmt(p.subject)}" for p in patterns
            if not isinstance(p.predicate, Literal)) + " } WHERE { " + " . ".join(
            f"{_fmt(p.subject)} {_fmt(p.predicate)} {_fmt(p.object)}" for p in patterns) + " }"
        try:
            q = parse_query(text)
        except ParseError:
            return  # literal flipped into subject position of the template
        out = eval_construct(Graph(ts), q)
        for t in out:
            assert isinstance(t.subject, Iri) and isinstance(t.predicate, Iri)


def _fmt(t):
    return t.n3()
