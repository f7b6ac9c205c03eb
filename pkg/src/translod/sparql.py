"""A small SPARQL subset: PREFIX, SELECT [DISTINCT], CONSTRUCT, basic graph
patterns, FILTER equality, and BIND with a handful of string functions.

The functions and the ``fn:split`` property function exist so that the
Passim CONSTRUCT rules can mint IRIs and split multi-valued cells.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, NamedTuple, Optional, Tuple, Union

from .rdf import (RDF_TYPE, XSD, BlankNode, Graph, Iri, Literal, NamespaceMap, Triple,
                  UnknownPrefix, is_valid_triple)

__all__ = [
    "Variable", "TriplePattern", "Query", "Filter", "Bind", "parse_query", "parse_rules",
    "eval_bgp", "eval_select", "eval_construct", "apply_rules", "ParseError",
    "UnboundVariable", "FN",
]

FN = "urn:translod:fn#"
FN_SPLIT = Iri(FN + "split")


class QueryError(ValueError):
    pass


class ParseError(QueryError):
    def __init__(self, position: int, expected: str, found: str = ""):
        msg = f"parse error at offset {position}: expected {expected}"
        if found:
            msg += f", found {found!r}"
        super().__init__(msg)
        self.position = position
        self.expected = expected


class UnboundVariable(QueryError):
    def __init__(self, name: str):
        super().__init__(f"variable ?{name} does not appear in the WHERE clause")
        self.name = name


@dataclass(frozen=True)
class Variable:
    name: str

    def __post_init__(self):
        if not re.match(r"^[A-Za-z_][A-Za-z0-9_]*$", self.name):
            raise ValueError(f"bad variable name {self.name!r}")

    def n3(self) -> str:
        return "?" + self.name


PatternTerm = Union[Iri, Literal, BlankNode, Variable]


class TriplePattern(NamedTuple):
    subject: PatternTerm
    predicate: PatternTerm
    object: PatternTerm

    def variables(self) -> List[str]:
        return [t.name for t in self if isinstance(t, Variable)]


class Filter(NamedTuple):
    variable: Variable
    value: Union[Iri, Literal]


@dataclass(frozen=True)
class Bind:
    expression: tuple
    variable: Variable


@dataclass
class Query:
    kind: str  # "SELECT" or "CONSTRUCT"
    where: List[TriplePattern]
    filters: List[Filter] = field(default_factory=list)
    distinct: bool = False
    projection: List[Variable] = field(default_factory=list)
    template: List[TriplePattern] = field(default_factory=list)
    binds: List[Bind] = field(default_factory=list)
    prefixes: NamespaceMap = field(default_factory=NamespaceMap)
    # patterns and binds in source order; binds close the preceding BGP
    body: list = field(default_factory=list)


# --------------------------------------------------------------------------
# Tokenizer

_TOKEN_SPEC = [
    ("WS", r"\s+"),
    ("COMMENT", r"#[^\n]*"),
    ("IRIREF", r"<[^<>\"{}|^`\\\x00-\x20]*>"),
    ("VAR", r"[?$][A-Za-z_][A-Za-z0-9_]*"),
    ("STRING", r'"(?:[^"\\\n\r]|\\.)*"|\'(?:[^\'\\\n\r]|\\.)*\''),
    ("LANGTAG", r"@[A-Za-z]+(?:-[A-Za-z0-9]+)*"),
    ("DTMARK", r"\^\^"),
    ("NUMBER", r"[+-]?\d+(?:\.\d+)?"),
    ("PNAME", r"(?:[A-Za-z][A-Za-z0-9_\-]*)?:(?:[A-Za-z0-9_](?:[A-Za-z0-9_\-.]*[A-Za-z0-9_\-])?)?"),
    ("NAME", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("PUNCT", r"[{}().;,=*]"),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{rx})" for name, rx in _TOKEN_SPEC))


class Token(NamedTuple):
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> List[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(pos, "a token", text[pos:pos + 10])
        kind = m.lastgroup
        if kind not in ("WS", "COMMENT"):
            tokens.append(Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(Token("EOF", "", len(text)))
    return tokens


_STRING_ESCAPES = {"t": "\t", "n": "\n", "r": "\r", "b": "\b", "f": "\f",
                   '"': '"', "'": "'", "\\": "\\"}


def _unquote(s: str) -> str:
    body = s[1:-1]
    return re.sub(r"\\(.)", lambda m: _STRING_ESCAPES.get(m.group(1), m.group(0)), body)


# --------------------------------------------------------------------------
# Parser

_FUNCTIONS = {"IRI", "URI", "STR", "CONCAT", "STRBEFORE", "STRAFTER", "STRDT", "LCASE", "UCASE"}


class _Parser:
    def __init__(self, text: str, base_ns: Optional[NamespaceMap] = None):
        self.tokens = tokenize(text)
        self.i = 0
        self.ns = NamespaceMap(dict(base_ns.items())) if base_ns else NamespaceMap()

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def is_keyword(self, word: str) -> bool:
        return self.tok.kind == "NAME" and self.tok.text.upper() == word

    def is_punct(self, ch: str) -> bool:
        return self.tok.kind == "PUNCT" and self.tok.text == ch

    def expect_keyword(self, word: str):
        if not self.is_keyword(word):
            raise ParseError(self.tok.pos, word, self.tok.text)
        self.advance()

    def expect_punct(self, ch: str):
        if not self.is_punct(ch):
            raise ParseError(self.tok.pos, f"'{ch}'", self.tok.text)
        self.advance()

    # -- terms

    def iri(self) -> Iri:
        t = self.tok
        if t.kind == "IRIREF":
            self.advance()
            try:
                return Iri(t.text[1:-1])
            except ValueError:
                raise ParseError(t.pos, "absolute IRI", t.text) from None
        if t.kind == "PNAME":
            self.advance()
            prefix, local = t.text.split(":", 1)
            if prefix not in self.ns:
                raise UnknownPrefix(prefix)
            return Iri(self.ns[prefix] + local)
        raise ParseError(t.pos, "IRI", t.text)

    def literal(self) -> Literal:
        t = self.tok
        if t.kind == "NUMBER":
            self.advance()
            dt = "decimal" if "." in t.text else "integer"
            return Literal(t.text, datatype=Iri(XSD + dt))
        if t.kind != "STRING":
            raise ParseError(t.pos, "literal", t.text)
        self.advance()
        lexical = _unquote(t.text)
        if self.tok.kind == "LANGTAG":
            return Literal(lexical, lang=self.advance().text[1:])
        if self.tok.kind == "DTMARK":
            self.advance()
            return Literal(lexical, datatype=self.iri())
        return Literal(lexical)

    def var(self) -> Variable:
        t = self.tok
        if t.kind != "VAR":
            raise ParseError(t.pos, "variable", t.text)
        self.advance()
        return Variable(t.text[1:])

    def term(self, position: str) -> PatternTerm:
        t = self.tok
        if t.kind == "VAR":
            return self.var()
        if t.kind in ("IRIREF", "PNAME"):
            return self.iri()
        if position == "p" and t.kind == "NAME" and t.text == "a":
            self.advance()
            return RDF_TYPE
        if position == "o" and t.kind in ("STRING", "NUMBER"):
            return self.literal()
        expected = {"s": "subject (variable or IRI)", "p": "predicate (variable, IRI or 'a')",
                    "o": "object (variable, IRI or literal)"}[position]
        raise ParseError(t.pos, expected, t.text)

    # -- structure

    def prologue(self):
        while self.is_keyword("PREFIX"):
            self.advance()
            t = self.tok
            if t.kind != "PNAME" or not t.text.endswith(":") or t.text.count(":") != 1:
                raise ParseError(t.pos, "prefix declaration 'name:'", t.text)
            self.advance()
            ns_iri = self.iri()
            self.ns.bind(t.text[:-1], ns_iri)

    def triples_block(self, out: list, stop: str):
        """Triples with ';' and ',' abbreviations, up to the closing brace."""
        subject = self.term("s")
        while True:
            predicate = self.term("p")
            while True:
                out.append(TriplePattern(subject, predicate, self.term("o")))
                if self.is_punct(","):
                    self.advance()
                    continue
                break
            if self.is_punct(";"):
                self.advance()
                if self.is_punct(".") or self.is_punct(stop):
                    break
                continue
            break
        if self.is_punct("."):
            self.advance()

    def template(self) -> List[TriplePattern]:
        self.expect_punct("{")
        out: List[TriplePattern] = []
        while not self.is_punct("}"):
            if self.tok.kind == "EOF":
                raise ParseError(self.tok.pos, "'}'")
            self.triples_block(out, "}")
        self.advance()
        return out

    def expression(self) -> tuple:
        t = self.tok
        if t.kind == "VAR":
            return ("var", self.var().name)
        if t.kind in ("STRING", "NUMBER"):
            return ("const", self.literal())
        if t.kind == "NAME" and t.text.upper() in _FUNCTIONS:
            self.advance()
            return ("call", t.text.upper(), self.arguments())
        if t.kind in ("IRIREF", "PNAME"):
            name = self.iri()
            if self.is_punct("("):
                return ("call", name.value, self.arguments())
            return ("const", name)
        raise ParseError(t.pos, "expression", t.text)

    def arguments(self) -> tuple:
        self.expect_punct("(")
        args = []
        if not self.is_punct(")"):
            args.append(self.expression())
            while self.is_punct(","):
                self.advance()
                args.append(self.expression())
        self.expect_punct(")")
        return tuple(args)

    def filter(self) -> Filter:
        self.expect_keyword("FILTER")
        self.expect_punct("(")
        if self.tok.kind == "VAR":
            v = self.var()
            self.expect_punct("=")
            value = self.constant()
        else:
            value = self.constant()
            self.expect_punct("=")
            v = self.var()
        self.expect_punct(")")
        return Filter(v, value)

    def constant(self):
        if self.tok.kind in ("IRIREF", "PNAME"):
            return self.iri()
        return self.literal()

    def where(self, q: Query):
        if self.is_keyword("WHERE"):
            self.advance()
        self.expect_punct("{")
        while not self.is_punct("}"):
            if self.tok.kind == "EOF":
                raise ParseError(self.tok.pos, "'}'")
            if self.is_keyword("FILTER"):
                q.filters.append(self.filter())
            elif self.is_keyword("BIND"):
                self.advance()
                self.expect_punct("(")
                expr = self.expression()
                self.expect_keyword("AS")
                b = Bind(expr, self.var())
                self.expect_punct(")")
                q.binds.append(b)
                q.body.append(b)
            else:
                block: List[TriplePattern] = []
                self.triples_block(block, "}")
                q.where.extend(block)
                q.body.extend(block)
            if self.is_punct("."):
                self.advance()
        self.advance()

    def query(self) -> Query:
        self.prologue()
        if self.is_keyword("SELECT"):
            self.advance()
            q = Query("SELECT", [])
            if self.is_keyword("DISTINCT"):
                self.advance()
                q.distinct = True
            while self.tok.kind == "VAR":
                q.projection.append(self.var())
            if not q.projection:
                raise ParseError(self.tok.pos, "projection variable", self.tok.text)
        elif self.is_keyword("CONSTRUCT"):
            self.advance()
            q = Query("CONSTRUCT", [])
            q.template = self.template()
        else:
            raise ParseError(self.tok.pos, "SELECT or CONSTRUCT", self.tok.text)
        self.where(q)
        q.prefixes = self.ns
        _check_scope(q)
        return q


def _check_scope(q: Query):
    in_scope = {name for p in q.where for name in p.variables()}
    in_scope |= {b.variable.name for b in q.binds}
    needed = [v.name for v in q.projection] + [f.variable.name for f in q.filters]
    needed += [name for p in q.template for name in p.variables()]
    for name in needed:
        if name not in in_scope:
            raise UnboundVariable(name)


def parse_query(text: str, ns: Optional[NamespaceMap] = None) -> Query:
    p = _Parser(text, ns)
    q = p.query()
    if p.tok.kind != "EOF":
        raise ParseError(p.tok.pos, "end of query", p.tok.text)
    return q


def parse_rules(text: str) -> List[Query]:
    """A rule file: several CONSTRUCT queries, PREFIX lines accumulating."""
    p = _Parser(text)
    queries = []
    while p.tok.kind != "EOF":
        q = p.query()
        if q.kind != "CONSTRUCT":
            raise QueryError("rule files may only contain CONSTRUCT queries")
        queries.append(q)
    return queries


# --------------------------------------------------------------------------
# Evaluation

Solution = Dict[str, object]


def _resolve(t, sol: Solution):
    if isinstance(t, Variable):
        return sol.get(t.name)
    return t


def _bind_triple(pattern: TriplePattern, triple: Triple, sol: Solution) -> Optional[Solution]:
    new = None
    for pt, value in zip(pattern, triple):
        if isinstance(pt, Variable):
            current = (new or sol).get(pt.name)
            if current is None:
                if new is None:
                    new = dict(sol)
                new[pt.name] = value
            elif current != value:
                return None
    return new if new is not None else dict(sol)


def _split_solutions(g: Graph, pattern: TriplePattern, sol: Solution) -> Iterator[Solution]:
    from .passim import split_multivalue

    subject = _resolve(pattern.subject, sol)
    if not isinstance(subject, Literal):
        return
    for item in split_multivalue(subject.lexical):
        out = _bind_triple(pattern, Triple(subject, FN_SPLIT, Literal(item)), sol)
        if out is not None:
            yield out


def _extend(g: Graph, patterns: List[TriplePattern], sol: Solution) -> Iterator[Solution]:
    if not patterns:
        yield sol
        return
    # cheapest pattern under the current bindings goes first
    best, best_count = 0, None
    for i, pat in enumerate(patterns):
        n = g.count(*(_resolve(t, sol) for t in pat))
        if best_count is None or n < best_count:
            best, best_count = i, n
            if n == 0:
                return
    pat = patterns[best]
    rest = patterns[:best] + patterns[best + 1:]
    for triple in g.match(*(_resolve(t, sol) for t in pat)):
        new = _bind_triple(pat, triple, sol)
        if new is not None:
            yield from _extend(g, rest, new)


def eval_bgp(g: Graph, patterns: List[TriplePattern],
             initial: Optional[Solution] = None) -> List[Solution]:
    """All assignments of the pattern variables that turn every pattern into a triple of g."""
    regular = [p for p in patterns if p.predicate != FN_SPLIT]
    computed = [p for p in patterns if p.predicate == FN_SPLIT]
    solutions = list(_extend(g, regular, dict(initial or {})))
    for pat in computed:
        solutions = [s2 for s in solutions for s2 in _split_solutions(g, pat, s)]
    return solutions


class _ExprError(Exception):
    pass


def _string_arg(v) -> str:
    if isinstance(v, Literal):
        return v.lexical
    raise _ExprError("expected a literal")


def _call(name: str, args: list):
    from .passim import BadDate, parse_fr_date, slugify

    if name in ("IRI", "URI"):
        (v,) = args
        if isinstance(v, Iri):
            return v
        try:
            return Iri(_string_arg(v))
        except ValueError:
            raise _ExprError("not an IRI") from None
    if name == "STR":
        (v,) = args
        if isinstance(v, Iri):
            return Literal(v.value)
        return Literal(_string_arg(v))
    if name == "CONCAT":
        return Literal("".join(_string_arg(a) for a in args))
    if name in ("STRBEFORE", "STRAFTER"):
        s, sep = (_string_arg(a) for a in args)
        idx = s.find(sep)
        if idx < 0:
            return Literal("")
        return Literal(s[:idx] if name == "STRBEFORE" else s[idx + len(sep):])
    if name == "STRDT":
        lex, dt = args
        if not isinstance(dt, Iri):
            raise _ExprError("STRDT needs a datatype IRI")
        return Literal(_string_arg(lex), datatype=dt)
    if name == "LCASE":
        return Literal(_string_arg(args[0]).lower())
    if name == "UCASE":
        return Literal(_string_arg(args[0]).upper())
    if name == FN + "slug":
        return Literal(slugify(_string_arg(args[0])))
    if name == FN + "frDate":
        try:
            d = parse_fr_date(_string_arg(args[0]))
        except BadDate:
            raise _ExprError("bad date") from None
        return Literal(d.isoformat(), datatype=Iri(XSD + "date"))
    raise _ExprError(f"unknown function {name}")


def _evaluate(expr: tuple, sol: Solution):
    kind = expr[0]
    if kind == "const":
        return expr[1]
    if kind == "var":
        v = sol.get(expr[1])
        if v is None:
            raise _ExprError("unbound variable")
        return v
    _, name, args = expr
    try:
        return _call(name, [_evaluate(a, sol) for a in args])
    except (TypeError, ValueError):
        raise _ExprError(f"bad arguments to {name}") from None


def _eval_body(g: Graph, q: Query) -> List[Solution]:
    solutions: List[Solution] = [{}]
    block: List[TriplePattern] = []

    def flush():
        nonlocal solutions
        if block:
            solutions = [s2 for s in solutions for s2 in eval_bgp(g, block, s)]
            block.clear()

    for element in q.body:
        if isinstance(element, Bind):
            flush()
            for sol in solutions:
                try:
                    sol[element.variable.name] = _evaluate(element.expression, sol)
                except _ExprError:
                    pass  # error leaves the variable unbound
        else:
            block.append(element)
    flush()
    return [s for s in solutions if all(s.get(f.variable.name) == f.value for f in q.filters)]


def _row_key(row) -> Tuple[str, ...]:
    return tuple("" if t is None else t.n3() for t in row)


def eval_select(g: Graph, q: Query) -> List[tuple]:
    """Rows of projected terms, sorted by their N-Triples form."""
    if q.kind != "SELECT":
        raise QueryError("not a SELECT query")
    names = [v.name for v in q.projection]
    rows = [tuple(sol.get(n) for n in names) for sol in _eval_body(g, q)]
    if q.distinct:
        rows = list(dict.fromkeys(rows))
    rows.sort(key=_row_key)
    return rows


def eval_construct(g: Graph, q: Query) -> Graph:
    if q.kind != "CONSTRUCT":
        raise QueryError("not a CONSTRUCT query")
    out = Graph()
    for sol in _eval_body(g, q):
        for pat in q.template:
            terms = tuple(_resolve(t, sol) for t in pat)
            if any(t is None for t in terms):
                continue
            t = Triple(*terms)
            if is_valid_triple(t):
                out.add(t)
    return out


def apply_rules(g: Graph, rules: List[Query]) -> Graph:
    out = Graph()
    for q in rules:
        out.update(eval_construct(g, q))
    return out


def run_query(g: Graph, q: Query):
    if q.kind == "SELECT":
        return eval_select(g, q)
    return eval_construct(g, q)


def format_tsv(q: Query, rows: List[tuple]) -> str:
    lines = ["\t".join(v.n3() for v in q.projection)]
    for row in rows:
        lines.append("\t".join("" if t is None else t.n3() for t in row))
    return "\n".join(lines) + "\n"
