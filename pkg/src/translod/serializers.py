"""N-Triples reading/writing and a Turtle writer."""

from __future__ import annotations

import re
from typing import Optional

from .rdf import (BlankNode, Graph, Iri, Literal, NamespaceMap, RDF_TYPE, Triple,
                  XSD, escape_string)

__all__ = ["serialize_ntriples", "parse_ntriples", "serialize_turtle", "RDFSyntaxError"]


class RDFSyntaxError(ValueError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


def serialize_ntriples(g: Graph) -> bytes:
    lines = sorted(t.n3() for t in g)
    if not lines:
        return b""
    return ("\n".join(lines) + "\n").encode("utf-8")


_IRIREF = re.compile(r"<([^<>\"{}|^`\\\x00-\x20]*)>")
_BNODE = re.compile(r"_:([A-Za-z0-9_]+)")
_STRING = re.compile(r'"((?:[^"\\\n\r]|\\.)*)"')
_LANGTAG = re.compile(r"@([A-Za-z]+(?:-[A-Za-z0-9]+)*)")
_UNESCAPES = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f",
              '"': '"', "'": "'", "\\": "\\"}


def _unescape(body: str, lineno: int) -> str:
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        nxt = body[i + 1]
        if nxt in _UNESCAPES:
            out.append(_UNESCAPES[nxt])
            i += 2
        elif nxt in "uU":
            width = 4 if nxt == "u" else 8
            digits = body[i + 2:i + 2 + width]
            if len(digits) != width or not re.fullmatch(r"[0-9A-Fa-f]+", digits):
                raise RDFSyntaxError(lineno, "bad unicode escape")
            out.append(chr(int(digits, 16)))
            i += 2 + width
        else:
            raise RDFSyntaxError(lineno, f"unknown escape \\{nxt}")
    return "".join(out)


class _LineReader:
    def __init__(self, text: str, lineno: int):
        self.text = text
        self.pos = 0
        self.lineno = lineno

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def fail(self, reason: str):
        raise RDFSyntaxError(self.lineno, f"{reason} at column {self.pos + 1}")

    def iri(self) -> Optional[Iri]:
        m = _IRIREF.match(self.text, self.pos)
        if not m:
            return None
        self.pos = m.end()
        try:
            return Iri(_unescape(m.group(1), self.lineno))
        except ValueError as exc:
            raise RDFSyntaxError(self.lineno, str(exc)) from None

    def bnode(self) -> Optional[BlankNode]:
        m = _BNODE.match(self.text, self.pos)
        if not m:
            return None
        self.pos = m.end()
        return BlankNode(m.group(1))

    def literal(self) -> Optional[Literal]:
        m = _STRING.match(self.text, self.pos)
        if not m:
            return None
        self.pos = m.end()
        lexical = _unescape(m.group(1), self.lineno)
        if self.text.startswith("^^", self.pos):
            self.pos += 2
            dt = self.iri()
            if dt is None:
                self.fail("expected datatype IRI")
            return Literal(lexical, datatype=dt)
        lm = _LANGTAG.match(self.text, self.pos)
        if lm:
            self.pos = lm.end()
            return Literal(lexical, lang=lm.group(1))
        return Literal(lexical)

    def term(self, allowed: str):
        self.skip_ws()
        for kind in allowed:
            t = {"i": self.iri, "b": self.bnode, "l": self.literal}[kind]()
            if t is not None:
                return t
        names = {"i": "IRI", "b": "blank node", "l": "literal"}
        self.fail("expected " + " or ".join(names[k] for k in allowed))


def parse_ntriples(data: bytes) -> Graph:
    """Parse an N-Triples document; any malformed line raises RDFSyntaxError."""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise RDFSyntaxError(0, f"invalid UTF-8: {exc}") from None
    g = Graph()
    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        stripped = line.strip(" \t")
        if not stripped or stripped.startswith("#"):
            continue
        r = _LineReader(line, lineno)
        s = r.term("ib")
        p = r.term("i")
        o = r.term("ibl")
        r.skip_ws()
        if not r.text.startswith(".", r.pos):
            r.fail("missing terminal '.'")
        r.pos += 1
        r.skip_ws()
        if r.pos < len(r.text) and r.text[r.pos] != "#":
            r.fail("trailing content")
        g.add(Triple(s, p, o))
    return g


_LOCAL_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_\-]*$")


class _Compactor:
    def __init__(self, ns: NamespaceMap):
        # longest namespace first so the most specific binding wins
        self._bindings = sorted(ns.items(), key=lambda kv: (-len(kv[1]), kv[0]))
        self.used: dict = {}

    def iri(self, iri: Iri) -> str:
        for prefix, namespace in self._bindings:
            if iri.value.startswith(namespace):
                local = iri.value[len(namespace):]
                if _LOCAL_NAME.match(local):
                    self.used[prefix] = namespace
                    return f"{prefix}:{local}"
        return iri.n3()

    def term(self, t) -> str:
        if isinstance(t, Iri):
            return self.iri(t)
        if isinstance(t, Literal):
            text = '"' + escape_string(t.lexical) + '"'
            if t.lang:
                return f"{text}@{t.lang}"
            if t.datatype is not None:
                return f"{text}^^{self.iri(t.datatype)}"
            return text
        return t.n3()


def serialize_turtle(g: Graph, ns: Optional[NamespaceMap] = None) -> bytes:
    """Turtle with one block per subject; only prefixes actually used are declared."""
    ns = ns if ns is not None else NamespaceMap()
    c = _Compactor(ns)
    by_subject: dict = {}
    for t in g.sorted_triples():
        by_subject.setdefault(t.subject, []).append(t)

    blocks = []
    for subject in sorted(by_subject, key=lambda s: s.n3()):
        triples = by_subject[subject]
        # rdf:type first, written as 'a'
        triples.sort(key=lambda t: (t.predicate != RDF_TYPE, t.n3()))
        lines = [c.term(subject)]
        for i, t in enumerate(triples):
            pred = "a" if t.predicate == RDF_TYPE else c.term(t.predicate)
            end = " ." if i == len(triples) - 1 else " ;"
            lines.append(f"    {pred} {c.term(t.object)}{end}")
        blocks.append("\n".join(lines))

    head = [f"@prefix {p}: <{n}> ." for p, n in sorted(c.used.items())]
    parts = []
    if head:
        parts.append("\n".join(head))
    parts.extend(blocks)
    if not parts:
        return b""
    return ("\n\n".join(parts) + "\n").encode("utf-8")


def xsd(local: str) -> Iri:
    return Iri(XSD + local)
