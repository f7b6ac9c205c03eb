"""RDF terms, triples, namespaces and an in-memory indexed graph."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Optional, Union

__all__ = [
    "Iri", "Literal", "BlankNode", "Term", "Triple", "Graph", "NamespaceMap",
    "RDF", "RDFS", "OWL", "XSD", "VOID", "DCTERMS", "PASSIM", "NEPTUNE",
    "RDF_TYPE", "InvalidPosition", "UnknownPrefix", "expand_qname",
]

_SCHEME = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")
_IRI_FORBIDDEN = re.compile(r'[\s<>"{}|\\^`]')
_BNODE_LABEL = re.compile(r"^[A-Za-z0-9_]+$")


class InvalidPosition(ValueError):
    """A term was used in a triple position RDF does not allow."""


class UnknownPrefix(KeyError):
    def __init__(self, prefix: str):
        super().__init__(prefix)
        self.prefix = prefix

    def __str__(self):
        return f"unknown prefix {self.prefix!r}"


@dataclass(frozen=True, slots=True)
class Iri:
    value: str

    def __post_init__(self):
        if not self.value or not _SCHEME.match(self.value):
            raise ValueError(f"not an absolute IRI: {self.value!r}")
        if _IRI_FORBIDDEN.search(self.value):
            raise ValueError(f"illegal character in IRI: {self.value!r}")

    def n3(self) -> str:
        return f"<{self.value}>"

    def __str__(self):
        return self.value


@dataclass(frozen=True, slots=True)
class Literal:
    lexical: str
    lang: Optional[str] = None
    datatype: Optional[Iri] = None

    def __post_init__(self):
        if self.lang is not None and self.datatype is not None:
            raise ValueError("a literal cannot carry both a language tag and a datatype")
        if self.lang is not None:
            if not re.match(r"^[A-Za-z]+(-[A-Za-z0-9]+)*$", self.lang):
                raise ValueError(f"bad language tag: {self.lang!r}")
            object.__setattr__(self, "lang", self.lang.lower())

    def n3(self) -> str:
        text = '"' + escape_string(self.lexical) + '"'
        if self.lang:
            return f"{text}@{self.lang}"
        if self.datatype is not None:
            return f"{text}^^{self.datatype.n3()}"
        return text

    def __str__(self):
        return self.lexical


@dataclass(frozen=True, slots=True)
class BlankNode:
    label: str

    def __post_init__(self):
        if not _BNODE_LABEL.match(self.label):
            raise ValueError(f"bad blank node label: {self.label!r}")

    def n3(self) -> str:
        return f"_:{self.label}"


Term = Union[Iri, Literal, BlankNode]


_ESCAPES = {'"': '\\"', "\\": "\\\\", "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def escape_string(s: str) -> str:
    out = []
    for ch in s:
        if ch in _ESCAPES:
            out.append(_ESCAPES[ch])
        elif ord(ch) < 0x20 or ord(ch) == 0x7F:
            # other control characters would break the line-based format
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


class Triple(NamedTuple):
    subject: Term
    predicate: Term
    object: Term

    def n3(self) -> str:
        return f"{self.subject.n3()} {self.predicate.n3()} {self.object.n3()} ."


def check_triple(t: Triple) -> None:
    if not isinstance(t.subject, (Iri, BlankNode)):
        raise InvalidPosition(f"subject must be an IRI or blank node, got {t.subject!r}")
    if not isinstance(t.predicate, Iri):
        raise InvalidPosition(f"predicate must be an IRI, got {t.predicate!r}")
    if not isinstance(t.object, (Iri, Literal, BlankNode)):
        raise InvalidPosition(f"object must be an RDF term, got {t.object!r}")


def is_valid_triple(t: Triple) -> bool:
    try:
        check_triple(t)
    except InvalidPosition:
        return False
    return True


RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
OWL = "http://www.w3.org/2002/07/owl#"
XSD = "http://www.w3.org/2001/XMLSchema#"
VOID = "http://rdfs.org/ns/void#"
DCTERMS = "http://purl.org/dc/terms/"
PASSIM = "http://data.lirmm.fr/ontologies/passim#"
NEPTUNE = "http://data.lirmm.fr/ontologies/neptune#"

RDF_TYPE = Iri(RDF + "type")

BUILTIN_PREFIXES = {
    "rdf": RDF,
    "rdfs": RDFS,
    "owl": OWL,
    "xsd": XSD,
    "void": VOID,
    "dcterms": DCTERMS,
    "passim": PASSIM,
    "neptune": NEPTUNE,
}


class NamespaceMap:
    """Prefix bindings; the built-in vocabularies are always bound."""

    def __init__(self, bindings: Optional[dict] = None):
        self._bindings = dict(BUILTIN_PREFIXES)
        for prefix, ns in (bindings or {}).items():
            self.bind(prefix, ns)

    def bind(self, prefix: str, namespace) -> None:
        ns = namespace.value if isinstance(namespace, Iri) else str(namespace)
        Iri(ns)
        self._bindings[prefix] = ns

    def overlay(self, bindings: dict) -> "NamespaceMap":
        ns = NamespaceMap(self._bindings)
        for prefix, value in bindings.items():
            ns.bind(prefix, value)
        return ns

    def __getitem__(self, prefix: str) -> str:
        try:
            return self._bindings[prefix]
        except KeyError:
            raise UnknownPrefix(prefix) from None

    def __contains__(self, prefix: str) -> bool:
        return prefix in self._bindings

    def items(self):
        return self._bindings.items()

    def expand(self, qname: str) -> Iri:
        return expand_qname(qname, self)


def expand_qname(qname: str, ns: Optional[NamespaceMap] = None) -> Iri:
    ns = ns if ns is not None else NamespaceMap()
    if qname.count(":") != 1:
        raise ValueError(f"not a prefixed name: {qname!r}")
    prefix, local = qname.split(":")
    return Iri(ns[prefix] + local)


class FrozenGraphError(RuntimeError):
    pass


def _n_triples_key(t: Triple) -> str:
    return t.n3()


class Graph:
    """A set of triples indexed three ways (SPO, POS, OSP).

    Each index is a dict of dicts of insertion-ordered dicts, so iteration
    order is deterministic for a given insertion sequence.
    """

    def __init__(self, triples: Iterable[Triple] = ()):
        self._spo: dict = {}
        self._pos: dict = {}
        self._osp: dict = {}
        self._size = 0
        self._frozen = False
        for t in triples:
            self.add(t)

    @staticmethod
    def _put(index, a, b, c) -> bool:
        level = index.setdefault(a, {}).setdefault(b, {})
        if c in level:
            return False
        level[c] = None
        return True

    def add(self, triple: Triple) -> "Graph":
        if self._frozen:
            raise FrozenGraphError("graph is frozen")
        t = Triple(*triple)
        check_triple(t)
        s, p, o = t
        if self._put(self._spo, s, p, o):
            self._put(self._pos, p, o, s)
            self._put(self._osp, o, s, p)
            self._size += 1
        return self

    def update(self, triples: Iterable[Triple]) -> "Graph":
        for t in triples:
            self.add(t)
        return self

    def freeze(self) -> "Graph":
        self._frozen = True
        return self

    @property
    def frozen(self) -> bool:
        return self._frozen

    def __len__(self):
        return self._size

    def __iter__(self) -> Iterator[Triple]:
        return self.match()

    def __contains__(self, triple) -> bool:
        s, p, o = triple
        return o in self._spo.get(s, {}).get(p, ())

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return len(self) == len(other) and all(t in other for t in self)

    def __repr__(self):
        return f"<Graph with {self._size} triples>"

    def copy(self) -> "Graph":
        return Graph(self)

    def __or__(self, other: "Graph") -> "Graph":
        return Graph(self).update(other)

    def match(self, s: Optional[Term] = None, p: Optional[Term] = None,
              o: Optional[Term] = None) -> Iterator[Triple]:
        """Yield the triples matching every bound position."""
        if s is not None:
            by_p = self._spo.get(s)
            if not by_p:
                return
            if p is not None:
                objs = by_p.get(p, {})
                if o is not None:
                    if o in objs:
                        yield Triple(s, p, o)
                else:
                    for obj in objs:
                        yield Triple(s, p, obj)
            elif o is not None:
                for pred in self._osp.get(o, {}).get(s, {}):
                    yield Triple(s, pred, o)
            else:
                for pred, objs in by_p.items():
                    for obj in objs:
                        yield Triple(s, pred, obj)
        elif p is not None:
            by_o = self._pos.get(p)
            if not by_o:
                return
            if o is not None:
                for subj in by_o.get(o, {}):
                    yield Triple(subj, p, o)
            else:
                for obj, subjs in by_o.items():
                    for subj in subjs:
                        yield Triple(subj, p, obj)
        elif o is not None:
            for subj, preds in self._osp.get(o, {}).items():
                for pred in preds:
                    yield Triple(subj, pred, o)
        else:
            for subj, by_p in self._spo.items():
                for pred, objs in by_p.items():
                    for obj in objs:
                        yield Triple(subj, pred, obj)

    def count(self, s=None, p=None, o=None) -> int:
        """Number of matches, answered from index sizes where possible."""
        if s is None and p is None and o is None:
            return self._size
        if s is not None and p is not None and o is None:
            return len(self._spo.get(s, {}).get(p, ()))
        if p is not None and o is not None and s is None:
            return len(self._pos.get(p, {}).get(o, ()))
        if o is not None and s is not None and p is None:
            return len(self._osp.get(o, {}).get(s, ()))
        if s is not None and p is None and o is None:
            return sum(len(c) for c in self._spo.get(s, {}).values())
        if p is not None and s is None and o is None:
            return sum(len(c) for c in self._pos.get(p, {}).values())
        if o is not None and s is None and p is None:
            return sum(len(c) for c in self._osp.get(o, {}).values())
        return sum(1 for _ in self.match(s, p, o))

    def subjects(self, p=None, o=None) -> Iterator[Term]:
        seen = set()
        for t in self.match(None, p, o):
            if t.subject not in seen:
                seen.add(t.subject)
                yield t.subject

    def objects(self, s=None, p=None) -> Iterator[Term]:
        for t in self.match(s, p, None):
            yield t.object

    def value(self, s, p) -> Optional[Term]:
        return next(self.objects(s, p), None)

    def sorted_triples(self) -> list:
        return sorted(self, key=_n_triples_key)

    def index_views(self) -> tuple:
        """Enumerate each index back into (s, p, o) sets; used to check coherence."""
        spo = {(s, p, o) for s, b in self._spo.items() for p, c in b.items() for o in c}
        pos = {(s, p, o) for p, b in self._pos.items() for o, c in b.items() for s in c}
        osp = {(s, p, o) for o, b in self._osp.items() for s, c in b.items() for p in c}
        return spo, pos, osp
