"""Identity-link discovery against a local gazetteer."""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Tuple

from .kernels import haversine_km, levenshtein_distance
from .rdf import OWL, RDF_TYPE, Graph, Iri, Literal, NamespaceMap, Triple

KINDS = ("city", "department", "region")
OWL_SAME_AS = Iri(OWL + "sameAs")


class GazetteerError(ValueError):
    pass


class LinkSpecError(ValueError):
    pass


def normalize_label(s: str) -> str:
    s = unicodedata.normalize("NFKD", s.lower())
    s = "".join(ch for ch in s if not unicodedata.combining(ch))
    s = re.sub(r"[-‐‑–'’]", " ", s)
    return " ".join(s.split())


def levenshtein_similarity(a: str, b: str) -> float:
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein_distance(a, b) / longest


@dataclass(frozen=True)
class GazetteerEntry:
    iri: Iri
    name: str
    kind: str
    latitude: Optional[float] = None
    longitude: Optional[float] = None
    insee_code: Optional[str] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if (self.latitude is None) != (self.longitude is None):
            raise ValueError("latitude and longitude go together")
        if self.latitude is not None:
            if not -90 <= self.latitude <= 90 or not -180 <= self.longitude <= 180:
                raise ValueError("coordinates out of range")

    @property
    def has_coordinates(self) -> bool:
        return self.latitude is not None


@dataclass
class Gazetteer:
    entries: List[GazetteerEntry] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for e in self.entries:
            if e.iri in seen:
                raise GazetteerError(f"duplicate gazetteer IRI {e.iri.value}")
            seen.add(e.iri)

    @classmethod
    def parse(cls, data: bytes) -> "Gazetteer":
        """Read the ``iri;name;kind;lat;lon;insee_code`` file format."""
        lines = [l.rstrip("\r") for l in data.decode("utf-8-sig").split("\n")]
        header = [h.strip() for h in lines[0].split(";")] if lines else []
        if header != ["iri", "name", "kind", "lat", "lon", "insee_code"]:
            raise GazetteerError("missing or wrong header line")
        entries = []
        for lineno, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            cells = [c.strip() for c in line.split(";")]
            if len(cells) != 6:
                raise GazetteerError(f"line {lineno}: expected 6 fields, got {len(cells)}")
            iri, name, kind, lat, lon, code = cells
            try:
                entries.append(GazetteerEntry(
                    Iri(iri), name, kind,
                    float(lat) if lat else None,
                    float(lon) if lon else None,
                    code or None,
                ))
            except ValueError as exc:
                raise GazetteerError(f"line {lineno}: {exc}") from None
        return cls(entries)

    @classmethod
    def load(cls, path) -> "Gazetteer":
        with open(path, "rb") as fh:
            return cls.parse(fh.read())


@dataclass
class LinkSpec:
    source_class: Iri
    source_label_property: Iri
    target_kind: str
    name_threshold: float
    source_geo_properties: Optional[Tuple[Iri, Iri]] = None
    geo_threshold_km: Optional[float] = None
    link_predicate: Iri = OWL_SAME_AS

    def __post_init__(self):
        if not 0.0 <= self.name_threshold <= 1.0:
            raise LinkSpecError("name_threshold must lie in [0, 1]")
        if self.geo_threshold_km is not None and self.geo_threshold_km < 0:
            raise LinkSpecError("geo_threshold_km must be non-negative")
        if self.target_kind not in KINDS:
            raise LinkSpecError(f"target_kind must be one of {KINDS}")

    @classmethod
    def parse(cls, text: str, ns: Optional[NamespaceMap] = None) -> "LinkSpec":
        ns = ns or NamespaceMap()
        values = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise LinkSpecError(f"line {lineno}: expected key = value")
            key, value = (x.strip() for x in line.split("=", 1))
            values[key] = value

        def iri(v: str) -> Iri:
            if v.startswith("<") and v.endswith(">"):
                return Iri(v[1:-1])
            prefix = v.split(":", 1)[0]
            if prefix in ns:
                return ns.expand(v)
            return Iri(v)

        known = {"source_class", "source_label_property", "source_geo_properties", "target_kind",
                 "name_threshold", "geo_threshold_km", "link_predicate", "aggregation"}
        unknown = set(values) - known
        if unknown:
            raise LinkSpecError(f"unknown keys: {', '.join(sorted(unknown))}")
        try:
            geo = values.get("source_geo_properties")
            geo_pair = None
            if geo:
                parts = geo.split()
                if len(parts) != 2:
                    raise LinkSpecError("source_geo_properties needs a latitude and a longitude property")
                geo_pair = (iri(parts[0]), iri(parts[1]))
            if values.get("aggregation", "and") != "and":
                raise LinkSpecError("only conjunctive ('and') aggregation is supported")
            return cls(
                source_class=iri(values["source_class"]),
                source_label_property=iri(values["source_label_property"]),
                target_kind=values["target_kind"],
                name_threshold=float(values["name_threshold"]),
                source_geo_properties=geo_pair,
                geo_threshold_km=float(values["geo_threshold_km"]) if values.get("geo_threshold_km") else None,
                link_predicate=iri(values["link_predicate"]) if values.get("link_predicate") else OWL_SAME_AS,
            )
        except KeyError as exc:
            raise LinkSpecError(f"missing key {exc.args[0]}") from None
        except ValueError as exc:
            if isinstance(exc, LinkSpecError):
                raise
            raise LinkSpecError(str(exc)) from None


class Link(NamedTuple):
    source: Iri
    target: Iri
    score: float
    predicate: Iri


class LinkResult(NamedTuple):
    graph: Graph
    links: List[Link]
    skipped: int  # source subjects without any label


def _coordinates(g: Graph, subject, props) -> Optional[Tuple[float, float]]:
    if props is None:
        return None
    lat = g.value(subject, props[0])
    lon = g.value(subject, props[1])
    if not isinstance(lat, Literal) or not isinstance(lon, Literal):
        return None
    try:
        return float(lat.lexical), float(lon.lexical)
    except ValueError:
        return None


def _best_similarity(labels: List[str], name: str, threshold: float) -> float:
    best = -1.0
    for label in labels:
        longest = max(len(label), len(name))
        # the length gap bounds the edit distance from below
        if longest and 1.0 - abs(len(label) - len(name)) / longest < threshold:
            continue
        best = max(best, levenshtein_similarity(label, name))
    return best


def discover_links(source: Graph, gaz: Gazetteer, spec: LinkSpec) -> LinkResult:
    targets = [(e, normalize_label(e.name)) for e in gaz.entries if e.kind == spec.target_kind]
    subjects = sorted(source.subjects(RDF_TYPE, spec.source_class), key=lambda s: s.n3())

    links: List[Link] = []
    skipped = 0
    for subject in subjects:
        if not isinstance(subject, Iri):
            continue
        labels = sorted({normalize_label(o.lexical)
                         for o in source.objects(subject, spec.source_label_property)
                         if isinstance(o, Literal)})
        if not labels:
            skipped += 1
            continue
        coords = _coordinates(source, subject, spec.source_geo_properties)
        for entry, name in targets:
            score = _best_similarity(labels, name, spec.name_threshold)
            if score < spec.name_threshold:
                continue
            if spec.geo_threshold_km is not None and coords and entry.has_coordinates:
                d = haversine_km(coords[0], coords[1], entry.latitude, entry.longitude)
                if d > spec.geo_threshold_km:
                    continue
            links.append(Link(subject, entry.iri, score, spec.link_predicate))

    links.sort(key=lambda l: (l.source.n3(), l.target.n3()))
    g = Graph(Triple(l.source, l.predicate, l.target) for l in links)
    return LinkResult(g, links, skipped)
