"""NEPTUNE (Chouette) line descriptions: XML subset parsing and RDF mapping."""

from __future__ import annotations

import datetime as _dt
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import List, Optional, Tuple

from .rdf import NEPTUNE, RDF_TYPE, XSD, Graph, Iri, Literal, Triple


class NeptuneError(ValueError):
    pass


class XmlSyntaxError(NeptuneError):
    def __init__(self, position: Tuple[int, int], message: str = ""):
        super().__init__(f"malformed XML at line {position[0]}, column {position[1]}: {message}")
        self.position = position


class MissingField(NeptuneError):
    def __init__(self, element: str, field_name: str):
        super().__init__(f"{element} lacks required field {field_name}")
        self.element = element
        self.field = field_name


class RangeError(NeptuneError):
    pass


@dataclass
class StopPoint:
    object_id: str
    longitude: Decimal
    latitude: Decimal
    longitude_text: str
    latitude_text: str
    object_version: Optional[int] = None
    creation_time: Optional[_dt.datetime] = None
    creation_time_text: Optional[str] = None
    long_lat_type: Optional[str] = None
    name: Optional[str] = None


@dataclass
class GenericElement:
    tag: str
    children: List[Tuple[str, str]] = field(default_factory=list)
    object_id: Optional[str] = None


@dataclass
class LineDescription:
    stop_points: List[StopPoint] = field(default_factory=list)
    other_elements: List[GenericElement] = field(default_factory=list)


@dataclass
class NeptuneDocument:
    line_descriptions: List[LineDescription] = field(default_factory=list)
    source_file: str = ""
    # direct children of the root other than line descriptions (PTNetwork, Company, ...)
    network_elements: List[GenericElement] = field(default_factory=list)


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _child_text(el, name: str) -> Optional[str]:
    for child in el:
        if _local(child.tag) == name:
            return (child.text or "").strip()
    return None


def _coordinate(el, name: str, limit: int) -> Tuple[Decimal, str]:
    text = _child_text(el, name)
    if not text:
        raise MissingField("StopPoint", name)
    try:
        value = Decimal(text)
    except InvalidOperation:
        raise NeptuneError(f"StopPoint {name} is not a decimal: {text!r}") from None
    if not value.is_finite() or not -limit <= value <= limit:
        raise RangeError(f"StopPoint {name} {text} outside [-{limit}, {limit}]")
    return value, text


def _parse_timestamp(text: str) -> _dt.datetime:
    # fromisoformat before 3.11 rejects a trailing Z
    return _dt.datetime.fromisoformat(text[:-1] + "+00:00" if text.endswith("Z") else text)


def _stop_point(el) -> StopPoint:
    object_id = _child_text(el, "objectId")
    if not object_id:
        raise MissingField("StopPoint", "objectId")
    lon, lon_text = _coordinate(el, "longitude", 180)
    lat, lat_text = _coordinate(el, "latitude", 90)
    sp = StopPoint(object_id, lon, lat, lon_text, lat_text)

    version = _child_text(el, "objectVersion")
    if version:
        if not version.isdigit():
            raise NeptuneError(f"objectVersion must be a non-negative integer, got {version!r}")
        sp.object_version = int(version)
    created = _child_text(el, "creationTime")
    if created:
        try:
            sp.creation_time = _parse_timestamp(created)
        except ValueError:
            raise NeptuneError(f"bad creationTime {created!r}") from None
        sp.creation_time_text = created
    sp.long_lat_type = _child_text(el, "longLatType") or None
    sp.name = _child_text(el, "name") or None
    return sp


def _generic(el) -> GenericElement:
    g = GenericElement(_local(el.tag))
    for child in el:
        if len(child) == 0:
            g.children.append((_local(child.tag), (child.text or "").strip()))
    g.object_id = _child_text(el, "objectId") or None
    return g


def parse_neptune_xml(data: bytes, source_file: str = "") -> NeptuneDocument:
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise XmlSyntaxError(exc.position, str(exc)) from None
    if _local(root.tag) != "ChouettePTNetwork":
        raise NeptuneError(f"root element must be ChouettePTNetwork, got {_local(root.tag)}")

    doc = NeptuneDocument(source_file=source_file)
    for child in root:
        if _local(child.tag) != "ChouetteLineDescription":
            doc.network_elements.append(_generic(child))
            continue
        line = LineDescription()
        for el in child:
            if _local(el.tag) == "StopPoint":
                line.stop_points.append(_stop_point(el))
            else:
                line.other_elements.append(_generic(el))
        doc.line_descriptions.append(line)
    return doc


def mint_iri_from_objectid(object_id: str, base: str) -> Iri:
    if not object_id:
        raise ValueError("empty objectId")
    return Iri(f"{base}neptune/{object_id.replace(':', '/')}")


def _n(local: str) -> Iri:
    return Iri(NEPTUNE + local)


def _typed(text: str, dt: str) -> Literal:
    return Literal(text, datatype=Iri(XSD + dt))


def stop_point_triples(sp: StopPoint, base: str) -> List[Triple]:
    s = mint_iri_from_objectid(sp.object_id, base)
    out = [Triple(s, RDF_TYPE, _n("StopPoint"))]
    if sp.object_version is not None:
        out.append(Triple(s, _n("objectVersion"), _typed(str(sp.object_version), "integer")))
    if sp.creation_time_text:
        out.append(Triple(s, _n("creationTime"), _typed(sp.creation_time_text, "dateTime")))
    # lexical forms straight from the source, no float round trip
    out.append(Triple(s, _n("longitude"), _typed(sp.longitude_text, "decimal")))
    out.append(Triple(s, _n("latitude"), _typed(sp.latitude_text, "decimal")))
    if sp.long_lat_type:
        out.append(Triple(s, _n("longLatType"), Literal(sp.long_lat_type)))
    if sp.name:
        out.append(Triple(s, _n("name"), Literal(sp.name)))
    return out


def generic_triples(el: GenericElement, base: str) -> List[Triple]:
    if not el.object_id:
        return []
    s = mint_iri_from_objectid(el.object_id, base)
    out = [Triple(s, RDF_TYPE, _n(el.tag))]
    for name, text in el.children:
        if text:
            out.append(Triple(s, _n(name), Literal(text)))
    return out


def neptune_to_rdf(doc: NeptuneDocument, base: str) -> Graph:
    base = str(base)
    g = Graph()
    for el in doc.network_elements:
        g.update(generic_triples(el, base))
    for line in doc.line_descriptions:
        for sp in line.stop_points:
            g.update(stop_point_triples(sp, base))
        for el in line.other_elements:
            g.update(generic_triples(el, base))
    return g
