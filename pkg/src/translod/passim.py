"""Passim directory: semicolon-separated export to RDF.

Two conversion paths are provided. ``record_to_raw_rdf`` mirrors the CSV
cell for cell under a raw namespace, to be reshaped by the CONSTRUCT rules
shipped in ``rules/passim.rq``. ``record_to_ontology_rdf`` goes straight to
the Passim vocabulary and serves as the reference for those rules.
"""

from __future__ import annotations

import datetime as _dt
import re
import unicodedata
from dataclasses import dataclass, field
from importlib import resources
from typing import List, Optional, Tuple

from .rdf import PASSIM, RDF_TYPE, XSD, Graph, Iri, Literal, Triple

RAW = "http://data.lirmm.fr/ontologies/passim-raw#"
RAW_ROW = Iri(RAW + "Row")

# Translated header, record attribute. Order is the column order of the export.
COLUMNS: List[Tuple[str, str]] = [
    ("Sheet number", "sheet_number"),
    ("Service Name", "service_name"),
    ("Coverage service", "coverage_level"),
    ("Region", "region"),
    ("Department", "department"),
    ("City", "city"),
    ("Modes of transport", "modes"),
    ("Type of service", "service_types"),
    ("Network accessibility for disabled person", "network_accessible"),
    ("Land informations", "land_information"),
    ("Website", "website"),
    ("Website accessibility for disabled person", "website_accessible"),
    ("Information points", "information_points"),
    ("Remark", "remark"),
    ("Comments", "comments"),
    ("Sms", "sms"),
    ("Mobile application", "mobile_application"),
    ("List of cities covered (Postal code)", "cities_covered"),
    ("Sheet created", "created"),
    ("Sheet modified", "modified"),
]
N_COLUMNS = len(COLUMNS)
MULTI_VALUED = ("modes", "service_types", "cities_covered")
DATE_FIELDS = ("created", "modified")


class BadDate(ValueError):
    pass


class PassimDecodeError(ValueError):
    pass


@dataclass(frozen=True)
class RowError:
    line: int
    reason: str


@dataclass
class PassimRecord:
    sheet_number: int
    service_name: str = ""
    coverage_level: str = ""
    region: str = ""
    department: str = ""
    city: str = ""
    modes: List[str] = field(default_factory=list)
    service_types: List[str] = field(default_factory=list)
    network_accessible: str = ""
    land_information: str = ""
    website: str = ""
    website_accessible: str = ""
    information_points: str = ""
    remark: str = ""
    comments: str = ""
    sms: str = ""
    mobile_application: str = ""
    cities_covered: List[str] = field(default_factory=list)
    created: Optional[_dt.date] = None
    modified: Optional[_dt.date] = None
    # original cell text, when the record came from a file
    raw_cells: Optional[Tuple[str, ...]] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.sheet_number <= 0:
            raise ValueError("sheet number must be positive")
        if self.created and self.modified and self.created > self.modified:
            raise ValueError("sheet modified before it was created")
        for name in MULTI_VALUED:
            if any(not v for v in getattr(self, name)):
                raise ValueError(f"{name} contains an empty element")

    def cells(self) -> Tuple[str, ...]:
        """The 20 cell strings of this record, as they appear (or would appear) in the export."""
        if self.raw_cells is not None:
            return self.raw_cells
        out = []
        for _, name in COLUMNS:
            value = getattr(self, name)
            if name in MULTI_VALUED:
                out.append(", ".join(value))
            elif name in DATE_FIELDS:
                out.append(value.strftime("%d/%m/%Y") if value else "")
            else:
                out.append(str(value))
        return tuple(out)


def split_multivalue(cell: str) -> List[str]:
    return [part.strip() for part in cell.split(",") if part.strip()]


_FR_DATE = re.compile(r"^(\d{2})/(\d{2})/(\d{4})$")


def parse_fr_date(cell: str) -> _dt.date:
    """Parse a day-first ``dd/mm/yyyy`` date."""
    m = _FR_DATE.match(cell.strip())
    if not m:
        raise BadDate(f"expected dd/mm/yyyy, got {cell!r}")
    day, month, year = (int(x) for x in m.groups())
    try:
        return _dt.date(year, month, day)
    except ValueError as exc:
        raise BadDate(f"impossible date {cell!r}: {exc}") from None


def _record_from_cells(cells: List[str]) -> PassimRecord:
    values = {}
    for (_, name), cell in zip(COLUMNS, cells):
        if name == "sheet_number":
            if not cell.isdigit() or int(cell) == 0:
                raise ValueError(f"sheet number must be a positive integer, got {cell!r}")
            values[name] = int(cell)
        elif name in MULTI_VALUED:
            values[name] = split_multivalue(cell)
        elif name in DATE_FIELDS:
            values[name] = parse_fr_date(cell) if cell else None
        else:
            values[name] = cell
    return PassimRecord(**values, raw_cells=tuple(cells))


def parse_passim_csv(data: bytes) -> Tuple[List[PassimRecord], List[RowError]]:
    """Parse the export, collecting malformed rows instead of stopping on them."""
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise PassimDecodeError(f"input is not valid UTF-8: {exc}") from None

    records: List[PassimRecord] = []
    errors: List[RowError] = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            continue
        cells = [c.strip() for c in line.split(";")]
        if lineno == 1 and not cells[0].isdigit():
            continue  # header
        if len(cells) != N_COLUMNS:
            errors.append(RowError(lineno, f"expected {N_COLUMNS} fields, got {len(cells)}"))
            continue
        if cells[5] == "N/A":
            cells[5] = ""
        try:
            records.append(_record_from_cells(cells))
        except ValueError as exc:
            errors.append(RowError(lineno, str(exc)))
    return records, errors


def header_to_local(header: str) -> str:
    """'Modes of transport' -> 'modesOfTransport'."""
    words = re.findall(r"[A-Za-z0-9]+", header)
    return words[0].lower() + "".join(w[:1].upper() + w[1:].lower() for w in words[1:])


RAW_PROPERTIES = [Iri(RAW + header_to_local(h)) for h, _ in COLUMNS]


def slugify(text: str) -> str:
    folded = unicodedata.normalize("NFKD", text)
    folded = "".join(ch for ch in folded if not unicodedata.combining(ch))
    folded = folded.encode("ascii", "ignore").decode("ascii").lower()
    return re.sub(r"[^a-z0-9]+", "-", folded).strip("-")


def raw_row_iri(sheet_number: int, base: str) -> Iri:
    return Iri(f"{base}raw/passim/{sheet_number}")


def record_to_raw_rdf(r: PassimRecord, base: str) -> Graph:
    """One literal per non-empty cell; the sheet number lives in the row IRI."""
    row = raw_row_iri(r.sheet_number, str(base))
    g = Graph([Triple(row, RDF_TYPE, RAW_ROW)])
    for prop, cell in zip(RAW_PROPERTIES[1:], r.cells()[1:]):
        if cell:
            g.add(Triple(row, prop, Literal(cell)))
    return g


class PassimVocabulary:
    """The Passim ontology terms used by the converters."""

    TransportServiceInformation = Iri(PASSIM + "TransportServiceInformation")
    Mode = Iri(PASSIM + "Mode")
    Service = Iri(PASSIM + "Service")
    Coverage = Iri(PASSIM + "Coverage")

    classes = (TransportServiceInformation, Mode, Service, Coverage)

    # scalar record attribute -> property local name
    scalar_properties = {
        "service_name": "serviceName",
        "network_accessible": "networkAccessibility",
        "land_information": "landInformation",
        "website": "website",
        "website_accessible": "websiteAccessibility",
        "information_points": "informationPoints",
        "remark": "remark",
        "comments": "comments",
        "sms": "sms",
        "mobile_application": "mobileApplication",
    }
    coverage_properties = {
        "coverage_level": "coverageLevel",
        "region": "region",
        "department": "department",
        "city": "city",
    }
    date_properties = {"created": "created", "modified": "modified"}
    link_properties = ("coverage", "transportMode", "serviceType")
    other_properties = ("cityThrough", "name")

    @classmethod
    def properties(cls) -> Tuple[Iri, ...]:
        names = (list(cls.scalar_properties.values()) + list(cls.coverage_properties.values())
                 + list(cls.date_properties.values()) + list(cls.link_properties)
                 + list(cls.other_properties))
        return tuple(Iri(PASSIM + n) for n in names)

    @classmethod
    def predicates(cls) -> frozenset:
        """Every predicate the ontology converter may emit, rdf:type included."""
        return frozenset(cls.properties()) | {RDF_TYPE}


def _p(local: str) -> Iri:
    return Iri(PASSIM + local)


def service_iri(sheet_number: int, base: str) -> Iri:
    return Iri(f"{base}passim/service/{sheet_number}")


def record_to_ontology_rdf(r: PassimRecord, base: str) -> Graph:
    base = str(base)
    V = PassimVocabulary
    svc = service_iri(r.sheet_number, base)
    cov = Iri(f"{base}passim/coverage/{r.sheet_number}")
    g = Graph()
    g.add(Triple(svc, RDF_TYPE, V.TransportServiceInformation))
    g.add(Triple(svc, _p("coverage"), cov))
    g.add(Triple(cov, RDF_TYPE, V.Coverage))

    for attr, local in V.scalar_properties.items():
        value = getattr(r, attr)
        if value:
            g.add(Triple(svc, _p(local), Literal(value)))
    for attr, local in V.coverage_properties.items():
        value = getattr(r, attr)
        if value:
            g.add(Triple(cov, _p(local), Literal(value)))
    for attr, local in V.date_properties.items():
        value = getattr(r, attr)
        if value:
            g.add(Triple(svc, _p(local), Literal(value.isoformat(), datatype=Iri(XSD + "date"))))

    for mode in r.modes:
        m = Iri(f"{base}passim/mode/{slugify(mode)}")
        g.add(Triple(svc, _p("transportMode"), m))
        g.add(Triple(m, RDF_TYPE, V.Mode))
        g.add(Triple(m, _p("name"), Literal(mode)))
    for kind in r.service_types:
        s = Iri(f"{base}passim/servicetype/{slugify(kind)}")
        g.add(Triple(svc, _p("serviceType"), s))
        g.add(Triple(s, RDF_TYPE, V.Service))
        g.add(Triple(s, _p("name"), Literal(kind)))
    for city in r.cities_covered:
        g.add(Triple(svc, _p("cityThrough"), Literal(city)))
    return g


def convert_records(records, base: str, raw: bool = False) -> Graph:
    convert = record_to_raw_rdf if raw else record_to_ontology_rdf
    g = Graph()
    for r in records:
        g.update(convert(r, base))
    return g


def rules_text() -> str:
    """The shipped raw -> Passim CONSTRUCT rule set."""
    return resources.files("translod").joinpath("rules/passim.rq").read_text("utf-8")
